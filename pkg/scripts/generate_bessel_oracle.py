#!/usr/bin/env python3
"""
Write the arbitrary-precision Bessel/Hankel oracle table used by the kernel tests.

Values are computed with mpmath at 50 digits and stored as 30-digit strings:
    n, re_z, im_z, then re/im of J_n, J'_n, H(1)_n, H(1)'_n

Usage:
    python scripts/generate_bessel_oracle.py [--out tests/fixtures/bessel_oracle.csv]
"""

import argparse
import csv
import sys
from pathlib import Path

import mpmath

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.utils.logger import configure_logging, get_logger

logger = get_logger("bessel_oracle")

ORDERS = (0, 1, 2, 5, 10, 20, 40)
MAGNITUDES = (0.05, 0.5, 2.0, 8.0, 25.0)
ANGLES_DEG = (-60.0, -15.0, 0.0, 30.0, 75.0)
DIGITS = 30


def sample_points() -> list[tuple[int, complex]]:
    points = []
    for n in ORDERS:
        for r in MAGNITUDES:
            for angle in ANGLES_DEG:
                z = complex(mpmath.mpc(mpmath.rect(r, mpmath.radians(angle))))
                points.append((n, z))
    return points


def _bessel_set(n: int, z: mpmath.mpc) -> tuple[mpmath.mpc, ...]:
    def j(m):
        return mpmath.besselj(m, z)

    def h(m):
        return mpmath.hankel1(m, z)

    jn, hn = j(n), h(n)
    if n == 0:
        jp, hp = -j(1), -h(1)
    else:
        jp = j(n - 1) - n / z * jn
        hp = h(n - 1) - n / z * hn
    return jn, jp, hn, hp


def write_oracle(path: Path) -> int:
    mpmath.mp.dps = 50
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["n", "re_z", "im_z"]
    for name in ("j", "jp", "h", "hp"):
        header += [f"re_{name}", f"im_{name}"]

    rows = 0
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for n, z in sample_points():
            zm = mpmath.mpc(z.real, z.imag)
            row = [str(n), repr(z.real), repr(z.imag)]
            for value in _bessel_set(n, zm):
                row += [mpmath.nstr(value.real, DIGITS), mpmath.nstr(value.imag, DIGITS)]
            writer.writerow(row)
            rows += 1
    logger.info("oracle_written", path=str(path), rows=rows)
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description="Generate the Bessel oracle table")
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).parent.parent / "tests" / "fixtures" / "bessel_oracle.csv",
    )
    args = parser.parse_args()
    configure_logging(log_level="INFO")
    write_oracle(args.out)


if __name__ == "__main__":
    main()
