"""Unit tests for the Bessel/Hankel kernel: scaled, raw and power-normalized views."""

import csv
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.special import hankel1, jv

from src.solver.errors import OrderOverflow, WouldOverflow, ZeroArgument
from src.solver.special import eval_normalized, eval_raw, eval_scaled, log_power_factor

ORACLE_PATH = Path(__file__).parent.parent / "fixtures" / "bessel_oracle.csv"


def _random_arguments(rng, n: int, count: int) -> np.ndarray:
    """Arguments just below to well above the real axis, |z| in [max(0.1, n/4), 60]."""
    low = max(0.1, n / 4)
    mag = np.exp(rng.uniform(math.log(low), math.log(60.0), count))
    angle = rng.uniform(-0.05, math.pi, count)
    return mag * np.exp(1j * angle)


# ── eval_scaled ──────────────────────────────────────────────────────────


@pytest.mark.unit
class TestEvalScaled:
    def test_matches_library_values_with_exponential_scaling(self):
        z = np.array([0.7 + 0.2j, 3.0 + 4.0j, 12.0 - 1.0j, 1.5 + 20.0j])
        out = eval_scaled(3, z)
        np.testing.assert_allclose(out.j_scaled, jv(3, z) * np.exp(-np.abs(z.imag)), rtol=1e-12)
        np.testing.assert_allclose(out.h_scaled, hankel1(3, z) * np.exp(z.imag), rtol=1e-12)

    def test_derivative_of_order_zero(self):
        z = np.array([2.0 + 0.5j])
        out = eval_scaled(0, z)
        np.testing.assert_allclose(out.jp_scaled, -eval_scaled(1, z).j_scaled, rtol=1e-14)
        np.testing.assert_allclose(out.hp_scaled, -eval_scaled(1, z).h_scaled, rtol=1e-14)

    def test_large_imaginary_argument_stays_finite(self):
        z = np.array([5.0 + 900.0j, 2000.0 + 1500.0j])
        out = eval_scaled(10, z)
        for values in (out.j_scaled, out.jp_scaled, out.h_scaled, out.hp_scaled):
            assert np.all(np.isfinite(values))

    def test_zero_argument_raises(self):
        with pytest.raises(ZeroArgument):
            eval_scaled(1, np.array([1.0, 0.0]))

    def test_order_above_max_raises(self):
        with pytest.raises(OrderOverflow, match="outside"):
            eval_scaled(20, 1.0, max_order=10)

    def test_negative_order_raises(self):
        with pytest.raises(OrderOverflow):
            eval_scaled(-1, 1.0)

    def test_tiny_argument_high_order_overflows(self):
        with pytest.raises(WouldOverflow):
            eval_scaled(200, np.array([1e-3 + 0j]))


# ── Identities ───────────────────────────────────────────────────────────


@pytest.mark.unit
class TestIdentities:
    def setup_method(self):
        self.rng = np.random.default_rng(20240601)

    def test_wronskian_over_random_points(self):
        """J H' - J' H = 2i / (pi z), scaled by e^{Im z - |Im z|}."""
        worst = 0.0
        for n in range(65):
            z = _random_arguments(self.rng, n, 155)
            out = eval_scaled(n, z)
            lhs = out.j_scaled * out.hp_scaled - out.jp_scaled * out.h_scaled
            rhs = 2j / (np.pi * z) * np.exp(z.imag - np.abs(z.imag))
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
        assert worst <= 1e-10

    def test_three_term_recurrence_over_random_points(self):
        """B_{n-1} + B_{n+1} = (2n / z) B_n for J and H."""
        for n in range(1, 64, 3):
            z = _random_arguments(self.rng, n + 1, 150)
            lo, mid, hi = eval_scaled(n - 1, z), eval_scaled(n, z), eval_scaled(n + 1, z)
            for attr in ("j_scaled", "h_scaled"):
                a, b, c = getattr(lo, attr), getattr(mid, attr), getattr(hi, attr)
                residual = np.abs(a + c - (2 * n / z) * b)
                scale = np.maximum.reduce([np.abs(a), np.abs(c), np.abs(2 * n / z * b)])
                assert np.max(residual / scale) <= 1e-10


# ── eval_raw ─────────────────────────────────────────────────────────────


@pytest.mark.unit
class TestEvalRaw:
    def test_agrees_with_scaled_after_unscaling(self):
        z = np.array([0.3 + 0.1j, 4.0 + 2.0j, 9.0 - 3.0j])
        raw = eval_raw(4, z)
        scaled = eval_scaled(4, z)
        np.testing.assert_allclose(raw.j, scaled.j_scaled * np.exp(np.abs(z.imag)), rtol=1e-13)
        np.testing.assert_allclose(raw.hp, scaled.hp_scaled * np.exp(-z.imag), rtol=1e-13)

    def test_refuses_huge_imaginary_part(self):
        with pytest.raises(WouldOverflow, match="too large"):
            eval_raw(0, np.array([1.0 + 800.0j]))


# ── eval_normalized ──────────────────────────────────────────────────────


@pytest.mark.unit
class TestEvalNormalized:
    def test_matches_raw_over_power_factor(self):
        z = np.array([0.2 + 0.05j, 1.0 + 0.5j, 3.0 + 0.1j])
        n = 6
        out = eval_normalized(n, z)
        g = np.exp(log_power_factor(n, z))
        raw = eval_raw(n, z)
        np.testing.assert_allclose(out.j, raw.j / g, rtol=1e-11)
        np.testing.assert_allclose(out.jp, raw.jp / g, rtol=1e-11)
        np.testing.assert_allclose(out.h, raw.h * g, rtol=1e-11)
        np.testing.assert_allclose(out.hp, raw.hp * g, rtol=1e-11)

    def test_small_argument_limits_at_high_order(self):
        """J/g -> 1 and H g -> -i / (pi n) as z -> 0."""
        n = 200
        z = np.array([1e-3 + 0j, 2e-3 + 1e-3j])
        out = eval_normalized(n, z)
        assert np.all(np.isfinite(out.j)) and np.all(np.isfinite(out.h))
        np.testing.assert_allclose(out.j, 1.0, rtol=1e-6)
        np.testing.assert_allclose(out.h, -1j / (np.pi * n), rtol=1e-6)

    def test_derivative_limits_at_high_order(self):
        """J'/g -> n / z and H' g -> i / (pi z) as z -> 0."""
        n = 150
        z = np.array([5e-3 + 0j])
        out = eval_normalized(n, z)
        np.testing.assert_allclose(out.jp, n / z, rtol=1e-5)
        np.testing.assert_allclose(out.hp, 1j / (np.pi * z), rtol=1e-5)

    def test_order_zero_power_factor_is_one(self):
        out = eval_normalized(0, np.array([0.4 + 0.2j]))
        assert out.log_g[0] == 0
        np.testing.assert_allclose(out.j, jv(0, 0.4 + 0.2j), rtol=1e-13)


# ── Arbitrary-precision oracle ───────────────────────────────────────────


def _oracle_rows() -> list[tuple[int, complex, tuple[complex, ...]]]:
    if ORACLE_PATH.exists():
        rows = []
        with ORACLE_PATH.open(newline="") as handle:
            for row in csv.DictReader(handle):
                values = tuple(
                    complex(float(row[f"re_{k}"]), float(row[f"im_{k}"]))
                    for k in ("j", "jp", "h", "hp")
                )
                rows.append((int(row["n"]), complex(float(row["re_z"]), float(row["im_z"])), values))
        return rows

    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    rows = []
    for n in (0, 1, 2, 5, 10, 20, 40):
        for r in (0.05, 0.5, 2.0, 8.0, 25.0):
            for angle in (-60.0, -15.0, 0.0, 30.0, 75.0):
                z = complex(r * math.cos(math.radians(angle)), r * math.sin(math.radians(angle)))
                zm = mpmath.mpc(z.real, z.imag)
                jn, hn = mpmath.besselj(n, zm), mpmath.hankel1(n, zm)
                if n == 0:
                    jp, hp = -mpmath.besselj(1, zm), -mpmath.hankel1(1, zm)
                else:
                    jp = mpmath.besselj(n - 1, zm) - n / zm * jn
                    hp = mpmath.hankel1(n - 1, zm) - n / zm * hn
                rows.append((n, z, tuple(complex(v) for v in (jn, jp, hn, hp))))
    return rows


@pytest.mark.unit
@pytest.mark.oracle
class TestOracleTable:
    def test_table_is_committed(self):
        assert ORACLE_PATH.exists()

    def test_table_has_enough_entries(self):
        assert len(_oracle_rows()) >= 100

    def test_raw_values_match_oracle(self):
        checked = 0
        for n, z, expected in _oracle_rows():
            raw = eval_raw(n, np.array([z]))
            j, jp, h, hp = expected
            got = (raw.j[0], raw.jp[0], raw.h[0], raw.hp[0])
            # derivatives are compared on the scale of the recurrence terms they come from
            scales = (
                abs(j),
                max(abs(jp), (1 + abs(n / z)) * abs(j)),
                abs(h),
                max(abs(hp), (1 + abs(n / z)) * abs(h)),
            )
            for value, want, scale in zip(got, expected, scales, strict=True):
                if not 1e-20 <= abs(want) <= 1e20:
                    continue
                assert abs(value - want) <= 1e-12 * scale, (n, z)
                checked += 1
        assert checked >= 100
