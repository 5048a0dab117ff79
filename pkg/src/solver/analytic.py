"""
Closed-form fields of a Hertzian electric dipole in a homogeneous doubly-uniaxial
medium with kappa_eps = kappa_mu, via coordinate stretching z -> kappa z.

Evaluation happens in the stretched Cartesian frame; cylindrical source and
receiver bases enter only through the final rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.solver.errors import AnisotropyMismatch
from src.solver.integrand import SourceVector
from src.solver.media import UniaxialTensor
from src.solver.results import FieldResult

KAPPA_MATCH_TOLERANCE = 1e-10


def stretched_distance(dx, dy, dz, kappa: complex) -> complex:
    """sqrt(dx^2 + dy^2 + kappa^2 dz^2) on the branch Re >= 0 (Im >= 0 when Re = 0)."""
    r = complex(np.sqrt(complex(dx * dx + dy * dy + (kappa * dz) ** 2)))
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


@dataclass(frozen=True)
class StretchedFrame:
    kappa: complex
    s: tuple[complex, complex, complex]
    k_stretch: complex
    eps_stretch: complex
    mu_stretch: complex
    r_stretch: complex

    @classmethod
    def build(
        cls,
        eps: UniaxialTensor,
        mu: UniaxialTensor,
        omega: float,
        dx: float,
        dy: float,
        dz: float,
    ) -> StretchedFrame:
        kappa_eps = eps.kappa
        kappa_mu = mu.kappa
        if abs(kappa_eps - kappa_mu) > KAPPA_MATCH_TOLERANCE * abs(kappa_eps):
            raise AnisotropyMismatch(
                f"closed form needs kappa_eps == kappa_mu, got {kappa_eps} and {kappa_mu}"
            )
        kappa = kappa_eps
        k = omega * complex(np.sqrt(mu.horizontal * eps.horizontal))
        return cls(
            kappa=kappa,
            s=(1.0, 1.0, kappa),
            k_stretch=k / kappa,
            eps_stretch=eps.horizontal / kappa,
            mu_stretch=mu.horizontal / kappa,
            r_stretch=stretched_distance(dx, dy, dz, kappa),
        )


def _rotation_observer(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _rotation_source(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _to_cartesian(rho: float, phi: float, z: float) -> tuple[float, float, float]:
    return rho * math.cos(phi), rho * math.sin(phi), z


def analytic_fields(
    eps: UniaxialTensor,
    mu: UniaxialTensor,
    omega: float,
    src: SourceVector,
    receiver: tuple[float, float, float],
    cartesian: bool = False,
) -> FieldResult:
    """
    Whole-space E and H at `receiver`.

    The receiver is (rho, phi, z) by default, or (x, y, z) with cartesian=True;
    fields are returned in the receiver's cylindrical basis either way (for
    cartesian=True at the azimuth of the given point).
    """
    if cartesian:
        x, y, z = receiver
        phi = math.atan2(y, x)
    else:
        rho, phi, z = receiver
        x, y, z = _to_cartesian(rho, phi, z)
    xs, ys, zs = _to_cartesian(*src.position)
    if math.isclose(x, xs, abs_tol=1e-15) and math.isclose(y, ys, abs_tol=1e-15) and math.isclose(
        z, zs, abs_tol=1e-15
    ):
        raise ValueError("receiver coincides with the source")

    dx, dy, dz = xs - x, ys - y, zs - z
    frame = StretchedFrame.build(eps, mu, omega, dx, dy, dz)
    kappa = frame.kappa
    k = frame.k_stretch
    r = frame.r_stretch
    big_x, big_y, big_z = dx, dy, kappa * dz

    a = 1j * k / r - 1 / r**2
    b = -(k**2) / r**2 - 3j * k / r**3 + 3 / r**4
    v = np.array([big_x, big_y, big_z], dtype=complex)
    m_e = (k**2 + a) * np.eye(3, dtype=complex) + b * np.outer(v, v)
    m_m = a * np.array(
        [[0, big_z, -big_y], [-big_z, 0, big_x], [big_y, -big_x, 0]], dtype=complex
    )

    s_inv = np.diag([1.0, 1.0, kappa]).astype(complex)
    t1 = _rotation_observer(phi)
    t2 = _rotation_source(src.phi)
    alpha = np.asarray(src.orientation, dtype=complex)
    green = np.exp(1j * k * r) / (4 * math.pi * r)

    e = (1j * src.moment / (omega * frame.eps_stretch)) * green * (
        t1 @ s_inv @ m_e @ s_inv @ t2 @ alpha
    )
    h = src.moment * green * (t1 @ s_inv @ m_m @ s_inv @ t2 @ alpha)
    return FieldResult(E=e, H=h)


def analytic_for_layer(
    eps: UniaxialTensor,
    mu: UniaxialTensor,
    omega: float,
    src: SourceVector,
    receiver: tuple[float, float, float],
) -> FieldResult:
    """Closed form of the isotropic reference medium built from the horizontal parameters."""
    return analytic_fields(
        UniaxialTensor.isotropic(eps.horizontal),
        UniaxialTensor.isotropic(mu.horizontal),
        omega,
        src,
        receiver,
    )
