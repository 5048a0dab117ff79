"""
Range-conditioned cylinder functions and function matrices.

Every J-type value is split as J = beta * J_hat and every H-type value as
H = alpha * H_hat with alpha = 1 / beta. The factor is chosen per regime:

    Small     beta = (z/2)^n / n!
    Moderate  beta = |J_n| envelope when it leaves [1/T_m, T_m], else 1
    Large     beta = e^{Im z}

The Moderate envelope continues the Small factor from the regime switch with
the Debye exponent Re(n eta(z/n)), which never decreases along a ray from the
origin. All three pieces are therefore nondecreasing in radius for a fixed
wavenumber, and |beta(a_m) alpha(a_n)| <= 1 holds for a_m < a_n across every
regime switch.

Factors are carried as log(beta). Products like beta(a_m) * alpha(a_n) for
a_m < a_n are formed as exp(log_beta_m - log_beta_n) so unbounded factors are
never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from src.config.constants import MAX_ORDER, RADIAL_WAVENUMBER_FLOOR
from src.solver.errors import RadialWavenumberNearZero, WouldOverflow
from src.solver.mat2 import diag2, from_entries
from src.solver.media import Regime, RegimeConfig, SpectralPoint, classify_regime
from src.solver.special import eval_normalized, eval_scaled


class Family(str, Enum):
    """Which radial wavenumber scales the cylinder-function argument."""

    EPS = "eps"  # krho / kappa_eps
    MU = "mu"  # krho / kappa_mu
    ISO = "iso"  # krho itself


@dataclass(frozen=True)
class FactorPair:
    """Conditioning factor for one (layer, radius, family) over all k_z nodes."""

    log_beta: np.ndarray
    regime: np.ndarray

    @property
    def beta(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_beta)

    @property
    def alpha(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(-self.log_beta)

    def beta_alpha(self, outer: FactorPair) -> np.ndarray:
        """beta(self) * alpha(outer): bounded by 1 when self sits at the smaller radius."""
        return np.exp(self.log_beta - outer.log_beta)


@dataclass(frozen=True)
class ScaledCylBundle:
    """Hatted J, J', H, H' at argument wavenumber * radius, plus their factor."""

    order: int
    radius: float
    family: Family
    wavenumber: np.ndarray
    factors: FactorPair
    j: np.ndarray
    jp: np.ndarray
    h: np.ndarray
    hp: np.ndarray


@dataclass(frozen=True)
class CondMatrixSet:
    """
    Conditioned function matrices of one layer at one radius.

    Unconditioned matrices are recovered as Jz = jz @ B, Hz = hz @ A,
    Jphi = jphi @ B, Hphi = hphi @ A with B = diag(beta_eps, beta_mu), A = B^-1.
    """

    jz: np.ndarray
    hz: np.ndarray
    jphi: np.ndarray
    hphi: np.ndarray
    log_beta: np.ndarray  # (K, 2): eps family, mu family

    @property
    def beta_mat(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            b = np.exp(self.log_beta)
        return diag2(b[..., 0], b[..., 1])

    @property
    def alpha_mat(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            a = np.exp(-self.log_beta)
        return diag2(a[..., 0], a[..., 1])


def family_wavenumber(sp: SpectralPoint, layer: int, family: Family) -> np.ndarray:
    if family is Family.EPS:
        return sp.krho_eps[layer]
    if family is Family.MU:
        return sp.krho_mu[layer]
    return sp.krho[layer]


def debye_exponent(order: int, z) -> np.ndarray:
    """
    Re(n eta(z/n)) with eta(w) = sqrt(1 - w^2) + log(w / (1 + sqrt(1 - w^2))).

    Its derivative along a ray is n Re(sqrt(1 - w^2)) / t >= 0 on the principal
    branch, and |J_n(z)| ~ e^{value} / sqrt(2 pi n) up to algebraic factors.
    """
    w = np.asarray(z, dtype=complex) / order
    s = np.sqrt(1 - w * w)
    return order * (s.real + np.log(np.abs(w)) - np.log(np.abs(1 + s)))


def moderate_log_factor(
    order: int, z: np.ndarray, log_g: np.ndarray, cfg: RegimeConfig
) -> np.ndarray:
    """
    log(beta) for Moderate arguments.

    The envelope equals log|(z_b/2)^n / n!| at the Small switch z_b on the ray
    through z and grows with the Debye exponent from there. Below 1/T_m it is
    used with the phase of the power factor, so beta is continuous at the
    switch; above T_m it is capped by |Im z|, the Large factor; in between
    beta = 1.
    """
    z = np.asarray(z, dtype=complex)
    abs_im = np.abs(z.imag)
    if order == 0:
        envelope = abs_im
    else:
        switch = cfg.small_argument_coeff * math.sqrt(order + 1)
        z_switch = z * (switch / np.abs(z))
        envelope = (
            order * math.log(switch / 2)
            - gammaln(order + 1)
            + debye_exponent(order, z)
            - debye_exponent(order, z_switch)
        )

    limit = math.log(cfg.moderate_threshold)
    log_beta = np.zeros(z.shape, dtype=complex)
    lower = envelope < -limit
    upper = envelope > limit
    log_beta[lower] = envelope[lower] + 1j * log_g[lower].imag
    log_beta[upper] = np.minimum(envelope[upper], abs_im[upper])
    return log_beta


def _small_moderate(
    order: int, z: np.ndarray, moderate: np.ndarray, cfg: RegimeConfig, max_order: int
) -> tuple[np.ndarray, ...]:
    ne = eval_normalized(order, z, max_order)
    log_beta = ne.log_g.copy()
    if np.any(moderate):
        log_beta[moderate] = moderate_log_factor(order, z[moderate], ne.log_g[moderate], cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        shift = np.exp(ne.log_g - log_beta)
        return log_beta, ne.j * shift, ne.jp * shift, ne.h / shift, ne.hp / shift


def scaled_bundle(
    sp: SpectralPoint,
    layer: int,
    radius: float,
    family: Family,
    cfg: RegimeConfig | None = None,
    max_order: int = MAX_ORDER,
) -> ScaledCylBundle:
    """
    Conditioned cylinder functions of one layer at one radius.

    Negative orders use J_{-n} = (-1)^n J_n and the same for H; the factor is
    the one of |n|.
    """
    cfg = cfg or RegimeConfig()
    wavenumber = family_wavenumber(sp, layer, family)
    z = wavenumber * radius
    order = abs(sp.n)
    regime = classify_regime(order, z, cfg)

    shape = z.shape
    log_beta = np.zeros(shape, dtype=complex)
    j = np.zeros(shape, dtype=complex)
    jp = np.zeros(shape, dtype=complex)
    h = np.zeros(shape, dtype=complex)
    hp = np.zeros(shape, dtype=complex)

    near = regime != Regime.LARGE
    if np.any(near):
        moderate = regime[near] == Regime.MODERATE
        lb, vj, vjp, vh, vhp = _small_moderate(order, z[near], moderate, cfg, max_order)
        log_beta[near], j[near], jp[near], h[near], hp[near] = lb, vj, vjp, vh, vhp

    far = ~near
    if np.any(far):
        es = eval_scaled(order, z[far], max_order)
        log_beta[far] = np.abs(z[far].imag)
        j[far], jp[far], h[far], hp[far] = es.j_scaled, es.jp_scaled, es.h_scaled, es.hp_scaled

    for values in (j, jp, h, hp):
        if not np.all(np.isfinite(values)):
            raise WouldOverflow(
                f"conditioned functions not finite (layer {layer}, radius {radius}, n {sp.n})"
            )

    if sp.n < 0 and order % 2 == 1:
        j, jp, h, hp = -j, -jp, -h, -hp

    return ScaledCylBundle(
        order=sp.n,
        radius=radius,
        family=family,
        wavenumber=wavenumber,
        factors=FactorPair(log_beta=log_beta, regime=regime),
        j=j,
        jp=jp,
        h=h,
        hp=hp,
    )


def factors(
    sp: SpectralPoint,
    layer: int,
    radius: float,
    family: Family,
    cfg: RegimeConfig | None = None,
) -> FactorPair:
    return scaled_bundle(sp, layer, radius, family, cfg).factors


def cond_matrices_from_bundles(
    sp: SpectralPoint,
    layer: int,
    radius: float,
    eps_bundle: ScaledCylBundle,
    mu_bundle: ScaledCylBundle,
) -> CondMatrixSet:
    krho = sp.krho[layer]
    if np.any(np.abs(krho) * radius < RADIAL_WAVENUMBER_FLOOR):
        raise RadialWavenumberNearZero(f"|k_rho| * a underflow in layer {layer}")

    n = sp.n
    kz = sp.kz
    omega = sp.omega
    eps_h = sp.eps_h[layer]
    mu_h = sp.mu_h[layer]
    k_eps = eps_bundle.wavenumber
    k_mu = mu_bundle.wavenumber
    scale = 1.0 / (krho**2 * radius)

    def phi_matrix(e_val, e_der, m_val, m_der):
        return scale[:, None, None] * from_entries(
            1j * omega * eps_h * k_eps * radius * e_der,
            -n * kz * m_val,
            -n * kz * e_val,
            -1j * omega * mu_h * k_mu * radius * m_der,
        )

    return CondMatrixSet(
        jz=diag2(eps_bundle.j, mu_bundle.j),
        hz=diag2(eps_bundle.h, mu_bundle.h),
        jphi=phi_matrix(eps_bundle.j, eps_bundle.jp, mu_bundle.j, mu_bundle.jp),
        hphi=phi_matrix(eps_bundle.h, eps_bundle.hp, mu_bundle.h, mu_bundle.hp),
        log_beta=np.stack([eps_bundle.factors.log_beta, mu_bundle.factors.log_beta], axis=-1),
    )


def cond_matrices(
    sp: SpectralPoint, layer: int, radius: float, cfg: RegimeConfig | None = None
) -> CondMatrixSet:
    """Conditioned J_z, H_z, J_phi, H_phi matrices of `layer` at `radius`."""
    eps_bundle = scaled_bundle(sp, layer, radius, Family.EPS, cfg)
    mu_bundle = scaled_bundle(sp, layer, radius, Family.MU, cfg)
    return cond_matrices_from_bundles(sp, layer, radius, eps_bundle, mu_bundle)
