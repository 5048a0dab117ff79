"""
Conditioned spectral integrand F_n(rho, rho') and the field rows built from it.

F_n = left(rho) @ middle @ right(rho') where the brackets carry their exact
radial derivatives. The four cases:

    1  same layer, rho >= rho'      left H-led,  middle M+
    2  same layer, rho <  rho'      left J-led,  middle M-
    3  field layer outside source   middle N+ T~ f M+
    4  field layer inside source    middle N- T~ f M-
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.config.constants import INTERFACE_TOLERANCE, RADIAL_WAVENUMBER_FLOOR
from src.solver.coefficients import (
    CoeffCache,
    Direction,
    generalized_r,
    generalized_t,
    m_factors,
    n_factors,
)
from src.solver.conditioning import Family
from src.solver.errors import FieldOnInterface, RadialWavenumberNearZero, SourceOnInterface
from src.solver.mat2 import diag2, dmul, eye2, muld, mv, pair, parity
from src.solver.media import SpectralPoint


@dataclass(frozen=True)
class BracketEval:
    value: np.ndarray
    dvalue: np.ndarray

    def flipped(self) -> BracketEval:
        return BracketEval(value=parity(self.value), dvalue=parity(self.dvalue))


@dataclass(frozen=True)
class SourceVector:
    """
    Hertzian electric dipole: moment Il (A m), unit orientation in the source's
    cylindrical basis (rho', phi', z'), position (rho', phi' rad, z').
    """

    moment: complex
    orientation: tuple[float, float, float]
    position: tuple[float, float, float]

    def __post_init__(self):
        norm = float(np.linalg.norm(np.asarray(self.orientation, dtype=float)))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"dipole orientation must be a unit vector, |a| = {norm}")
        if self.position[0] <= 0:
            raise ValueError("source radius must be positive")

    @classmethod
    def from_direction(
        cls, moment: complex, direction, position: tuple[float, float, float]
    ) -> SourceVector:
        vec = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("dipole direction must be nonzero")
        unit = vec / norm
        return cls(
            moment=moment,
            orientation=(float(unit[0]), float(unit[1]), float(unit[2])),
            position=tuple(float(p) for p in position),
        )

    @property
    def rho(self) -> float:
        return self.position[0]

    @property
    def phi(self) -> float:
        return self.position[1]

    @property
    def z(self) -> float:
        return self.position[2]


@dataclass(frozen=True)
class FnParts:
    left: BracketEval
    middle: np.ndarray
    right: BracketEval
    case: int
    field_layer: int
    source_layer: int

    def flipped(self) -> FnParts:
        """P F P with P = diag(1, -1): the integrand at -n or at -k_z."""
        return FnParts(
            left=self.left.flipped(),
            middle=parity(self.middle),
            right=self.right.flipped(),
            case=self.case,
            field_layer=self.field_layer,
            source_layer=self.source_layer,
        )


@dataclass(frozen=True)
class _Funcs:
    """Hatted diagonals of one layer at one radius: J, dJ/drho, H, dH/drho."""

    j: np.ndarray
    dj: np.ndarray
    h: np.ndarray
    dh: np.ndarray


def _funcs(cache: CoeffCache, layer: int, radius: float, iso: bool = False) -> _Funcs:
    if iso:
        eb = mb = cache.bundle(layer, radius, Family.ISO)
    else:
        eb = cache.bundle(layer, radius, Family.EPS)
        mb = cache.bundle(layer, radius, Family.MU)
    return _Funcs(
        j=pair(eb.j, mb.j),
        dj=pair(eb.jp * eb.wavenumber, mb.jp * mb.wavenumber),
        h=pair(eb.h, mb.h),
        dh=pair(eb.hp * eb.wavenumber, mb.hp * mb.wavenumber),
    )


def _fused(cache: CoeffCache, layer: int, inner: float, outer: float, iso: bool) -> np.ndarray:
    if not iso:
        return cache.fused(layer, inner, outer)
    lb_inner = cache.bundle(layer, inner, Family.ISO).factors.log_beta
    lb_outer = cache.bundle(layer, outer, Family.ISO).factors.log_beta
    f = np.exp(lb_inner - lb_outer)
    return pair(f, f)


def _h_led_right(cache: CoeffCache, j: int, s: float) -> BracketEval:
    """J(s) + f(a_{j-1}, s) R~_in f(a_{j-1}, s) H(s): right bracket of Cases 1 and 3."""
    src = _funcs(cache, j, s)
    value = diag2(src.j[..., 0], src.j[..., 1])
    dvalue = diag2(src.dj[..., 0], src.dj[..., 1])
    if j > 0:
        f = cache.fused(j, cache.radius(j - 1), s)
        r_in = generalized_r(cache, Direction.STANDING, j)
        core = dmul(f, r_in)
        value = value + muld(core, f * src.h)
        dvalue = dvalue + muld(core, f * src.dh)
    return BracketEval(value=value, dvalue=dvalue)


def _j_led_right(cache: CoeffCache, j: int, s: float) -> BracketEval:
    """H(s) + f(s, a_j) R~_out f(s, a_j) J(s): right bracket of Cases 2 and 4."""
    src = _funcs(cache, j, s)
    value = diag2(src.h[..., 0], src.h[..., 1])
    dvalue = diag2(src.dh[..., 0], src.dh[..., 1])
    if j < cache.n_layers - 1:
        f = cache.fused(j, s, cache.radius(j))
        r_out = generalized_r(cache, Direction.OUTGOING, j)
        core = dmul(f, r_out)
        value = value + muld(core, f * src.j)
        dvalue = dvalue + muld(core, f * src.dj)
    return BracketEval(value=value, dvalue=dvalue)


def _outer_left(cache: CoeffCache, i: int, rho: float, ref: float) -> BracketEval:
    """
    f(ref, rho) H(rho) + f(rho, a_i) J(rho) R~_out f(ref, a_i).

    ref is the source radius in Case 1 and a_{i-1} in Case 3.
    """
    fld = _funcs(cache, i, rho)
    f_ref = cache.fused(i, ref, rho)
    value = diag2(*(f_ref * fld.h).T)
    dvalue = diag2(*(f_ref * fld.dh).T)
    if i < cache.n_layers - 1:
        a_i = cache.radius(i)
        f_rho = cache.fused(i, rho, a_i)
        r_tail = muld(generalized_r(cache, Direction.OUTGOING, i), cache.fused(i, ref, a_i))
        value = value + dmul(f_rho * fld.j, r_tail)
        dvalue = dvalue + dmul(f_rho * fld.dj, r_tail)
    return BracketEval(value=value, dvalue=dvalue)


def _inner_left(cache: CoeffCache, i: int, rho: float, ref: float) -> BracketEval:
    """
    f(rho, ref) J(rho) + f(a_{i-1}, rho) H(rho) R~_in f(a_{i-1}, ref).

    ref is the source radius in Case 2 and a_i in Case 4.
    """
    fld = _funcs(cache, i, rho)
    f_ref = cache.fused(i, rho, ref)
    value = diag2(*(f_ref * fld.j).T)
    dvalue = diag2(*(f_ref * fld.dj).T)
    if i > 0:
        inner_a = cache.radius(i - 1)
        f_rho = cache.fused(i, inner_a, rho)
        r_tail = muld(generalized_r(cache, Direction.STANDING, i), cache.fused(i, inner_a, ref))
        value = value + dmul(f_rho * fld.h, r_tail)
        dvalue = dvalue + dmul(f_rho * fld.dh, r_tail)
    return BracketEval(value=value, dvalue=dvalue)


def classify_case(field_layer: int, source_layer: int, rho: float, rho_src: float) -> int:
    if field_layer == source_layer:
        return 1 if rho >= rho_src else 2
    return 3 if field_layer > source_layer else 4


def _check_geometry(cache: CoeffCache, rho: float, rho_src: float, tolerance: float):
    if rho <= 0 or rho_src <= 0:
        raise ValueError("field and source radii must be positive")
    if cache.stack.near_interface(rho_src, tolerance):
        raise SourceOnInterface(f"source radius {rho_src} is on an interface")
    if cache.stack.near_interface(rho, tolerance):
        raise FieldOnInterface(f"field radius {rho} is on an interface")


def assemble_fn(
    cache: CoeffCache,
    rho: float,
    rho_src: float,
    tolerance: float = INTERFACE_TOLERANCE,
) -> FnParts:
    """Build the conditioned (left, middle, right) factorization of F_n."""
    _check_geometry(cache, rho, rho_src, tolerance)
    i = cache.stack.locate(rho)
    j = cache.stack.locate(rho_src)
    case = classify_case(i, j, rho, rho_src)

    if case == 1:
        left = _outer_left(cache, i, rho, rho_src)
        middle = m_factors(cache, j, rho_src)[0]
        right = _h_led_right(cache, j, rho_src)
    elif case == 2:
        left = _inner_left(cache, i, rho, rho_src)
        middle = m_factors(cache, j, rho_src)[1]
        right = _j_led_right(cache, j, rho_src)
    elif case == 3:
        left = _outer_left(cache, i, rho, cache.radius(i - 1))
        n_plus = n_factors(cache, i)[0]
        m_plus = m_factors(cache, j, rho_src)[0]
        t = generalized_t(cache, j, i)
        middle = n_plus @ t @ dmul(cache.fused(j, rho_src, cache.radius(j)), m_plus)
        right = _h_led_right(cache, j, rho_src)
    else:
        left = _inner_left(cache, i, rho, cache.radius(i))
        n_minus = n_factors(cache, i)[1]
        m_minus = m_factors(cache, j, rho_src)[1]
        t = generalized_t(cache, j, i)
        middle = n_minus @ t @ dmul(cache.fused(j, cache.radius(j - 1), rho_src), m_minus)
        right = _j_led_right(cache, j, rho_src)

    return FnParts(
        left=left, middle=middle, right=right, case=case, field_layer=i, source_layer=j
    )


def assemble_primary(
    cache: CoeffCache,
    rho: float,
    rho_src: float,
    iso: bool = False,
    tolerance: float = INTERFACE_TOLERANCE,
) -> FnParts:
    """
    Homogeneous-medium part of F_n for a source and receiver in the same layer.

    With iso=True both families use the isotropic argument k_rho * rho, which
    is the kernel of the isotropic reference medium built from the layer's
    horizontal parameters.
    """
    _check_geometry(cache, rho, rho_src, tolerance)
    i = cache.stack.locate(rho)
    j = cache.stack.locate(rho_src)
    if i != j:
        raise ValueError("primary term needs source and receiver in one layer")

    fld = _funcs(cache, i, rho, iso)
    src = _funcs(cache, j, rho_src, iso)
    if rho >= rho_src:
        f = _fused(cache, i, rho_src, rho, iso)
        left = BracketEval(value=diag2(*(f * fld.h).T), dvalue=diag2(*(f * fld.dh).T))
        right = BracketEval(value=diag2(*src.j.T), dvalue=diag2(*src.dj.T))
        case = 1
    else:
        f = _fused(cache, i, rho, rho_src, iso)
        left = BracketEval(value=diag2(*(f * fld.j).T), dvalue=diag2(*(f * fld.dj).T))
        right = BracketEval(value=diag2(*src.h.T), dvalue=diag2(*src.dh.T))
        case = 2
    return FnParts(
        left=left, middle=eye2(cache.n_nodes), right=right, case=case, field_layer=i, source_layer=j
    )


def apply_source(parts: FnParts, src: SourceVector, sp: SpectralPoint) -> np.ndarray:
    """
    (i/2) F_n D'_j as a (K, 2) vector for (E_z, H_z), without the common prefactor.

    The rho' derivative of D'_j acts on the right bracket through its dvalue.
    """
    a_rho, a_phi, a_z = src.orientation
    j = parts.source_layer
    s = src.rho
    n = sp.n
    kz = sp.kz
    krho_sq = sp.krho[j] ** 2
    omega_eps = sp.omega * sp.eps_h[j]

    d12 = pair(krho_sq * a_z - n * kz * a_phi / s, -n * omega_eps * a_rho / s * np.ones_like(kz))
    d3 = pair(-1j * kz * a_rho, 1j * omega_eps * a_phi * np.ones_like(kz))
    excitation = mv(parts.right.value, d12) + mv(parts.right.dvalue, d3)
    return 0.5j * mv(parts.middle, excitation)


@dataclass(frozen=True)
class TransverseOperators:
    """Maps (E_z, H_z) and their rho-derivatives to rho and phi components."""

    n: int
    kz: np.ndarray
    krho_sq: np.ndarray
    omega_eps: complex
    omega_mu: complex

    def rho_rows(self, u: np.ndarray, du: np.ndarray, rho: float) -> np.ndarray:
        """(E_rho, H_rho) from i kz d/drho (E_z, H_z) plus the n omega / rho cross-coupling."""
        e = 1j * self.kz * du[..., 0] - self.n * self.omega_mu / rho * u[..., 1]
        h = 1j * self.kz * du[..., 1] + self.n * self.omega_eps / rho * u[..., 0]
        return pair(e, h) / self.krho_sq[..., None]

    def phi_rows(self, u: np.ndarray, du: np.ndarray, rho: float) -> np.ndarray:
        """(E_phi, H_phi) from the cross-coupled d/drho terms minus (n kz / rho)(E_z, H_z)."""
        e = -1j * self.omega_mu * du[..., 1] - self.n * self.kz / rho * u[..., 0]
        h = 1j * self.omega_eps * du[..., 0] - self.n * self.kz / rho * u[..., 1]
        return pair(e, h) / self.krho_sq[..., None]


def transverse_operators(sp: SpectralPoint, layer: int, rho: float = 1.0) -> TransverseOperators:
    krho = sp.krho[layer]
    if np.any(np.abs(krho) * rho < RADIAL_WAVENUMBER_FLOOR):
        raise RadialWavenumberNearZero(f"|k_rho| underflow in field layer {layer}")
    return TransverseOperators(
        n=sp.n,
        kz=sp.kz,
        krho_sq=krho**2,
        omega_eps=sp.omega * sp.eps_h[layer],
        omega_mu=sp.omega * sp.mu_h[layer],
    )


def field_integrand(
    parts: FnParts, src: SourceVector, sp: SpectralPoint, rho: float
) -> np.ndarray:
    """
    Six field integrands (E_rho, E_phi, E_z, H_rho, H_phi, H_z) per k_z node, shape (K, 6),
    without the i Il / (4 pi omega eps_hj) prefactor and the e^{i n dphi} e^{i kz dz} phases.
    """
    v = apply_source(parts, src, sp)
    u = mv(parts.left.value, v)
    du = mv(parts.left.dvalue, v)
    ops = transverse_operators(sp, parts.field_layer, rho)
    rho_rows = ops.rho_rows(u, du, rho)
    phi_rows = ops.phi_rows(u, du, rho)
    return np.stack(
        [
            rho_rows[..., 0],
            phi_rows[..., 0],
            u[..., 0],
            rho_rows[..., 1],
            phi_rows[..., 1],
            u[..., 1],
        ],
        axis=-1,
    )

