"""
Local, generalized and composite reflection/transmission coefficients.

All matrices here are conditioned ("hatted") 2x2 batches over the k_z nodes of one
SpectralPoint. Interface k sits at radius a_k between layers k and k+1.
Naming per interface k:

    r_out  R_{k,k+1}   wave from layer k reflected back at a_k
    t_out  T_{k,k+1}   wave from layer k transmitted outward
    r_in   R_{k+1,k}   wave from layer k+1 reflected back at a_k
    t_in   T_{k+1,k}   wave from layer k+1 transmitted inward

Unconditioned coefficients follow from the sandwiches in SANDWICHES, where
"inner" is layer k and "outer" is layer k+1, both evaluated at a_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.config.constants import COEFFICIENT_MAGNITUDE_LIMIT, MAX_ORDER
from src.solver.conditioning import (
    CondMatrixSet,
    Family,
    ScaledCylBundle,
    cond_matrices_from_bundles,
    scaled_bundle,
)
from src.solver.errors import SingularInterfaceMatrix
from src.solver.mat2 import dmul, eye2, inv2, max_entry, muld, sandwich, zeros2
from src.solver.media import LayerStack, RegimeConfig, SpectralPoint


class Direction(str, Enum):
    OUTGOING = "outgoing"
    STANDING = "standing"


# coefficient -> (left factor, right factor) as (kind, side)
SANDWICHES: dict[str, tuple[tuple[str, str], tuple[str, str]]] = {
    "r_out": (("alpha", "inner"), ("alpha", "inner")),
    "r_in": (("beta", "outer"), ("beta", "outer")),
    "t_out": (("beta", "outer"), ("alpha", "inner")),
    "t_in": (("alpha", "inner"), ("beta", "outer")),
}


@dataclass(frozen=True)
class LocalCoefficients:
    interface: int
    r_out: np.ndarray
    t_out: np.ndarray
    r_in: np.ndarray
    t_in: np.ndarray

    def unconditioned(self, inner: CondMatrixSet, outer: CondMatrixSet) -> dict[str, np.ndarray]:
        """Undo the factor sandwiches; only meaningful where the factors are representable."""
        mats = {
            ("alpha", "inner"): inner.alpha_mat,
            ("beta", "inner"): inner.beta_mat,
            ("alpha", "outer"): outer.alpha_mat,
            ("beta", "outer"): outer.beta_mat,
        }
        out = {}
        for name, (left, right) in SANDWICHES.items():
            out[name] = mats[left] @ getattr(self, name) @ mats[right]
        return out


@dataclass
class CoeffCache:
    """
    Memo of everything computed for one SpectralPoint (one order n, all k_z nodes).

    Created per work item and never shared across threads.
    """

    sp: SpectralPoint
    stack: LayerStack
    regime_cfg: RegimeConfig = field(default_factory=RegimeConfig)
    magnitude_limit: float = COEFFICIENT_MAGNITUDE_LIMIT
    max_order: int = MAX_ORDER
    peak: float = 0.0
    peak_name: str | None = None
    _bundles: dict = field(default_factory=dict, repr=False)
    _conds: dict = field(default_factory=dict, repr=False)
    _local: dict = field(default_factory=dict, repr=False)
    _generalized: dict = field(default_factory=dict, repr=False)
    _s: dict = field(default_factory=dict, repr=False)

    @property
    def n_layers(self) -> int:
        return self.stack.n_layers

    @property
    def n_nodes(self) -> int:
        return self.sp.n_nodes

    def radius(self, interface: int) -> float:
        return self.stack.layers[interface].outer_radius

    def bundle(self, layer: int, radius: float, family: Family) -> ScaledCylBundle:
        key = (layer, float(radius), family)
        if key not in self._bundles:
            self._bundles[key] = scaled_bundle(
                self.sp, layer, radius, family, self.regime_cfg, self.max_order
            )
        return self._bundles[key]

    def cond(self, layer: int, radius: float) -> CondMatrixSet:
        key = (layer, float(radius))
        if key not in self._conds:
            self._conds[key] = cond_matrices_from_bundles(
                self.sp,
                layer,
                radius,
                self.bundle(layer, radius, Family.EPS),
                self.bundle(layer, radius, Family.MU),
            )
        return self._conds[key]

    def log_beta(self, layer: int, radius: float) -> np.ndarray:
        """(K, 2) log factors of the eps and mu families."""
        return np.stack(
            [
                self.bundle(layer, radius, Family.EPS).factors.log_beta,
                self.bundle(layer, radius, Family.MU).factors.log_beta,
            ],
            axis=-1,
        )

    def fused(self, layer: int, inner_radius: float, outer_radius: float) -> np.ndarray:
        """beta(layer, inner) * alpha(layer, outer) as a (K, 2) diagonal."""
        return np.exp(self.log_beta(layer, inner_radius) - self.log_beta(layer, outer_radius))

    def layer_fused(self, layer: int) -> np.ndarray:
        """Fused factor across the whole of a finite, non-innermost layer."""
        return self.fused(layer, self.radius(layer - 1), self.radius(layer))

    def check_magnitude(self, name: str, m: np.ndarray) -> np.ndarray:
        """Reject non-finite coefficients and record the largest entry seen."""
        if not np.all(np.isfinite(m)):
            raise SingularInterfaceMatrix(f"{name} is not finite at n={self.sp.n}")
        peak = max_entry(m)
        if peak > self.peak:
            self.peak = peak
            self.peak_name = name
        return m

    @property
    def exceeded(self) -> bool:
        return self.peak > self.magnitude_limit


def local_rt(cache: CoeffCache, interface: int) -> LocalCoefficients:
    """
    Conditioned local coefficients at interface `interface`.

    Uses D_A = Jz1 - Hz2 Hphi2^-1 Jphi1, which stays well-scaled because every
    factor matrix cancels out of the hatted forms.
    """
    if interface in cache._local:
        return cache._local[interface]
    if not 0 <= interface < cache.n_layers - 1:
        raise IndexError(f"interface {interface} outside stack")

    a = cache.radius(interface)
    inner = cache.cond(interface, a)
    outer = cache.cond(interface + 1, a)

    hphi2_inv = inv2(outer.hphi, "outer H_phi matrix")
    x = outer.hz @ hphi2_inv
    d_a = inner.jz - x @ inner.jphi
    d_a_inv = inv2(d_a, f"D_A at interface {interface}")

    r_out = d_a_inv @ (x @ inner.hphi - inner.hz)
    t_out = hphi2_inv @ (inner.hphi + inner.jphi @ r_out)
    t_in = d_a_inv @ (outer.jz - x @ outer.jphi)
    r_in = hphi2_inv @ (inner.jphi @ t_in - outer.jphi)

    coeffs = LocalCoefficients(
        interface=interface,
        r_out=cache.check_magnitude("r_out", r_out),
        t_out=cache.check_magnitude("t_out", t_out),
        r_in=cache.check_magnitude("r_in", r_in),
        t_in=cache.check_magnitude("t_in", t_in),
    )
    cache._local[interface] = coeffs
    return coeffs


def generalized_r(cache: CoeffCache, direction: Direction, layer: int) -> np.ndarray:
    """
    Generalized reflection seen from inside `layer`.

    OUTGOING: reflection at the outer boundary a_layer including everything
    beyond it (zero in the outermost layer). STANDING: reflection at the inner
    boundary a_{layer-1} including everything inside it (zero in the innermost
    layer).
    """
    key = (direction, layer)
    if key in cache._generalized:
        return cache._generalized[key]

    last = cache.n_layers - 1
    batch = cache.n_nodes
    if direction is Direction.OUTGOING:
        if layer >= last:
            result = zeros2(batch)
        else:
            loc = local_rt(cache, layer)
            if layer + 1 == last:
                result = loc.r_out
            else:
                beyond = generalized_r(cache, direction, layer + 1)
                f = cache.layer_fused(layer + 1)
                bounced = sandwich(f, beyond, f)
                bracket = inv2(eye2(batch) - loc.r_in @ bounced, "outgoing multiple-bounce term")
                result = loc.r_out + loc.t_in @ bounced @ bracket @ loc.t_out
    else:
        if layer <= 0:
            result = zeros2(batch)
        else:
            loc = local_rt(cache, layer - 1)
            if layer - 1 == 0:
                result = loc.r_in
            else:
                inside = generalized_r(cache, direction, layer - 1)
                g = cache.layer_fused(layer - 1)
                bounced = sandwich(g, inside, g)
                bracket = inv2(eye2(batch) - loc.r_out @ bounced, "standing multiple-bounce term")
                result = loc.r_in + loc.t_out @ bounced @ bracket @ loc.t_in

    result = cache.check_magnitude(f"generalized_r[{direction.value},{layer}]", result)
    cache._generalized[key] = result
    return result


def s_coefficient(cache: CoeffCache, direction: Direction, interface: int) -> np.ndarray:
    """
    [I - R R~]^-1 T across `interface`.

    OUTGOING: S_{k,k+1} = [I - R_{k+1,k} R~_{k+1,k+2}]^-1 T_{k,k+1}.
    STANDING: S_{k+1,k} = [I - R_{k,k+1} R~_{k,k-1}]^-1 T_{k+1,k}.
    """
    key = (direction, interface)
    if key in cache._s:
        return cache._s[key]

    batch = cache.n_nodes
    loc = local_rt(cache, interface)
    if direction is Direction.OUTGOING:
        beyond_layer = interface + 1
        if beyond_layer == cache.n_layers - 1:
            result = loc.t_out
        else:
            f = cache.layer_fused(beyond_layer)
            bounced = sandwich(f, generalized_r(cache, direction, beyond_layer), f)
            result = inv2(eye2(batch) - loc.r_in @ bounced, "S outgoing") @ loc.t_out
    else:
        if interface == 0:
            result = loc.t_in
        else:
            g = cache.layer_fused(interface)
            bounced = sandwich(g, generalized_r(cache, direction, interface), g)
            result = inv2(eye2(batch) - loc.r_out @ bounced, "S standing") @ loc.t_in

    result = cache.check_magnitude(f"s[{direction.value},{interface}]", result)
    cache._s[key] = result
    return result


def generalized_t(cache: CoeffCache, source_layer: int, field_layer: int) -> np.ndarray:
    """
    Conditioned transmission from `source_layer` j to `field_layer` i.

    i > j: T_{i-1,i} (f S_{i-2,i-1}) ... (f S_{j,j+1}); the k=j factor is rightmost.
    i < j: T_{i+1,i} (f S_{i+2,i+1}) ... (f S_{j,j-1}); the k=j-1 factor is rightmost.
    Each f is the fused factor across the intermediate layer.
    """
    j, i = source_layer, field_layer
    if i == j:
        raise ValueError("generalized transmission needs distinct layers")

    if i > j:
        result = local_rt(cache, i - 1).t_out
        for k in range(i - 2, j - 1, -1):
            s = s_coefficient(cache, Direction.OUTGOING, k)
            result = result @ dmul(cache.layer_fused(k + 1), s)
    else:
        result = local_rt(cache, i).t_in
        for k in range(i + 1, j):
            s = s_coefficient(cache, Direction.STANDING, k)
            result = result @ dmul(cache.layer_fused(k), s)
    return result


def m_factors(cache: CoeffCache, source_layer: int, rho_src: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Source-layer multiple-bounce factors (M+, M-), referenced to the source radius.

    Identity when the source layer is innermost or outermost, since one of the
    two generalized reflections vanishes.
    """
    j = source_layer
    batch = cache.n_nodes
    if j == 0 or j == cache.n_layers - 1:
        return eye2(batch), eye2(batch)

    inner_a = cache.radius(j - 1)
    outer_a = cache.radius(j)
    r_out = generalized_r(cache, Direction.OUTGOING, j)
    r_in = generalized_r(cache, Direction.STANDING, j)
    f_inner_src = cache.fused(j, inner_a, rho_src)
    f_src_outer = cache.fused(j, rho_src, outer_a)
    f_layer = cache.layer_fused(j)

    plus = dmul(f_inner_src, r_in) @ dmul(f_layer, r_out)
    plus = muld(plus, f_src_outer)
    minus = dmul(f_src_outer, r_out) @ dmul(f_layer, r_in)
    minus = muld(minus, f_inner_src)
    return (
        inv2(eye2(batch) - plus, "M+ factor"),
        inv2(eye2(batch) - minus, "M- factor"),
    )


def n_factors(cache: CoeffCache, field_layer: int) -> tuple[np.ndarray, np.ndarray]:
    """Field-layer multiple-bounce factors (N+, N-); identity in the innermost/outermost layer."""
    i = field_layer
    batch = cache.n_nodes
    if i == 0 or i == cache.n_layers - 1:
        return eye2(batch), eye2(batch)

    f = cache.layer_fused(i)
    r_out = generalized_r(cache, Direction.OUTGOING, i)
    r_in = generalized_r(cache, Direction.STANDING, i)
    plus = local_rt(cache, i - 1).r_in @ sandwich(f, r_out, f)
    minus = local_rt(cache, i).r_out @ sandwich(f, r_in, f)
    return (
        inv2(eye2(batch) - plus, "N+ factor"),
        inv2(eye2(batch) - minus, "N- factor"),
    )
