"""
Spectral field evaluation: azimuthal mode sum and k_z contour quadrature.

    (E_z, H_z) = i Il / (4 pi omega eps_hj)
                 * int dkz e^{i kz (z - z')} sum_n e^{i n (phi - phi')} F_n D'_j

with the rho and phi components produced from the same integrand by the
transverse operators. Modes are summed in a fixed order so results do not
depend on how receivers are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.config import constants as C
from src.solver.analytic import analytic_fields, analytic_for_layer
from src.solver.coefficients import CoeffCache
from src.solver.errors import UnsupportedAnisotropy
from src.solver.integrand import (
    FnParts,
    SourceVector,
    assemble_fn,
    assemble_primary,
    field_integrand,
)
from src.solver.media import LayerStack, RegimeConfig, SpectralPoint, derive_spectral
from src.solver.paths import Panel, PathConfig, PathKind, PathSpec, build_path
from src.solver.results import COMPONENTS, FieldDiagnostics, FieldResult
from src.utils.logger import get_logger
from src.utils.retry import retry_with_wider_detour

logger = get_logger("spectral")

__all__ = [
    "PathKind",
    "PathSpec",
    "SubtractionMode",
    "SubtractionPlan",
    "SummationConfig",
    "build_path",
    "direct_subtraction",
    "evaluate",
]

KAPPA_MATCH_TOLERANCE = 1e-10


class SubtractionMode(str, Enum):
    AUTO = "auto"
    ON = "on"
    OFF = "off"
    ISOTROPIC = "isotropic"


@dataclass(frozen=True)
class SummationConfig:
    n_max: int = C.DEFAULT_N_MAX
    n_int: int = C.DEFAULT_N_INT
    fold: bool = True
    mode_tolerance: float = C.MODE_TOLERANCE
    points_per_panel: int = C.POINTS_PER_PANEL
    fold_kz: bool = True

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")
        if self.points_per_panel < 2:
            raise ValueError("points_per_panel must be at least 2")
        if self.n_int < 2 * self.points_per_panel:
            raise ValueError("n_int must cover at least one panel per path half")

    @classmethod
    def from_settings(cls, settings) -> SummationConfig:
        return cls(
            n_max=settings.n_max,
            n_int=settings.n_int,
            fold=settings.fold,
            mode_tolerance=settings.mode_tolerance,
            points_per_panel=settings.points_per_panel,
            fold_kz=settings.fold_kz,
        )


@dataclass(frozen=True)
class SubtractionPlan:
    """Whether the homogeneous-medium term is split off, and how it is added back."""

    mode: SubtractionMode
    active: bool = False
    iso: bool = False
    layer: int = 0
    flag: str | None = None

    def closed_form(
        self, stack: LayerStack, src: SourceVector, receiver: tuple[float, float, float]
    ) -> FieldResult:
        layer = stack.layers[self.layer]
        if self.iso:
            return analytic_for_layer(layer.eps, layer.mu, stack.omega, src, receiver)
        return analytic_fields(layer.eps, layer.mu, stack.omega, src, receiver)


def direct_subtraction(
    stack: LayerStack,
    src: SourceVector,
    receiver: tuple[float, float, float],
    mode: SubtractionMode = SubtractionMode.AUTO,
) -> SubtractionPlan:
    """
    Decide the direct-field split for one source/receiver pair.

    Auto subtracts whenever a closed form exists for the source layer
    (kappa_eps == kappa_mu) and flags the layer otherwise. On raises for
    mismatched ratios. Isotropic subtracts the isotropic reference medium,
    which has a closed form for any anisotropy.
    """
    mode = SubtractionMode(mode)
    if mode is SubtractionMode.OFF:
        return SubtractionPlan(mode=mode)

    j = stack.locate(src.rho)
    if stack.locate(receiver[0]) != j:
        return SubtractionPlan(mode=mode, flag="different_layers")

    if mode is SubtractionMode.ISOTROPIC:
        return SubtractionPlan(mode=mode, active=True, iso=True, layer=j)

    layer = stack.layers[j]
    kappa_eps, kappa_mu = layer.eps.kappa, layer.mu.kappa
    matched = abs(kappa_eps - kappa_mu) <= KAPPA_MATCH_TOLERANCE * abs(kappa_eps)
    if matched:
        return SubtractionPlan(mode=mode, active=True, layer=j)
    if mode is SubtractionMode.ON:
        raise UnsupportedAnisotropy(
            f"direct subtraction needs kappa_eps == kappa_mu in layer {j}, "
            f"got {kappa_eps:.6g} and {kappa_mu:.6g}"
        )
    return SubtractionPlan(mode=mode, layer=j, flag="anisotropy_mismatch")


@dataclass
class _Evaluation:
    """Everything fixed for one receiver; the quadrature loops read from here."""

    stack: LayerStack
    src: SourceVector
    rho: float
    dphi: float
    dz: float
    cfg: SummationConfig
    regime_cfg: RegimeConfig
    plan: SubtractionPlan
    magnitude_limit: float
    max_order: int
    interface_tolerance: float
    phases: np.ndarray = field(init=False)
    coefficient_peak: float = field(default=0.0, init=False)
    peak_coefficient: str | None = field(default=None, init=False)

    def __post_init__(self):
        orders = np.arange(-self.cfg.n_max, self.cfg.n_max + 1)
        self.phases = np.exp(1j * orders * self.dphi)

    def cache(self, sp: SpectralPoint) -> CoeffCache:
        return CoeffCache(
            sp=sp,
            stack=self.stack,
            regime_cfg=self.regime_cfg,
            magnitude_limit=self.magnitude_limit,
            max_order=self.max_order,
        )

    def _rows(self, parts: FnParts, primary: FnParts | None, sp: SpectralPoint) -> np.ndarray:
        values = field_integrand(parts, self.src, sp, self.rho)
        if primary is not None:
            values = values - field_integrand(primary, self.src, sp, self.rho)
        return values

    def _assemble(self, sp: SpectralPoint) -> tuple[FnParts, FnParts | None]:
        cache = self.cache(sp)
        parts = assemble_fn(cache, self.rho, self.src.rho, self.interface_tolerance)
        primary = None
        if self.plan.active:
            primary = assemble_primary(
                cache, self.rho, self.src.rho, iso=self.plan.iso, tolerance=self.interface_tolerance
            )
        if cache.peak > self.coefficient_peak:
            self.coefficient_peak = cache.peak
            self.peak_coefficient = cache.peak_name
        return parts, primary

    def mode_values(self, kz: np.ndarray, mirror: bool) -> np.ndarray:
        """
        Integrand per order n = -n_max..n_max and node, shape (2 n_max + 1, K, 6).

        With mirror=True each entry is f(kz) e^{i kz dz} + f(-kz) e^{-i kz dz};
        otherwise f(kz) e^{i kz dz}.
        """
        n_max = self.cfg.n_max
        out = np.zeros((2 * n_max + 1, kz.shape[0], 6), dtype=complex)
        if kz.shape[0] == 0:
            return out
        forward = np.exp(1j * kz * self.dz)[:, None]
        backward = np.exp(-1j * kz * self.dz)[:, None]
        base = derive_spectral(self.stack, 0, kz)

        for n in range(n_max + 1):
            sp = base.with_order(n)
            parts, primary = self._assemble(sp)
            out[n_max + n] = self._rows(parts, primary, sp) * forward
            if mirror:
                out[n_max + n] += self._mirror_rows(parts, primary, sp) * backward
            if n == 0:
                continue

            sp_neg = base.with_order(-n)
            if self.cfg.fold:
                neg_parts = parts.flipped()
                neg_primary = primary.flipped() if primary is not None else None
                out[n_max - n] = self._rows(neg_parts, neg_primary, sp_neg) * forward
                if mirror:
                    out[n_max - n] += self._mirror_rows(neg_parts, neg_primary, sp_neg) * backward
            else:
                neg_parts, neg_primary = self._assemble(sp_neg)
                out[n_max - n] = self._rows(neg_parts, neg_primary, sp_neg) * forward
                if mirror:
                    out[n_max - n] += self._mirror_rows(neg_parts, neg_primary, sp_neg) * backward
        return out

    def _mirror_rows(
        self, parts: FnParts, primary: FnParts | None, sp: SpectralPoint
    ) -> np.ndarray:
        """Integrand at -kz for the same order."""
        if self.cfg.fold_kz:
            flipped_primary = primary.flipped() if primary is not None else None
            return self._rows(parts.flipped(), flipped_primary, sp.negated())
        sp_neg = derive_spectral(self.stack, sp.n, -sp.kz)
        neg_parts, neg_primary = self._assemble(sp_neg)
        return self._rows(neg_parts, neg_primary, sp_neg)

    def panel_sum(self, panels: tuple[Panel, ...], order: int, mirror: bool) -> np.ndarray:
        """Weighted mode contributions over the given panels, shape (2 n_max + 1, 6)."""
        if not panels:
            return np.zeros((2 * self.cfg.n_max + 1, 6), dtype=complex)
        pieces = [p.nodes(order) for p in panels]
        kz = np.concatenate([k for k, _ in pieces])
        w = np.concatenate([w for _, w in pieces])
        values = self.mode_values(kz, mirror)
        return np.einsum("k,mkc->mc", w, values)

    def path_sum(self, path: PathSpec, order: int) -> np.ndarray:
        total = self.panel_sum(path.panels, order, mirror=path.symmetric)
        if not path.symmetric:
            total = total + self.panel_sum(path.negative_panels, order, mirror=False)
        return total

    def combine(self, modes: np.ndarray) -> np.ndarray:
        """Apply azimuthal phases and sum over orders: (6,)"""
        return np.einsum("m,mc->c", self.phases, modes)


def _prefactor(stack: LayerStack, src: SourceVector, source_layer: int) -> complex:
    eps_h = stack.layers[source_layer].eps.horizontal
    return 1j * src.moment / (4 * math.pi * stack.omega * eps_h)


def _mode_magnitudes(ev: _Evaluation, modes: np.ndarray, pref: complex) -> np.ndarray:
    """Per |n| magnitude of each component's contribution, shape (n_max + 1, 6)."""
    n_max = ev.cfg.n_max
    weighted = pref * ev.phases[:, None] * modes
    mags = np.zeros((n_max + 1, 6))
    mags[0] = np.abs(weighted[n_max])
    for n in range(1, n_max + 1):
        mags[n] = np.abs(weighted[n_max + n] + weighted[n_max - n])
    return mags


def _evaluate_once(
    ev: _Evaluation,
    path: PathSpec,
    path_cfg: PathConfig,
    source_layer: int,
) -> tuple[np.ndarray, FieldDiagnostics]:
    fine_order = path.points_per_panel
    coarse_order = max(2, fine_order // 2)
    pref = _prefactor(ev.stack, ev.src, source_layer)
    ev.coefficient_peak = 0.0
    ev.peak_coefficient = None

    modes = ev.path_sum(path, fine_order)
    discretization = ev.combine(modes) - ev.combine(ev.path_sum(path, coarse_order))

    tail_panels = 0
    last_tail = 0.0
    for index in range(path_cfg.max_extension_panels):
        positive, negative = path.extension(index)
        extra = ev.panel_sum((positive,), fine_order, mirror=path.symmetric)
        if negative is not None:
            extra = extra + ev.panel_sum((negative,), fine_order, mirror=False)
        modes = modes + extra
        tail_panels += 1
        added = np.linalg.norm(ev.combine(extra))
        accumulated = np.linalg.norm(ev.combine(modes))
        last_tail = float(added / accumulated) if accumulated > 0 else 0.0
        if added <= path_cfg.tail_tolerance * accumulated:
            break

    fields = pref * ev.combine(modes)
    scale = np.linalg.norm(fields)
    residual = float(abs(pref) * np.linalg.norm(discretization) / scale) if scale > 0 else 0.0
    residual += last_tail

    mags = _mode_magnitudes(ev, modes, pref)
    not_converged = []
    e_norm = np.linalg.norm(fields[:3])
    h_norm = np.linalg.norm(fields[3:])
    for c, name in enumerate(COMPONENTS):
        reference = e_norm if c < 3 else h_norm
        if ev.cfg.n_max > 0 and mags[-1, c] > ev.cfg.mode_tolerance * reference:
            not_converged.append(name)

    diagnostics = FieldDiagnostics(
        mode_magnitudes=[float(m) for m in mags.max(axis=1)],
        quadrature_residual=residual,
        not_converged=not_converged,
        path_kind=path.kind.value,
        subtraction=ev.plan.mode.value if ev.plan.active else "off",
        subtraction_flag=ev.plan.flag,
        tail_panels=tail_panels,
        coefficient_peak=ev.coefficient_peak,
        magnitude_exceeded=ev.coefficient_peak > ev.magnitude_limit,
    )
    return fields, diagnostics


def evaluate(
    stack: LayerStack,
    src: SourceVector,
    receiver: tuple[float, float, float],
    cfg: SummationConfig | None = None,
    path: PathSpec | None = None,
    *,
    path_cfg: PathConfig | None = None,
    regime_cfg: RegimeConfig | None = None,
    subtraction: SubtractionMode = SubtractionMode.AUTO,
    kind: PathKind | None = None,
    magnitude_limit: float = C.COEFFICIENT_MAGNITUDE_LIMIT,
    max_order: int = C.MAX_ORDER,
    interface_tolerance: float = C.INTERFACE_TOLERANCE,
) -> FieldResult:
    """
    E and H at `receiver` = (rho, phi, z) from the spectral representation.

    When no path is given one is built per receiver, and a singular spectral
    point triggers up to two rebuilds with a wider detour. Slow mode decay is
    reported in diagnostics, never raised.
    """
    cfg = cfg or SummationConfig()
    path_cfg = path_cfg or PathConfig(n_int=cfg.n_int, points_per_panel=cfg.points_per_panel)
    regime_cfg = regime_cfg or RegimeConfig()

    rho, phi, z = receiver
    if (
        abs(rho - src.rho) < interface_tolerance
        and abs(z - src.z) < interface_tolerance
        and abs(math.remainder(phi - src.phi, 2 * math.pi)) < interface_tolerance
    ):
        raise ValueError("receiver coincides with the source")

    plan = direct_subtraction(stack, src, receiver, subtraction)
    ev = _Evaluation(
        stack=stack,
        src=src,
        rho=rho,
        dphi=phi - src.phi,
        dz=z - src.z,
        cfg=cfg,
        regime_cfg=regime_cfg,
        plan=plan,
        magnitude_limit=magnitude_limit,
        max_order=max_order,
        interface_tolerance=interface_tolerance,
    )
    source_layer = stack.locate(src.rho)

    if path is not None:
        fields, diagnostics = _evaluate_once(ev, path, path_cfg, source_layer)
        retries = 0
    else:

        def attempt(detour_scale: float):
            built = build_path(
                stack, src.z, z, kind, path_cfg, rho_sep=abs(rho - src.rho), detour_scale=detour_scale
            )
            return _evaluate_once(ev, built, path_cfg, source_layer)

        (fields, diagnostics), retries = retry_with_wider_detour(attempt)
    diagnostics.retries = retries

    if plan.active:
        direct = plan.closed_form(stack, src, receiver)
        fields = fields + direct.as_vector()

    if diagnostics.magnitude_exceeded:
        logger.error(
            "coefficient_magnitude_exceeded",
            coefficient=ev.peak_coefficient,
            peak=diagnostics.coefficient_peak,
            limit=magnitude_limit,
            receiver=receiver,
        )
    if diagnostics.not_converged:
        logger.warning(
            "mode_sum_not_converged",
            components=diagnostics.not_converged,
            n_max=cfg.n_max,
            tail=diagnostics.mode_magnitudes[-1],
        )
    logger.debug(
        "spectral_evaluated",
        receiver=receiver,
        residual=diagnostics.quadrature_residual,
        tail_panels=diagnostics.tail_panels,
        path=diagnostics.path_kind,
    )
    return FieldResult(E=fields[:3], H=fields[3:], diagnostics=diagnostics)
