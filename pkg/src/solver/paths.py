"""
Complex k_z integration paths and their composite Gauss-Legendre rules.

SIP   real axis with a rectangular detour below the positive branch points
      (mirrored above the negative ones); tails tilt toward decay of e^{i kz dz}.
DSIP  half-ellipse from 0 to c through the fourth quadrant, then the real axis.
      Odd-symmetric, so only the positive half is sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from src.config import constants as C
from src.solver.media import LayerStack
from src.utils.logger import get_logger

logger = get_logger("paths")

_MIN_DECAY_RATE = 1e-6


class PathKind(str, Enum):
    SIP = "sip"
    DSIP = "dsip"


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


@dataclass(frozen=True)
class Panel:
    """Straight segment start -> end, or an elliptic arc kz = a - a cos t - i b sin t."""

    start: complex
    end: complex
    arc: tuple[float, float, float, float] | None = None  # (a, b, t0, t1)

    def nodes(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        x, w = gauss_legendre(order)
        if self.arc is None:
            half = (self.end - self.start) / 2
            kz = self.start + (x + 1) * half
            return kz.astype(complex), (w * half).astype(complex)
        a, b, t0, t1 = self.arc
        half = (t1 - t0) / 2
        t = t0 + (x + 1) * half
        kz = a - a * np.cos(t) - 1j * b * np.sin(t)
        jac = a * np.sin(t) - 1j * b * np.cos(t)
        return kz, w * half * jac

    @property
    def length(self) -> float:
        if self.arc is None:
            return abs(self.end - self.start)
        a, b, t0, t1 = self.arc
        # mean radius approximation is enough for panel allocation
        return 0.5 * (a + b) * abs(t1 - t0)


@dataclass(frozen=True)
class PathConfig:
    detour_height_factor: float = C.DETOUR_HEIGHT_FACTOR
    detour_re_fraction: float = C.DETOUR_RE_FRACTION
    detour_span: float = C.DETOUR_SPAN
    truncation_multiple: float = C.TRUNCATION_MULTIPLE
    dsip_minor_fraction: float = C.DSIP_MINOR_FRACTION
    switch_distance_factor: float = C.SWITCH_DISTANCE_FACTOR
    tail_angle: float = C.TAIL_ANGLE
    tail_decay: float = C.TAIL_DECAY
    tail_tolerance: float = C.TAIL_TOLERANCE
    max_extension_panels: int = C.MAX_EXTENSION_PANELS
    n_int: int = C.DEFAULT_N_INT
    points_per_panel: int = C.POINTS_PER_PANEL

    def __post_init__(self):
        if not 0 <= self.tail_angle < math.pi / 4:
            raise ValueError("tail_angle must lie in [0, pi/4) to stay clear of branch cuts")
        if self.points_per_panel < 2:
            raise ValueError("points_per_panel must be at least 2")
        if self.n_int < 2 * self.points_per_panel:
            raise ValueError("n_int must cover at least one panel per path half")

    @classmethod
    def from_settings(cls, settings) -> PathConfig:
        return cls(
            detour_height_factor=settings.detour_height_factor,
            detour_re_fraction=settings.detour_re_fraction,
            detour_span=settings.detour_span,
            truncation_multiple=settings.truncation_multiple,
            dsip_minor_fraction=settings.dsip_minor_fraction,
            switch_distance_factor=settings.switch_distance_factor,
            tail_angle=settings.tail_angle,
            tail_decay=settings.tail_decay,
            tail_tolerance=settings.tail_tolerance,
            max_extension_panels=settings.max_extension_panels,
            n_int=settings.n_int,
            points_per_panel=settings.points_per_panel,
        )


@dataclass(frozen=True)
class PathSpec:
    """
    A k_z contour split into panels.

    `panels` cover the positive half, oriented from 0 outward. For a symmetric
    path the negative half is its mirror and is folded; otherwise
    `negative_panels` cover it explicitly, oriented from -infinity toward 0.
    """

    kind: PathKind
    panels: tuple[Panel, ...]
    negative_panels: tuple[Panel, ...] = field(default_factory=tuple)
    symmetric: bool = True
    detour_height: float = 0.0
    span: float = 0.0
    truncation: float = 0.0
    tail_direction: complex = 1.0
    negative_tail_direction: complex = -1.0
    tail_width: float = 1.0
    points_per_panel: int = C.POINTS_PER_PANEL

    @property
    def segments(self) -> list[tuple[complex, complex]]:
        return [(p.start, p.end) for p in self.negative_panels + self.panels]

    @property
    def n_points(self) -> int:
        halves = 2 if self.symmetric else 1
        return halves * len(self.panels + self.negative_panels) * self.points_per_panel

    def nodes(
        self, order: int | None = None, negative: bool = False
    ) -> tuple[np.ndarray, np.ndarray]:
        order = order or self.points_per_panel
        panels = self.negative_panels if negative else self.panels
        if not panels:
            return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
        pieces = [p.nodes(order) for p in panels]
        return np.concatenate([k for k, _ in pieces]), np.concatenate([w for _, w in pieces])

    def extension(self, index: int) -> tuple[Panel, Panel | None]:
        """The index-th tail panel beyond the current truncation (positive, negative)."""
        positive_end = self.panels[-1].end
        start = positive_end + index * self.tail_width * self.tail_direction
        positive = Panel(start, start + self.tail_width * self.tail_direction)
        if self.symmetric:
            return positive, None
        negative_far = self.negative_panels[0].start
        end = negative_far + index * self.tail_width * self.negative_tail_direction
        negative = Panel(end + self.tail_width * self.negative_tail_direction, end)
        return positive, negative


def _split_line(start: complex, end: complex, count: int) -> list[Panel]:
    count = max(1, count)
    edges = [start + (end - start) * i / count for i in range(count + 1)]
    return [Panel(edges[i], edges[i + 1]) for i in range(count)]


def _split_arc(a: float, b: float, count: int) -> list[Panel]:
    count = max(1, count)
    ts = np.linspace(0.0, math.pi, count + 1)
    panels = []
    for t0, t1 in zip(ts[:-1], ts[1:], strict=True):
        start = a - a * math.cos(t0) - 1j * b * math.sin(t0)
        end = a - a * math.cos(t1) - 1j * b * math.sin(t1)
        panels.append(Panel(complex(start), complex(end), arc=(a, b, float(t0), float(t1))))
    return panels


def _allocate(lengths: list[float], total: int) -> list[int]:
    """Distribute `total` panels over segments proportionally to length, at least one each."""
    weight = sum(lengths) or 1.0
    counts = [max(1, round(total * length / weight)) for length in lengths]
    return counts


def detour_height(stack: LayerStack, cfg: PathConfig) -> float:
    k = stack.wavenumbers()
    return cfg.detour_height_factor * float(np.min(np.abs(k.imag + cfg.detour_re_fraction * k.real)))


def select_kind(stack: LayerStack, dz: float, cfg: PathConfig) -> PathKind:
    switch = cfg.switch_distance_factor / stack.max_abs_k()
    return PathKind.DSIP if abs(dz) < switch else PathKind.SIP


def build_path(
    stack: LayerStack,
    src_z: float,
    rec_z: float,
    kind: PathKind | None = None,
    cfg: PathConfig | None = None,
    rho_sep: float = 0.0,
    detour_scale: float = 1.0,
) -> PathSpec:
    """
    Build the k_z contour for one source/receiver pair.

    kind=None selects DSIP when |z - z'| is below the switch distance and SIP
    otherwise. rho_sep = |rho - rho'| sets how far the tail must reach.
    """
    cfg = cfg or PathConfig()
    dz = rec_z - src_z
    if kind is None:
        kind = select_kind(stack, dz, cfg)

    k = stack.wavenumbers()
    kmax = float(np.max(np.abs(k)))
    span = cfg.detour_span * kmax

    theta = cfg.tail_angle if (kind is PathKind.SIP and dz != 0) else 0.0
    decay_rate = max(abs(rho_sep) * math.cos(theta) + abs(dz) * math.sin(theta), _MIN_DECAY_RATE)
    reach = min(span + cfg.tail_decay / decay_rate, span + 1e3 * kmax)
    truncation = max(cfg.truncation_multiple * kmax, reach)

    panels_per_half = max(2, round(cfg.n_int / (2 * cfg.points_per_panel)))
    near_count = max(1, panels_per_half // 2)
    tail_count = max(1, panels_per_half - near_count)
    tail_len = max(truncation - span, span)
    tail_width = tail_len / tail_count

    sign = 1.0 if dz >= 0 else -1.0
    tail_dir = complex(np.exp(1j * sign * theta))
    neg_tail_dir = complex(-np.exp(-1j * sign * theta))

    if kind is PathKind.DSIP:
        a = span / 2
        b = cfg.dsip_minor_fraction * float(np.max(np.abs(k.real)))
        b *= detour_scale
        near = _split_arc(a, b, near_count)
        tail = _split_line(complex(span), complex(span) + tail_len * tail_dir, tail_count)
        path = PathSpec(
            kind=kind,
            panels=tuple(near + tail),
            symmetric=True,
            detour_height=b,
            span=span,
            truncation=truncation,
            tail_direction=tail_dir,
            negative_tail_direction=-tail_dir,
            tail_width=tail_width,
            points_per_panel=cfg.points_per_panel,
        )
    else:
        h = min(detour_height(stack, cfg) * detour_scale, 0.5 * span)
        corners = [0j, -1j * h, span - 1j * h, complex(span)]
        lengths = [abs(corners[i + 1] - corners[i]) for i in range(3)]
        counts = _allocate(lengths, near_count)
        near: list[Panel] = []
        for i, count in enumerate(counts):
            near += _split_line(corners[i], corners[i + 1], count)
        tail = _split_line(complex(span), complex(span) + tail_len * tail_dir, tail_count)

        mirror_corners = [-c for c in corners]
        neg_near: list[Panel] = []
        for i in reversed(range(len(counts))):
            neg_near += _split_line(mirror_corners[i + 1], mirror_corners[i], counts[i])
        far = complex(-span) + tail_len * neg_tail_dir
        neg_tail = _split_line(far, complex(-span), tail_count)
        path = PathSpec(
            kind=kind,
            panels=tuple(near + tail),
            negative_panels=tuple(neg_tail + neg_near),
            symmetric=False,
            detour_height=h,
            span=span,
            truncation=truncation,
            tail_direction=tail_dir,
            negative_tail_direction=neg_tail_dir,
            tail_width=tail_width,
            points_per_panel=cfg.points_per_panel,
        )

    logger.debug(
        "path_built",
        kind=kind.value,
        panels=len(path.panels) + len(path.negative_panels),
        span=span,
        truncation=truncation,
        detour_height=path.detour_height,
    )
    return path
