"""
Layer stack geometry, uniaxial materials and per-layer spectral quantities.

Time convention is e^{-i omega t}: passive media have Im(eps), Im(mu) >= 0 and
every radial wavenumber is taken on the Im >= 0 branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from src.config.constants import (
    EPS0,
    INTERFACE_TOLERANCE,
    LARGE_ABS_OFFSET,
    LARGE_IMAG_THRESHOLD,
    MODERATE_THRESHOLD,
    MU0,
    SMALL_ARGUMENT_COEFF,
)
from src.solver.errors import InvalidStack, ZeroArgument


def decaying_sqrt(w) -> np.ndarray:
    """Principal square root, negated where needed so that Im >= 0."""
    root = np.sqrt(np.asarray(w, dtype=complex))
    return np.where(root.imag < 0, -root, root)


@dataclass(frozen=True)
class UniaxialTensor:
    """Diagonal tensor diag(h, h, v) for permittivity (F/m) or permeability (H/m)."""

    horizontal: complex
    vertical: complex

    def __post_init__(self):
        for name in ("horizontal", "vertical"):
            value = complex(getattr(self, name))
            if value == 0:
                raise InvalidStack(f"{name} tensor component must be nonzero")
            if value.imag < 0:
                raise InvalidStack(f"{name} tensor component {value} is not passive")
            object.__setattr__(self, name, value)

    @classmethod
    def from_material(
        cls,
        eps_r_h: float,
        eps_r_v: float,
        sigma_h: float,
        sigma_v: float,
        omega: float,
    ) -> UniaxialTensor:
        """Complex permittivity eps = eps_r * eps0 + i sigma / omega."""
        return cls(
            horizontal=eps_r_h * EPS0 + 1j * sigma_h / omega,
            vertical=eps_r_v * EPS0 + 1j * sigma_v / omega,
        )

    @classmethod
    def permeability(cls, mu_r_h: float = 1.0, mu_r_v: float | None = None) -> UniaxialTensor:
        return cls(horizontal=mu_r_h * MU0, vertical=(mu_r_h if mu_r_v is None else mu_r_v) * MU0)

    @classmethod
    def isotropic(cls, value: complex) -> UniaxialTensor:
        return cls(horizontal=value, vertical=value)

    @property
    def kappa(self) -> complex:
        """Anisotropy ratio sqrt(h / v), principal branch."""
        return complex(np.sqrt(self.horizontal / self.vertical))

    @property
    def is_isotropic(self) -> bool:
        return abs(self.horizontal - self.vertical) <= 1e-14 * abs(self.horizontal)


@dataclass(frozen=True)
class Layer:
    outer_radius: float
    eps: UniaxialTensor
    mu: UniaxialTensor


@dataclass(frozen=True)
class LayerStack:
    """
    Concentric layers ordered from the axis outward.

    Layer 0 contains the axis, the last layer extends to infinity. Interface k
    sits at layers[k].outer_radius, between layers k and k+1.
    """

    layers: tuple[Layer, ...]
    frequency: float

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise InvalidStack("stack needs at least one layer")
        if not self.frequency > 0:
            raise InvalidStack(f"frequency must be positive, got {self.frequency}")
        if not math.isinf(layers[-1].outer_radius):
            raise InvalidStack("outermost layer must extend to infinity")
        previous = 0.0
        for index, layer in enumerate(layers[:-1]):
            if not (layer.outer_radius > previous and math.isfinite(layer.outer_radius)):
                raise InvalidStack(
                    f"layer {index} radius {layer.outer_radius} must be finite and exceed {previous}"
                )
            previous = layer.outer_radius

    @classmethod
    def homogeneous(cls, eps: UniaxialTensor, mu: UniaxialTensor, frequency: float) -> LayerStack:
        return cls(layers=(Layer(math.inf, eps, mu),), frequency=frequency)

    @property
    def omega(self) -> float:
        return 2 * math.pi * self.frequency

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def interfaces(self) -> tuple[float, ...]:
        return tuple(layer.outer_radius for layer in self.layers[:-1])

    def locate(self, rho: float) -> int:
        """Index of the layer containing radius rho."""
        for index, radius in enumerate(self.interfaces):
            if rho < radius:
                return index
        return self.n_layers - 1

    def near_interface(self, rho: float, tolerance: float = INTERFACE_TOLERANCE) -> bool:
        return any(abs(rho - radius) <= tolerance for radius in self.interfaces)

    def wavenumbers(self) -> np.ndarray:
        """k_i = omega sqrt(mu_h eps_h) per layer, Im >= 0."""
        products = np.array([layer.mu.horizontal * layer.eps.horizontal for layer in self.layers])
        return self.omega * decaying_sqrt(products)

    def max_abs_k(self) -> float:
        return float(np.max(np.abs(self.wavenumbers())))


@dataclass(frozen=True)
class SpectralPoint:
    """
    Per-layer spectral quantities at azimuthal order n over an array of k_z nodes.

    Arrays indexed [layer, node] for wavenumbers that depend on k_z and [layer]
    for the material quantities that do not.
    """

    n: int
    kz: np.ndarray
    omega: float
    k: np.ndarray
    krho: np.ndarray
    krho_eps: np.ndarray
    krho_mu: np.ndarray
    kappa_eps: np.ndarray
    kappa_mu: np.ndarray
    eps_h: np.ndarray
    mu_h: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.kz.shape[0]

    def with_order(self, n: int) -> SpectralPoint:
        """Same nodes at another order; the wavenumbers do not depend on n."""
        return SpectralPoint(
            n=n,
            kz=self.kz,
            omega=self.omega,
            k=self.k,
            krho=self.krho,
            krho_eps=self.krho_eps,
            krho_mu=self.krho_mu,
            kappa_eps=self.kappa_eps,
            kappa_mu=self.kappa_mu,
            eps_h=self.eps_h,
            mu_h=self.mu_h,
        )

    def negated(self) -> SpectralPoint:
        """Nodes mirrored to -k_z; radial wavenumbers depend on k_z^2 only."""
        return SpectralPoint(
            n=self.n,
            kz=-self.kz,
            omega=self.omega,
            k=self.k,
            krho=self.krho,
            krho_eps=self.krho_eps,
            krho_mu=self.krho_mu,
            kappa_eps=self.kappa_eps,
            kappa_mu=self.kappa_mu,
            eps_h=self.eps_h,
            mu_h=self.mu_h,
        )


def derive_spectral(stack: LayerStack, n: int, kz) -> SpectralPoint:
    """Populate the per-layer wavenumbers for every k_z node."""
    kz = np.atleast_1d(np.asarray(kz, dtype=complex))
    omega = stack.omega
    eps_h = np.array([layer.eps.horizontal for layer in stack.layers], dtype=complex)
    mu_h = np.array([layer.mu.horizontal for layer in stack.layers], dtype=complex)
    kappa_eps = np.array([layer.eps.kappa for layer in stack.layers], dtype=complex)
    kappa_mu = np.array([layer.mu.kappa for layer in stack.layers], dtype=complex)

    k = stack.wavenumbers()
    krho = decaying_sqrt(omega**2 * (mu_h * eps_h)[:, None] - kz[None, :] ** 2)
    krho_eps = decaying_sqrt_ratio(krho, kappa_eps)
    krho_mu = decaying_sqrt_ratio(krho, kappa_mu)

    return SpectralPoint(
        n=n,
        kz=kz,
        omega=omega,
        k=k,
        krho=krho,
        krho_eps=krho_eps,
        krho_mu=krho_mu,
        kappa_eps=kappa_eps,
        kappa_mu=kappa_mu,
        eps_h=eps_h,
        mu_h=mu_h,
    )


def decaying_sqrt_ratio(krho: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    """krho / kappa per layer, sign-flipped to Im >= 0."""
    scaled = krho / kappa[:, None]
    return np.where(scaled.imag < 0, -scaled, scaled)


class Regime(IntEnum):
    SMALL = 0
    MODERATE = 1
    LARGE = 2


@dataclass(frozen=True)
class RegimeConfig:
    small_argument_coeff: float = SMALL_ARGUMENT_COEFF
    large_imag_threshold: float = LARGE_IMAG_THRESHOLD
    large_abs_offset: float = LARGE_ABS_OFFSET
    moderate_threshold: float = MODERATE_THRESHOLD

    @classmethod
    def from_settings(cls, settings) -> RegimeConfig:
        return cls(
            small_argument_coeff=settings.small_argument_coeff,
            large_imag_threshold=settings.large_imag_threshold,
            large_abs_offset=settings.large_abs_offset,
            moderate_threshold=settings.moderate_threshold,
        )


def classify_regime(n: int, z, thresholds: RegimeConfig | None = None) -> np.ndarray:
    """
    Partition (n, z) into Small / Moderate / Large conditioning regimes.

    Large wins when |z| clears 2(|n|+1) + offset, or when |Im z| clears its
    threshold while |z| > |n| + 1 (the exponential factor then dominates the
    Bessel magnitude). Small applies when |z| < coeff * sqrt(|n|+1).
    Returns an integer array of Regime values with the shape of z.
    """
    cfg = thresholds or RegimeConfig()
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroArgument("regime is undefined at z = 0")
    order = abs(n)
    mag = np.abs(z)
    large = (mag > 2 * (order + 1) + cfg.large_abs_offset) | (
        (np.abs(z.imag) > cfg.large_imag_threshold) & (mag > order + 1)
    )
    small = ~large & (mag < cfg.small_argument_coeff * math.sqrt(order + 1))
    regime = np.full(z.shape, Regime.MODERATE, dtype=int)
    regime[large] = Regime.LARGE
    regime[small] = Regime.SMALL
    return regime
