"""
Pydantic models for scenario files.

A scenario is a JSON document with a `schema_version`. Every dimensional
value is a string carrying its unit ("0.05 m", "16in", "36 kHz", "5 ohm.m"),
kept verbatim so a scenario round-trips through serialization unchanged.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.config.constants import INCH, SCHEMA_VERSION
from src.solver.integrand import SourceVector
from src.solver.media import Layer, LayerStack, UniaxialTensor
from src.solver.results import COMPONENTS

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*(.*?)\s*$")

LENGTH_UNITS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "in": INCH, '"': INCH, "ft": 0.3048}
FREQUENCY_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
CONDUCTIVITY_UNITS = {"s/m": 1.0, "ms/m": 1e-3}
RESISTIVITY_UNITS = {"ohm.m": 1.0, "ohm*m": 1.0, "ohm-m": 1.0, "ohmm": 1.0, "Ω.m": 1.0, "Ωm": 1.0}
MOMENT_UNITS = {"a.m": 1.0, "a*m": 1.0, "am": 1.0}

MAGNITUDE_CHOICES = ("E", "H", *COMPONENTS)


class ScenarioError(ValueError):
    """Scenario file could not be read or validated; `details` locate each problem."""

    def __init__(self, message: str, details: list[str] | None = None):
        super().__init__(message)
        self.details = details or []


def parse_quantity(text: str, units: dict[str, float], kind: str) -> float:
    """Parse '<number> <unit>' into SI. The unit is mandatory."""
    match = _QUANTITY.match(str(text))
    if not match:
        raise ValueError(f"cannot parse {kind} '{text}'")
    number, unit = match.groups()
    key = unit.replace(" ", "").replace("·", ".").lower()
    table = {k.lower(): v for k, v in units.items()}
    if not key:
        raise ValueError(f"{kind} '{text}' needs a unit, one of {sorted(units)}")
    if key not in table:
        raise ValueError(f"unknown {kind} unit '{unit}' in '{text}', expected {sorted(units)}")
    return float(number) * table[key]


def parse_length(text: str) -> float:
    return parse_quantity(text, LENGTH_UNITS, "length")


def parse_frequency(text: str) -> float:
    return parse_quantity(text, FREQUENCY_UNITS, "frequency")


class Position(BaseModel):
    rho: str = Field(..., description="Radial position with unit")
    phi_deg: float = Field(default=0.0, description="Azimuth in degrees")
    z: str = Field(..., description="Axial position with unit")

    @field_validator("rho", "z")
    @classmethod
    def validate_length(cls, v: str) -> str:
        parse_length(v)
        return v

    def to_tuple(self) -> tuple[float, float, float]:
        return parse_length(self.rho), math.radians(self.phi_deg), parse_length(self.z)


class MaterialSpec(BaseModel):
    """Material properties along one tensor axis."""

    conductivity: str | None = Field(default=None, description="e.g. '16 S/m'")
    resistivity: str | None = Field(default=None, description="e.g. '5 ohm.m'")
    eps_r: float = Field(default=1.0, gt=0, description="Relative permittivity")
    mu_r: float = Field(default=1.0, gt=0, description="Relative permeability")

    @field_validator("conductivity")
    @classmethod
    def validate_conductivity(cls, v: str | None) -> str | None:
        if v is not None and parse_quantity(v, CONDUCTIVITY_UNITS, "conductivity") < 0:
            raise ValueError("conductivity must be non-negative")
        return v

    @field_validator("resistivity")
    @classmethod
    def validate_resistivity(cls, v: str | None) -> str | None:
        if v is not None and not parse_quantity(v, RESISTIVITY_UNITS, "resistivity") > 0:
            raise ValueError("resistivity must be positive")
        return v

    @model_validator(mode="after")
    def exactly_one_loss_entry(self) -> MaterialSpec:
        if (self.conductivity is None) == (self.resistivity is None):
            raise ValueError("give exactly one of conductivity or resistivity")
        return self

    @property
    def sigma(self) -> float:
        if self.conductivity is not None:
            return parse_quantity(self.conductivity, CONDUCTIVITY_UNITS, "conductivity")
        return 1.0 / parse_quantity(self.resistivity, RESISTIVITY_UNITS, "resistivity")


class LayerSpec(BaseModel):
    name: str = Field(default="", description="Label such as 'mandrel' or 'formation'")
    outer_radius: str | None = Field(
        default=None, description="Outer radius with unit; omitted or 'inf m' for the last layer"
    )
    horizontal: MaterialSpec
    vertical: MaterialSpec | None = Field(default=None, description="Defaults to horizontal")

    @field_validator("outer_radius")
    @classmethod
    def validate_radius(cls, v: str | None) -> str | None:
        if v is not None:
            parse_length(v)
        return v

    @property
    def radius(self) -> float:
        return math.inf if self.outer_radius is None else parse_length(self.outer_radius)

    def to_layer(self, omega: float) -> Layer:
        h = self.horizontal
        v = self.vertical or self.horizontal
        eps = UniaxialTensor.from_material(h.eps_r, v.eps_r, h.sigma, v.sigma, omega)
        mu = UniaxialTensor.permeability(h.mu_r, v.mu_r)
        return Layer(outer_radius=self.radius, eps=eps, mu=mu)


class SourceSpec(BaseModel):
    type: Literal["electric_dipole"] = "electric_dipole"
    moment: str = Field(default="1 A.m", description="Dipole moment Il")
    orientation: tuple[float, float, float] | Literal["rho", "phi", "z"] = Field(
        default="z", description="Direction in the source's (rho, phi, z) basis"
    )
    position: Position

    @field_validator("moment")
    @classmethod
    def validate_moment(cls, v: str) -> str:
        parse_quantity(v, MOMENT_UNITS, "moment")
        return v

    def direction(self) -> tuple[float, float, float]:
        named = {"rho": (1.0, 0.0, 0.0), "phi": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
        if isinstance(self.orientation, str):
            return named[self.orientation]
        return self.orientation


class PointReceiver(BaseModel):
    kind: Literal["point"] = "point"
    position: Position

    def points(self, source: tuple[float, float, float]) -> list[tuple[float, float, float]]:
        return [self.position.to_tuple()]


class LineReceiver(BaseModel):
    kind: Literal["line"] = "line"
    start: Position
    end: Position
    count: int = Field(..., ge=1)

    def points(self, source: tuple[float, float, float]) -> list[tuple[float, float, float]]:
        a = np.array(self.start.to_tuple())
        b = np.array(self.end.to_tuple())
        if self.count == 1:
            return [tuple(float(x) for x in a)]
        return [tuple(float(x) for x in a + (b - a) * t) for t in np.linspace(0, 1, self.count)]


class AxisRange(BaseModel):
    start: str
    stop: str
    count: int = Field(..., ge=1)

    @field_validator("start", "stop")
    @classmethod
    def validate_bound(cls, v: str) -> str:
        parse_length(v)
        return v

    def values(self) -> np.ndarray:
        return np.linspace(parse_length(self.start), parse_length(self.stop), self.count)


class GridReceiver(BaseModel):
    """rho-z grid, rho outer loop; offsets from the source when relative_to_source."""

    kind: Literal["grid"] = "grid"
    rho: AxisRange
    z: AxisRange
    phi_deg: float = 0.0
    relative_to_source: bool = False

    def points(self, source: tuple[float, float, float]) -> list[tuple[float, float, float]]:
        rho0, phi0, z0 = source if self.relative_to_source else (0.0, 0.0, 0.0)
        phi = phi0 + math.radians(self.phi_deg)
        return [
            (float(rho0 + r), phi, float(z0 + z))
            for r in self.rho.values()
            for z in self.z.values()
        ]


ReceiverSpec = Annotated[PointReceiver | LineReceiver | GridReceiver, Field(discriminator="kind")]


class ThresholdSpec(BaseModel):
    small_argument_coeff: float | None = Field(default=None, gt=0)
    large_imag_threshold: float | None = Field(default=None, gt=0)
    large_abs_offset: float | None = Field(default=None, ge=0)
    moderate_threshold: float | None = Field(default=None, gt=1)


class SolverSpec(BaseModel):
    """Per-scenario overrides; unset fields fall back to Settings."""

    n_max: int | None = Field(default=None, ge=0)
    n_int: int | None = Field(default=None, ge=2)
    points_per_panel: int | None = Field(default=None, ge=2)
    path: Literal["auto", "sip", "dsip"] = "auto"
    direct_subtraction: Literal["auto", "on", "off", "isotropic"] = "auto"
    fold: bool | None = None
    fold_kz: bool | None = None
    thresholds: ThresholdSpec = Field(default_factory=ThresholdSpec)

    def merged(self, settings) -> Any:
        """Settings copy with these overrides applied."""
        updates = {
            key: value
            for key, value in {
                "n_max": self.n_max,
                "n_int": self.n_int,
                "points_per_panel": self.points_per_panel,
                "fold": self.fold,
                "fold_kz": self.fold_kz,
                **self.thresholds.model_dump(),
            }.items()
            if value is not None
        }
        return settings.model_copy(update=updates)


class OutputSpec(BaseModel):
    format: Literal["csv", "json"] = "csv"
    convention: Literal["minus", "plus"] = Field(
        default="minus", description="minus: e^{-i omega t}; plus: conjugated e^{+i omega t}"
    )
    magnitude_component: str = Field(default="H", description="|X| column")
    phase_component: str = Field(default="H_phi", description="angle column in degrees")
    reference: Literal["none", "analytic"] = "none"
    reference_component: str = Field(default="E_z", description="Component for the dB error")

    @field_validator("magnitude_component")
    @classmethod
    def validate_magnitude(cls, v: str) -> str:
        if v not in MAGNITUDE_CHOICES:
            raise ValueError(f"magnitude_component must be one of {MAGNITUDE_CHOICES}")
        return v

    @field_validator("phase_component", "reference_component")
    @classmethod
    def validate_component(cls, v: str) -> str:
        if v not in COMPONENTS:
            raise ValueError(f"component must be one of {COMPONENTS}")
        return v


class Scenario(BaseModel):
    """Complete scenario document."""

    schema_version: Literal[1] = Field(..., description="Scenario schema version")
    name: str = ""
    description: str = ""
    frequency: str = Field(..., description="e.g. '36 kHz'")
    layers: list[LayerSpec] = Field(..., min_length=1, description="Ordered from the axis outward")
    source: SourceSpec
    receivers: list[ReceiverSpec] = Field(default_factory=list)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    expected: dict[str, Any] | None = Field(default=None, description="Reference values")

    @field_validator("frequency")
    @classmethod
    def validate_frequency(cls, v: str) -> str:
        if not parse_frequency(v) > 0:
            raise ValueError("frequency must be positive")
        return v

    @model_validator(mode="after")
    def validate_radii(self) -> Scenario:
        for index, layer in enumerate(self.layers[:-1]):
            if layer.outer_radius is None or math.isinf(layer.radius):
                raise ValueError(f"layer {index} needs a finite outer_radius")
        if not math.isinf(self.layers[-1].radius):
            raise ValueError("the last layer must extend to infinity (omit outer_radius)")
        radii = [layer.radius for layer in self.layers[:-1]]
        if any(b <= a for a, b in zip(radii, radii[1:], strict=False)) or (radii and radii[0] <= 0):
            raise ValueError("layer radii must be positive and strictly increasing")
        return self

    @property
    def frequency_hz(self) -> float:
        return parse_frequency(self.frequency)

    def to_stack(self) -> LayerStack:
        omega = 2 * math.pi * self.frequency_hz
        return LayerStack(
            layers=tuple(layer.to_layer(omega) for layer in self.layers),
            frequency=self.frequency_hz,
        )

    def to_source(self) -> SourceVector:
        return SourceVector.from_direction(
            moment=parse_quantity(self.source.moment, MOMENT_UNITS, "moment"),
            direction=self.source.direction(),
            position=self.source.position.to_tuple(),
        )

    def receiver_points(self) -> list[tuple[float, float, float]]:
        origin = self.source.position.to_tuple()
        points: list[tuple[float, float, float]] = []
        for receiver in self.receivers:
            points.extend(receiver.points(origin))
        return points

    def dump(self) -> str:
        return self.model_dump_json(indent=2)


def _format_validation(error: ValidationError) -> list[str]:
    details = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        details.append(f"{location}: {item['msg']}")
    return details


def load_scenario(path: Path | str) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        ScenarioError: with line/column for malformed JSON or field paths for
            schema violations
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"{path}: invalid JSON", [f"line {e.lineno}, column {e.colno}: {e.msg}"]
        ) from e
    if isinstance(data, dict) and data.get("schema_version") not in (None, SCHEMA_VERSION):
        raise ScenarioError(
            f"{path}: unsupported schema_version {data.get('schema_version')}",
            [f"schema_version: expected {SCHEMA_VERSION}"],
        )
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"{path}: invalid scenario", _format_validation(e)) from e
