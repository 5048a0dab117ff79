"""
Field result containers shared by the spectral engine and the closed form.
"""

from dataclasses import dataclass, field

import numpy as np

COMPONENTS = ("E_rho", "E_phi", "E_z", "H_rho", "H_phi", "H_z")


@dataclass
class FieldDiagnostics:
    """Convergence record of one spectral evaluation."""

    mode_magnitudes: list[float] = field(default_factory=list)
    quadrature_residual: float = 0.0
    not_converged: list[str] = field(default_factory=list)
    path_kind: str = ""
    subtraction: str = "off"
    subtraction_flag: str | None = None
    tail_panels: int = 0
    retries: int = 0
    coefficient_peak: float = 0.0
    magnitude_exceeded: bool = False

    @property
    def converged(self) -> bool:
        return not self.not_converged

    def to_dict(self) -> dict:
        return {
            "mode_magnitudes": list(self.mode_magnitudes),
            "quadrature_residual": self.quadrature_residual,
            "not_converged": list(self.not_converged),
            "path_kind": self.path_kind,
            "subtraction": self.subtraction,
            "subtraction_flag": self.subtraction_flag,
            "tail_panels": self.tail_panels,
            "retries": self.retries,
            "coefficient_peak": self.coefficient_peak,
            "magnitude_exceeded": self.magnitude_exceeded,
        }


@dataclass
class FieldResult:
    """E (V/m) and H (A/m) in the receiver's cylindrical basis (rho, phi, z)."""

    E: np.ndarray
    H: np.ndarray
    diagnostics: FieldDiagnostics | None = None

    def component(self, name: str) -> complex:
        index = COMPONENTS.index(name)
        return complex(self.E[index] if index < 3 else self.H[index - 3])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.E, self.H])

    def conjugated(self) -> "FieldResult":
        """Same fields in the e^{+i omega t} convention."""
        return FieldResult(E=np.conj(self.E), H=np.conj(self.H), diagnostics=self.diagnostics)

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.E)) and np.all(np.isfinite(self.H)))
