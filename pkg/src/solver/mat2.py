"""
Batched 2x2 complex matrix helpers.

A Mat2 is an ndarray of shape (..., 2, 2); diagonal matrices are carried as their
diagonal, shape (..., 2), and applied with dmul / muld / sandwich so they never
need to be expanded.
"""

import numpy as np

from src.config.constants import SINGULAR_DET_RATIO
from src.solver.errors import SingularInterfaceMatrix

# Entry signs of P X P with P = diag(1, -1)
_PARITY = np.array([[1.0, -1.0], [-1.0, 1.0]])


def eye2(batch: int) -> np.ndarray:
    out = np.zeros((batch, 2, 2), dtype=complex)
    out[:, 0, 0] = 1.0
    out[:, 1, 1] = 1.0
    return out


def zeros2(batch: int) -> np.ndarray:
    return np.zeros((batch, 2, 2), dtype=complex)


def diag2(a, b) -> np.ndarray:
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    out = np.zeros(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 1, 1] = b
    return out


def pair(a, b) -> np.ndarray:
    """Stack two arrays into a (..., 2) diagonal / vector."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    return np.stack([a, b], axis=-1)


def from_entries(a11, a12, a21, a22) -> np.ndarray:
    a11, a12, a21, a22 = np.broadcast_arrays(
        *(np.asarray(x, dtype=complex) for x in (a11, a12, a21, a22))
    )
    return np.stack([np.stack([a11, a12], axis=-1), np.stack([a21, a22], axis=-1)], axis=-2)


def det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def frobenius_sq(m: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(m) ** 2, axis=(-2, -1))


def inv2(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    """
    Adjugate inverse.

    Raises:
        SingularInterfaceMatrix: if |det m| < ratio * ||m||_F^2 for any batch entry
    """
    det = det2(m)
    scale = frobenius_sq(m)
    singular = ~(np.abs(det) >= SINGULAR_DET_RATIO * scale) | (scale == 0)
    if np.any(singular):
        raise SingularInterfaceMatrix(
            f"{what} singular at {int(np.count_nonzero(singular))} spectral node(s)"
        )
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out / det[..., None, None]


def cond2(m: np.ndarray) -> np.ndarray:
    """Condition estimate ||m||_F^2 / |det m|, equal to c + 1/c for the 2-norm condition c."""
    with np.errstate(divide="ignore"):
        return frobenius_sq(m) / np.abs(det2(m))


def dmul(d: np.ndarray, m: np.ndarray) -> np.ndarray:
    """diag(d) @ m"""
    return d[..., :, None] * m


def muld(m: np.ndarray, d: np.ndarray) -> np.ndarray:
    """m @ diag(d)"""
    return m * d[..., None, :]


def sandwich(left: np.ndarray, m: np.ndarray, right: np.ndarray) -> np.ndarray:
    """diag(left) @ m @ diag(right)"""
    return left[..., :, None] * m * right[..., None, :]


def mv(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", m, v)


def parity(m: np.ndarray) -> np.ndarray:
    """P m P with P = diag(1, -1): off-diagonal entries change sign."""
    return m * _PARITY


def max_entry(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def offdiag_ratio(m: np.ndarray) -> float:
    """Largest off-diagonal magnitude relative to the Frobenius norm, over the batch."""
    norm = np.sqrt(frobenius_sq(m))
    off = np.maximum(np.abs(m[..., 0, 1]), np.abs(m[..., 1, 0]))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(norm > 0, off / norm, 0.0)
    return float(np.max(ratio)) if ratio.size else 0.0
