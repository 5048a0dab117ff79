"""
Complex-argument integer-order Bessel J_n and Hankel H(1)_n kernel.

Three views of the same functions, all with derivatives:
    eval_raw         J, J', H, H'
    eval_scaled      J e^{-|Im z|}, H e^{Im z}
    eval_normalized  J / g, H * g with g = (z/2)^n / n!
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, hankel1, hankel1e, jv, jve

from src.config.constants import MAX_ORDER, NORMALIZED_FLOOR, RAW_EXPONENT_LIMIT
from src.solver.errors import OrderOverflow, WouldOverflow, ZeroArgument

_SERIES_MAX_TERMS = 800


@dataclass(frozen=True)
class CylFunEval:
    """Exponentially scaled J/H values at one order over an array of arguments."""

    order: int
    argument: np.ndarray
    j_scaled: np.ndarray
    jp_scaled: np.ndarray
    h_scaled: np.ndarray
    hp_scaled: np.ndarray


@dataclass(frozen=True)
class NormalizedCylEval:
    """Power-normalized values: j = J/g, h = H*g, log_g = log((z/2)^n / n!)."""

    order: int
    argument: np.ndarray
    log_g: np.ndarray
    j: np.ndarray
    jp: np.ndarray
    h: np.ndarray
    hp: np.ndarray


class RawCylEval(NamedTuple):
    j: np.ndarray
    jp: np.ndarray
    h: np.ndarray
    hp: np.ndarray


def _validate(n: int, z, max_order: int) -> np.ndarray:
    if n < 0 or n > max_order:
        raise OrderOverflow(f"order {n} outside [0, {max_order}]")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroArgument("cylinder functions are singular at z = 0")
    return z


def log_power_factor(n: int, z) -> np.ndarray:
    """log((z/2)^n / n!) on the principal branch."""
    z = np.asarray(z, dtype=complex)
    if n == 0:
        return np.zeros_like(z)
    return n * np.log(z / 2) - gammaln(n + 1)


def eval_scaled(n: int, z, max_order: int = MAX_ORDER) -> CylFunEval:
    """
    Evaluate J_n, J'_n, H_n, H'_n scaled by e^{-|Im z|} (J family) and e^{Im z} (H family).

    Derivatives follow B'_n = B_{n-1} - (n/z) B_n, with B'_0 = -B_1.

    Raises:
        ZeroArgument: if any z is 0
        OrderOverflow: if n is negative or above max_order
        WouldOverflow: if the scaled Hankel value itself leaves double range
            (tiny |z| at high order); use eval_normalized there
    """
    z = _validate(n, z, max_order)
    with np.errstate(all="ignore"):
        phase = np.exp(1j * z.real)
        j = jve(n, z)
        h = hankel1e(n, z) * phase
        if n == 0:
            jp = -jve(1, z)
            hp = -hankel1e(1, z) * phase
        else:
            jp = jve(n - 1, z) - (n / z) * j
            hp = hankel1e(n - 1, z) * phase - (n / z) * h

    if not (
        np.all(np.isfinite(j))
        and np.all(np.isfinite(jp))
        and np.all(np.isfinite(h))
        and np.all(np.isfinite(hp))
    ):
        raise WouldOverflow(f"scaled cylinder functions of order {n} overflow")

    return CylFunEval(
        order=n, argument=z, j_scaled=j, jp_scaled=jp, h_scaled=h, hp_scaled=hp
    )


def eval_raw(n: int, z, max_order: int = MAX_ORDER) -> RawCylEval:
    """
    Evaluate unscaled J_n, J'_n, H_n, H'_n.

    Raises:
        WouldOverflow: if |Im z| is beyond the representable range or any value is
            not finite
    """
    z = _validate(n, z, max_order)
    if np.any(np.abs(z.imag) > RAW_EXPONENT_LIMIT):
        raise WouldOverflow("|Im z| too large for unscaled Bessel values")

    with np.errstate(all="ignore"):
        j = jv(n, z)
        h = hankel1(n, z)
        if n == 0:
            jp = -jv(1, z)
            hp = -hankel1(1, z)
        else:
            jp = jv(n - 1, z) - (n / z) * j
            hp = hankel1(n - 1, z) - (n / z) * h

    for values in (j, jp, h, hp):
        if not np.all(np.isfinite(values)):
            raise WouldOverflow(f"unscaled cylinder functions of order {n} overflow")
    return RawCylEval(j=j, jp=jp, h=h, hp=hp)


def _j_hypergeometric(n: int, z: np.ndarray) -> np.ndarray:
    """J_n(z) / g as the series 0F1(; n+1; -z^2/4)."""
    q = -(z * z) / 4
    term = np.ones_like(z)
    total = term.copy()
    for k in range(1, _SERIES_MAX_TERMS):
        term = term * q / (k * (n + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _h_leading_sum(n: int, z: np.ndarray) -> np.ndarray:
    """H_n(z) * g from the finite part of the Y_n series; O(g^2) terms are dropped."""
    if n == 0:
        return hankel1(0, z)
    k = np.arange(n)
    coeff = gammaln(n - k) - gammaln(k + 1) - gammaln(n + 1)
    log_terms = coeff[:, None] + 2 * k[:, None] * np.log(z / 2)[None, :]
    return -(1j / np.pi) * np.exp(log_terms).sum(axis=0)


def _normalized_series(n: int, z: np.ndarray) -> tuple[np.ndarray, ...]:
    j = _j_hypergeometric(n, z)
    j_next = _j_hypergeometric(n + 1, z)
    jp = (n / z) * j - (z / (2 * (n + 1))) * j_next
    h = _h_leading_sum(n, z)
    h_prev = _h_leading_sum(n - 1, z)
    hp = (z / (2 * n)) * h_prev - (n / z) * h
    return j, jp, h, hp


def eval_normalized(n: int, z, max_order: int = MAX_ORDER) -> NormalizedCylEval:
    """
    Evaluate J_n/g, J'_n/g, H_n*g, H'_n*g with g = (z/2)^n / n!.

    The library kernel is used in log form wherever its scaled output is
    representable; elsewhere (|z| far below n) the power series for J and the
    finite part of the Y series for H take over. Always finite for z != 0.
    """
    z = np.atleast_1d(_validate(n, z, max_order))
    log_g = log_power_factor(n, z)
    abs_im = np.abs(z.imag)

    with np.errstate(all="ignore"):
        j_s = jve(n, z)
        h_s = hankel1e(n, z)
        if n == 0:
            jp_s = -jve(1, z)
            hp_s = -hankel1e(1, z)
        else:
            jp_s = jve(n - 1, z) - (n / z) * j_s
            hp_s = hankel1e(n - 1, z) - (n / z) * h_s

        j_shift = abs_im - log_g
        h_shift = 1j * z + log_g
        j = np.exp(np.log(j_s) + j_shift)
        jp = np.exp(np.log(jp_s) + j_shift)
        h = np.exp(np.log(h_s) + h_shift)
        hp = np.exp(np.log(hp_s) + h_shift)

    lost = (
        ~np.isfinite(j)
        | ~np.isfinite(jp)
        | ~np.isfinite(h)
        | ~np.isfinite(hp)
        | (np.abs(j_s) < NORMALIZED_FLOOR)
        | (np.abs(h_s) > 1.0 / NORMALIZED_FLOOR)
    )
    if n > 0 and np.any(lost):
        sj, sjp, sh, shp = _normalized_series(n, z[lost])
        j[lost], jp[lost], h[lost], hp[lost] = sj, sjp, sh, shp

    return NormalizedCylEval(order=n, argument=z, log_g=log_g, j=j, jp=jp, h=h, hp=hp)
