"""
Retry helpers for spectral evaluations that hit a pole or branch point.

A retry does not wait: each attempt widens the contour detour instead, so the
quadrature nodes move away from the offending singularity.
"""

from collections.abc import Callable
from typing import TypeVar

from tenacity import RetryCallState, Retrying, retry_if_exception_type, stop_after_attempt

from src.config.constants import DETOUR_GROWTH, PATH_RETRY_ATTEMPTS
from src.solver.errors import RadialWavenumberNearZero, SingularInterfaceMatrix
from src.utils.logger import get_logger

logger = get_logger("retry")

T = TypeVar("T")

RETRYABLE = (SingularInterfaceMatrix, RadialWavenumberNearZero)


def _log_retry(retry_state: RetryCallState) -> None:
    outcome = retry_state.outcome
    error = outcome.exception() if outcome else None
    logger.warning(
        "path_retry",
        attempt=retry_state.attempt_number,
        error=str(error),
        error_type=type(error).__name__ if error else None,
    )


def create_path_retrying(
    max_attempts: int = PATH_RETRY_ATTEMPTS,
    retry_exceptions: tuple = RETRYABLE,
) -> Retrying:
    """
    Create a tenacity Retrying controller for singular spectral points.

    Args:
        max_attempts: Total number of attempts, the first included
        retry_exceptions: Exception types that trigger another attempt

    Returns:
        Retrying instance that re-raises the last error when exhausted
    """
    return Retrying(
        stop=stop_after_attempt(max_attempts),
        retry=retry_if_exception_type(retry_exceptions),
        after=_log_retry,
        reraise=True,
    )


def retry_with_wider_detour(
    func: Callable[[float], T],
    max_attempts: int = PATH_RETRY_ATTEMPTS,
    growth: float = DETOUR_GROWTH,
) -> tuple[T, int]:
    """
    Call func(detour_scale) until it stops raising a retryable error.

    The first attempt uses scale 1; each later attempt multiplies it by `growth`.

    Returns:
        (result, number of retries used)
    """
    number = 0
    for attempt in create_path_retrying(max_attempts):
        with attempt:
            number = attempt.retry_state.attempt_number
            result = func(growth ** (number - 1))
    return result, number - 1
