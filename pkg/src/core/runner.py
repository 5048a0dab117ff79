"""
Batch runner: evaluates every receiver of a scenario on a small worker pool.

Each receiver runs in a worker thread (the numeric kernel is synchronous);
asyncio.gather keeps results in input order whatever the completion order.
A failing receiver is recorded and the batch continues.
"""

import asyncio
import time
from dataclasses import dataclass, field

import structlog

from src.config.settings import Settings, settings
from src.core.compare import relative_error_db
from src.models.scenario import Scenario
from src.solver.analytic import analytic_fields
from src.solver.integrand import SourceVector
from src.solver.media import LayerStack, RegimeConfig
from src.solver.paths import PathConfig, PathKind
from src.solver.results import FieldResult
from src.solver.spectral import SubtractionMode, SummationConfig, evaluate
from src.utils.logger import get_logger

logger = get_logger("runner")


@dataclass
class ReceiverResult:
    """Outcome of one receiver evaluation."""

    index: int
    position: tuple[float, float, float]
    success: bool
    fields: FieldResult | None = None
    reference: FieldResult | None = None
    error: str | None = None
    error_type: str | None = None
    wall_time: float = 0.0

    def relative_error_db(self, component: str) -> float | None:
        """dB error of `component` against the analytic reference, if one was computed."""
        if not (self.success and self.reference is not None and self.fields is not None):
            return None
        return relative_error_db(self.reference.component(component), self.fields.component(component))


@dataclass
class BatchResult:
    scenario: Scenario
    mode: str
    receivers: list[ReceiverResult] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def succeeded(self) -> list[ReceiverResult]:
        return [r for r in self.receivers if r.success]

    @property
    def failed(self) -> list[ReceiverResult]:
        return [r for r in self.receivers if not r.success]

    @property
    def all_failed(self) -> bool:
        """True when there was work and none of it succeeded."""
        return bool(self.receivers) and not self.succeeded


class BatchRunner:
    """
    Run a scenario in `solve` (spectral) or `oracle` (closed form) mode.

    Usage:
        runner = BatchRunner(scenario, threads=4)
        result = await runner.run()
    """

    MODES = ("solve", "oracle")

    def __init__(
        self,
        scenario: Scenario,
        threads: int | None = None,
        mode: str = "solve",
        base_settings: Settings | None = None,
    ):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}, got '{mode}'")
        self.scenario = scenario
        self.mode = mode
        self.settings = scenario.solver.merged(base_settings or settings)
        self.threads = threads or self.settings.threads

        self.stack: LayerStack = scenario.to_stack()
        self.source: SourceVector = scenario.to_source()
        self.points = scenario.receiver_points()

        self.summation = SummationConfig.from_settings(self.settings)
        self.path_cfg = PathConfig.from_settings(self.settings)
        self.regime_cfg = RegimeConfig.from_settings(self.settings)
        self.subtraction = SubtractionMode(scenario.solver.direct_subtraction)
        self.kind = None if scenario.solver.path == "auto" else PathKind(scenario.solver.path)

    def _analytic(self, position: tuple[float, float, float]) -> FieldResult:
        layer = self.stack.layers[self.stack.locate(self.source.rho)]
        return analytic_fields(layer.eps, layer.mu, self.stack.omega, self.source, position)

    def _spectral(self, position: tuple[float, float, float]) -> FieldResult:
        return evaluate(
            self.stack,
            self.source,
            position,
            self.summation,
            path_cfg=self.path_cfg,
            regime_cfg=self.regime_cfg,
            subtraction=self.subtraction,
            kind=self.kind,
            magnitude_limit=self.settings.coefficient_magnitude_limit,
            max_order=self.settings.max_order,
            interface_tolerance=self.settings.interface_tolerance,
        )

    def evaluate_receiver(self, index: int, position: tuple[float, float, float]) -> ReceiverResult:
        """Synchronous single-receiver evaluation; exceptions become failed records."""
        start = time.perf_counter()
        try:
            if self.mode == "oracle":
                fields = self._analytic(position)
                reference = None
            else:
                fields = self._spectral(position)
                reference = (
                    self._analytic(position) if self.scenario.output.reference == "analytic" else None
                )
            if not fields.is_finite:
                raise ArithmeticError("non-finite field values")
            return ReceiverResult(
                index=index,
                position=position,
                success=True,
                fields=fields,
                reference=reference,
                wall_time=time.perf_counter() - start,
            )
        except Exception as e:
            logger.error(
                "receiver_failed",
                index=index,
                position=position,
                error=str(e),
                error_type=type(e).__name__,
            )
            return ReceiverResult(
                index=index,
                position=position,
                success=False,
                error=str(e),
                error_type=type(e).__name__,
                wall_time=time.perf_counter() - start,
            )

    async def run(self) -> BatchResult:
        """
        Evaluate all receivers with at most `threads` running at once.

        Returns:
            BatchResult with receivers in input order
        """
        start = time.perf_counter()
        logger.info(
            "batch_start",
            scenario=self.scenario.name,
            mode=self.mode,
            receivers=len(self.points),
            threads=self.threads,
        )
        semaphore = asyncio.Semaphore(self.threads)

        async def worker(index: int, position: tuple[float, float, float]) -> ReceiverResult:
            # task-local: gather runs each coroutine in its own context copy
            structlog.contextvars.bind_contextvars(receiver=index)
            async with semaphore:
                return await asyncio.to_thread(self.evaluate_receiver, index, position)

        tasks = [worker(i, p) for i, p in enumerate(self.points)]
        outcomes = await asyncio.gather(*tasks, return_exceptions=True)

        receivers = []
        for index, outcome in enumerate(outcomes):
            if isinstance(outcome, BaseException):
                logger.error(
                    "receiver_failed",
                    index=index,
                    error=str(outcome),
                    error_type=type(outcome).__name__,
                )
                receivers.append(
                    ReceiverResult(
                        index=index,
                        position=self.points[index],
                        success=False,
                        error=str(outcome),
                        error_type=type(outcome).__name__,
                    )
                )
            else:
                receivers.append(outcome)

        result = BatchResult(
            scenario=self.scenario,
            mode=self.mode,
            receivers=receivers,
            wall_time=time.perf_counter() - start,
        )
        logger.info(
            "batch_complete",
            succeeded=len(result.succeeded),
            failed=len(result.failed),
            wall_time=round(result.wall_time, 3),
        )
        return result
