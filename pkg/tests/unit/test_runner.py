"""Unit tests for the batch runner."""

import copy
import math

import pytest

from src.core.runner import BatchResult, BatchRunner, ReceiverResult
from src.models.scenario import Scenario

FAST_SOLVER = {"n_max": 2, "n_int": 48, "points_per_panel": 12, "direct_subtraction": "off"}


def _points(*rho_z: tuple[str, str]) -> list[dict]:
    return [{"kind": "point", "position": {"rho": rho, "z": z}} for rho, z in rho_z]


@pytest.fixture
def fast_scenario(scenario_dict):
    doc = copy.deepcopy(scenario_dict)
    doc["solver"] = dict(FAST_SOLVER)
    doc["receivers"] = _points(("0.03 m", "0.02 m"), ("0.05 m", "-0.01 m"), ("0.08 m", "0.04 m"))
    return doc


@pytest.mark.unit
class TestBatchRunner:
    def test_unknown_mode_rejected(self, fast_scenario):
        with pytest.raises(ValueError, match="mode"):
            BatchRunner(Scenario.model_validate(fast_scenario), mode="guess")

    def test_solver_overrides_reach_configs(self, fast_scenario, test_settings):
        runner = BatchRunner(Scenario.model_validate(fast_scenario), base_settings=test_settings)
        assert runner.summation.n_max == 2
        assert runner.path_cfg.n_int == 48
        assert runner.threads == test_settings.threads
        assert runner.kind is None
        assert len(runner.points) == 3

    async def test_oracle_run_preserves_order(self, fast_scenario, test_settings):
        doc = copy.deepcopy(fast_scenario)
        doc["receivers"] = _points(*[(f"{0.02 + 0.01 * i:.2f} m", "0.01 m") for i in range(8)])
        runner = BatchRunner(
            Scenario.model_validate(doc), threads=4, mode="oracle", base_settings=test_settings
        )
        batch = await runner.run()
        assert [r.index for r in batch.receivers] == list(range(8))
        assert [r.position[0] for r in batch.receivers] == pytest.approx(
            [0.02 + 0.01 * i for i in range(8)]
        )
        assert all(r.success for r in batch.receivers)
        assert batch.mode == "oracle"

    async def test_failure_is_isolated(self, fast_scenario, test_settings):
        doc = copy.deepcopy(fast_scenario)
        doc["receivers"] = _points(("0.03 m", "0.02 m"), ("0.01 m", "0 m"), ("0.05 m", "0 m"))
        batch = await BatchRunner(
            Scenario.model_validate(doc), threads=2, mode="oracle", base_settings=test_settings
        ).run()
        assert [r.success for r in batch.receivers] == [True, False, True]
        failed = batch.failed[0]
        assert failed.index == 1
        assert "coincides" in failed.error
        assert failed.error_type == "ValueError"
        assert not batch.all_failed

    async def test_solve_mode_with_reference(self, fast_scenario, test_settings):
        doc = copy.deepcopy(fast_scenario)
        doc["output"] = {"reference": "analytic"}
        batch = await BatchRunner(
            Scenario.model_validate(doc), threads=2, base_settings=test_settings
        ).run()
        assert len(batch.succeeded) == 3
        first = batch.receivers[0]
        assert first.fields.diagnostics is not None
        assert first.reference is not None
        error = first.relative_error_db("E_z")
        assert error is not None and math.isfinite(error)

    async def test_forced_subtraction_on_mismatched_layer_fails_every_receiver(
        self, fast_scenario, test_settings
    ):
        doc = copy.deepcopy(fast_scenario)
        doc["layers"][0]["vertical"]["mu_r"] = 16.0
        doc["solver"]["direct_subtraction"] = "on"
        batch = await BatchRunner(Scenario.model_validate(doc), base_settings=test_settings).run()
        assert batch.all_failed
        assert {r.error_type for r in batch.receivers} == {"UnsupportedAnisotropy"}

    async def test_empty_receiver_list(self, fast_scenario, test_settings):
        doc = copy.deepcopy(fast_scenario)
        doc["receivers"] = []
        batch = await BatchRunner(Scenario.model_validate(doc), base_settings=test_settings).run()
        assert batch.receivers == []
        assert not batch.all_failed


@pytest.mark.unit
class TestReceiverResult:
    def test_error_db_needs_reference(self):
        record = ReceiverResult(index=0, position=(0.1, 0.0, 0.0), success=True)
        assert record.relative_error_db("E_z") is None

    def test_batch_partitions(self, scenario_dict):
        scenario = Scenario.model_validate(scenario_dict)
        ok = ReceiverResult(index=0, position=(0.1, 0.0, 0.0), success=True)
        bad = ReceiverResult(index=1, position=(0.2, 0.0, 0.0), success=False, error="x")
        batch = BatchResult(scenario=scenario, mode="solve", receivers=[ok, bad])
        assert batch.succeeded == [ok]
        assert batch.failed == [bad]
        assert not batch.all_failed
        assert BatchResult(scenario=scenario, mode="solve", receivers=[bad]).all_failed
