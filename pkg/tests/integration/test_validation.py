"""
End-to-end validation of the spectral solver.

The whole-space benchmark compares spectral fields with the closed form; the
remaining suites check degenerate stacks, quadrature and truncation, badly
scaled stacks, thread-count independence, and (opt-in) the borehole case
tables.
"""

import copy
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest
from scipy.special import h1vp, hankel1, jv, jvp

from src.core.output import render_csv
from src.core.runner import BatchRunner
from src.models.scenario import Scenario, load_scenario
from src.solver.analytic import analytic_fields
from src.solver.coefficients import CoeffCache, local_rt
from src.solver.integrand import SourceVector
from src.solver.mat2 import det2, diag2, from_entries
from src.solver.media import Layer, LayerStack, UniaxialTensor, derive_spectral
from src.solver.paths import PathKind
from src.solver.spectral import SummationConfig, evaluate

VALIDATION_DIR = Path(__file__).resolve().parents[2] / "validation"
BENCHMARKS = ["homogeneous_k1", "homogeneous_k1p41", "homogeneous_k2", "homogeneous_k4"]
BENCHMARK_THRESHOLD_DB = 10 * math.log10(1e-3)
GEOMETRY_ENV = "CYLGREEN_CASE_GEOMETRY"


# ── Whole-space benchmark ────────────────────────────────────────────────


@pytest.mark.integration
@pytest.mark.slow
class TestWholeSpaceBenchmark:
    @pytest.mark.parametrize("name", BENCHMARKS)
    async def test_spectral_matches_closed_form(self, name, test_settings):
        scenario = load_scenario(VALIDATION_DIR / f"{name}.cfg")
        batch = await BatchRunner(scenario, threads=4, base_settings=test_settings).run()

        assert len(batch.receivers) == 36
        assert not batch.failed, [r.error for r in batch.failed]
        errors = [r.relative_error_db("E_z") for r in batch.receivers]
        assert max(errors) <= BENCHMARK_THRESHOLD_DB, errors

    @pytest.mark.parametrize("name", BENCHMARKS)
    async def test_truncated_mode_sum_saturates(self, name, test_settings):
        """Too few azimuthal orders leave an error that more k_z points cannot remove."""
        scenario = load_scenario(VALIDATION_DIR / f"{name}.cfg")
        doc = json.loads(scenario.dump())
        doc["receivers"] = [{"kind": "point", "position": {"rho": "0.03 m", "z": "0 m"}}]
        errors = []
        for n_int in (1000, 2000):
            doc["solver"].update({"n_max": 3, "n_int": n_int})
            batch = await BatchRunner(Scenario.model_validate(doc), base_settings=test_settings).run()
            errors.append(batch.receivers[0].relative_error_db("E_z"))
        assert min(errors) > BENCHMARK_THRESHOLD_DB
        assert abs(errors[0] - errors[1]) < 3.0

    def test_mode_sum_converges_faster_for_stronger_anisotropy(self, benchmark_stack_factory):
        src = SourceVector(moment=1.0, orientation=(0.0, 0.0, 1.0), position=(0.01, 0.0, 0.0))
        receiver = (0.03, 0.0, 0.03)
        cfg = SummationConfig(n_max=2, n_int=2000)
        errors = {}
        for kappa in (1.0, 4.0):
            stack = benchmark_stack_factory(kappa)
            layer = stack.layers[0]
            result = evaluate(stack, src, receiver, cfg, subtraction="off")
            expected = analytic_fields(layer.eps, layer.mu, stack.omega, src, receiver).as_vector()
            errors[kappa] = float(np.linalg.norm(result.as_vector() - expected) / np.linalg.norm(expected))
        assert errors[4.0] < errors[1.0]

    def test_subtraction_on_and_off_agree(self, benchmark_stack_factory, z_source):
        stack = benchmark_stack_factory(2.0)
        receiver = (0.05, 0.0, 0.05)
        cfg = SummationConfig(n_max=30, n_int=4000)
        on = evaluate(stack, z_source, receiver, cfg, subtraction="on")
        off = evaluate(stack, z_source, receiver, cfg, subtraction="off")
        assert on.diagnostics.subtraction == "on"
        assert off.diagnostics.subtraction == "off"
        error = np.linalg.norm(off.as_vector() - on.as_vector()) / np.linalg.norm(on.as_vector())
        assert error <= 1e-6


# ── Degenerate stacks ────────────────────────────────────────────────────


def _identical_stack(n_layers: int, eps: UniaxialTensor, mu: UniaxialTensor) -> LayerStack:
    radii = [0.03 * (i + 1) for i in range(n_layers - 1)] + [math.inf]
    return LayerStack(layers=tuple(Layer(r, eps, mu) for r in radii), frequency=36e3)


@pytest.mark.integration
class TestDegenerateStacks:
    def setup_method(self):
        omega = 2 * math.pi * 36e3
        self.eps = UniaxialTensor.from_material(16, 4, 16.0, 4.0, omega)
        self.mu = UniaxialTensor.permeability(16.0, 4.0)
        self.cfg = SummationConfig(n_max=10, n_int=480)
        self.src = SourceVector.from_direction(1.0, (1.0, 0.0, 1.0), (0.015, 0.0, 0.0))

    @pytest.mark.parametrize("n_layers", [2, 3, 5])
    def test_identical_layers_match_homogeneous(self, n_layers):
        receiver = (0.045, 0.4, 0.03)
        layered = evaluate(
            _identical_stack(n_layers, self.eps, self.mu), self.src, receiver, self.cfg, subtraction="off"
        )
        whole = evaluate(
            LayerStack.homogeneous(self.eps, self.mu, 36e3), self.src, receiver, self.cfg, subtraction="off"
        )
        expected = whole.as_vector()
        error = np.linalg.norm(layered.as_vector() - expected) / np.linalg.norm(expected)
        assert error <= 1e-6


# ── Quadrature and truncation ────────────────────────────────────────────


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


@pytest.mark.integration
@pytest.mark.slow
class TestQuadratureAndTruncation:
    def setup_method(self):
        self.src = SourceVector.from_direction(1.0, (1.0, 0.0, 1.0), (0.05, 0.0, 0.0))
        self.receiver = (0.3, 0.7, 0.05)

    def test_sip_and_dsip_agree(self, three_layer_stack):
        cfg = SummationConfig(n_max=6, n_int=1600)
        sip = evaluate(three_layer_stack, self.src, self.receiver, cfg, kind=PathKind.SIP)
        dsip = evaluate(three_layer_stack, self.src, self.receiver, cfg, kind=PathKind.DSIP)
        assert sip.diagnostics.path_kind == "sip"
        assert dsip.diagnostics.path_kind == "dsip"
        assert _relative(dsip.as_vector(), sip.as_vector()) <= 1e-4

    def test_halving_panels_leaves_result_unchanged(self, three_layer_stack):
        coarse = evaluate(three_layer_stack, self.src, self.receiver, SummationConfig(n_max=6, n_int=1000))
        fine = evaluate(three_layer_stack, self.src, self.receiver, SummationConfig(n_max=6, n_int=2000))
        assert coarse.diagnostics.path_kind == fine.diagnostics.path_kind
        assert _relative(coarse.as_vector(), fine.as_vector()) <= 1e-6

    def test_doubling_mode_count_leaves_result_unchanged(self, three_layer_stack):
        base = evaluate(three_layer_stack, self.src, self.receiver, SummationConfig(n_max=10, n_int=1000))
        doubled = evaluate(three_layer_stack, self.src, self.receiver, SummationConfig(n_max=20, n_int=1000))
        assert not base.diagnostics.not_converged
        assert _relative(base.as_vector(), doubled.as_vector()) <= 1e-6
        tail = np.asarray(doubled.diagnostics.mode_magnitudes[11:])
        assert np.all(tail <= 1e-6 * max(doubled.diagnostics.mode_magnitudes))


# ── Badly scaled stacks ──────────────────────────────────────────────────

# (frequency Hz, core sigma, core radius, annulus sigma, annulus radius, formation sigma)
STRESS_SETS = [
    (100.0, 1e5, 1e-3, 1e4, 5e-3, 1e3),
    (10.0, 1e6, 5e-4, 1e5, 3e-3, 1e4),
    (1e3, 1e4, 1e-3, 1e3, 4e-3, 10.0),
]
STRESS_ORDER = 60


def _stress_stack(frequency, core_sigma, core_radius, annulus_sigma, annulus_radius, formation_sigma):
    omega = 2 * math.pi * frequency
    mu = UniaxialTensor.permeability()
    return LayerStack(
        layers=(
            Layer(core_radius, UniaxialTensor.from_material(1, 1, core_sigma, core_sigma, omega), mu),
            Layer(
                annulus_radius,
                UniaxialTensor.from_material(1, 1, annulus_sigma, annulus_sigma / 4, omega),
                mu,
            ),
            Layer(
                math.inf,
                UniaxialTensor.from_material(1, 1, formation_sigma, formation_sigma / 2, omega),
                mu,
            ),
        ),
        frequency=frequency,
    )


def _raw_matrices(sp, layer: int, radius: float, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Unconditioned (z, phi) matrices of one layer from raw Bessel values."""
    value, derivative = (jv, jvp) if kind == "J" else (hankel1, h1vp)
    n, kz = sp.n, sp.kz
    k_eps, k_mu = sp.krho_eps[layer], sp.krho_mu[layer]
    fe, fm = value(n, k_eps * radius), value(n, k_mu * radius)
    dfe, dfm = derivative(n, k_eps * radius), derivative(n, k_mu * radius)
    scale = 1.0 / (sp.krho[layer] ** 2 * radius)
    z_mat = diag2(fe, fm)
    phi = scale[:, None, None] * from_entries(
        1j * sp.omega * sp.eps_h[layer] * k_eps * radius * dfe,
        -n * kz * fm,
        -n * kz * fe,
        -1j * sp.omega * sp.mu_h[layer] * k_mu * radius * dfm,
    )
    return z_mat, phi


def _inverse(m: np.ndarray) -> np.ndarray:
    return from_entries(m[:, 1, 1], -m[:, 0, 1], -m[:, 1, 0], m[:, 0, 0]) / det2(m)[:, None, None]


def _unconditioned_reflection(stack: LayerStack, n: int, kz: np.ndarray) -> np.ndarray:
    """Outward local reflection at the core radius assembled without any conditioning."""
    sp = derive_spectral(stack, n, kz)
    a = stack.layers[0].outer_radius
    jz1, jphi1 = _raw_matrices(sp, 0, a, "J")
    hz1, hphi1 = _raw_matrices(sp, 0, a, "H")
    hz2, hphi2 = _raw_matrices(sp, 1, a, "H")
    x = hz2 @ _inverse(hphi2)
    return _inverse(jz1 - x @ jphi1) @ (x @ hphi1 - hz1)


@pytest.mark.integration
@pytest.mark.slow
class TestStabilityStress:
    @pytest.mark.parametrize("params", STRESS_SETS)
    def test_unconditioned_reflection_breaks_down(self, params):
        """Raw-value assembly of R at the core radius leaves double range; the conditioned one does not."""
        stack = _stress_stack(*params)
        kz = np.abs(stack.wavenumbers()[2]) * np.array([0.0, 0.5 - 0.05j, 3.0])
        with np.errstate(all="ignore"):
            raw = _unconditioned_reflection(stack, STRESS_ORDER, kz)
        assert not np.all(np.isfinite(raw))

        cache = CoeffCache(sp=derive_spectral(stack, STRESS_ORDER, kz), stack=stack)
        conditioned = local_rt(cache, 0)
        for m in (conditioned.r_out, conditioned.t_out, conditioned.r_in, conditioned.t_in):
            assert np.all(np.isfinite(m))
        assert cache.peak <= 1e6

    @pytest.mark.parametrize("params", STRESS_SETS)
    def test_conditioned_fields_finite_and_converged(self, params):
        stack = _stress_stack(*params)
        annulus = 0.5 * (params[2] + params[4])
        src = SourceVector.from_direction(1.0, (1.0, 0.0, 1.0), (annulus, 0.0, 0.0))
        result = evaluate(
            stack,
            src,
            (4 * params[4], 0.3, 0.01),
            SummationConfig(n_max=STRESS_ORDER, n_int=2000),
        )
        assert result.is_finite
        assert result.diagnostics.quadrature_residual < 1e-6


# ── Determinism ──────────────────────────────────────────────────────────


@pytest.mark.integration
@pytest.mark.slow
class TestDeterminism:
    async def test_thread_count_does_not_change_output(self, test_settings):
        scenario = load_scenario(VALIDATION_DIR / "homogeneous_k4.cfg")
        outputs = []
        for threads in (1, 4, 8):
            batch = await BatchRunner(scenario, threads=threads, base_settings=test_settings).run()
            outputs.append(render_csv(batch))
        assert outputs[0] == outputs[1] == outputs[2]


# ── Borehole case tables (needs user geometry) ───────────────────────────


def _case_files() -> list[Path]:
    root = os.environ.get(GEOMETRY_ENV)
    if not root:
        return []
    return sorted(p for p in Path(root).glob("case*.cfg") if "template" not in p.stem)


def _three_significant(value: float) -> float:
    return 0.5 * 10 ** (math.floor(math.log10(abs(value))) - 2)


@pytest.mark.integration
@pytest.mark.slow
@pytest.mark.requires_geometry
@pytest.mark.skipif(not _case_files(), reason=f"set {GEOMETRY_ENV} to a folder of filled-in case*.cfg files")
class TestCaseTables:
    @pytest.mark.parametrize("path", _case_files(), ids=lambda p: p.stem)
    async def test_magnitude_differences(self, path, test_settings):
        base = load_scenario(path)
        expected = base.expected
        assert expected, f"{path} has no expected block"

        magnitudes = []
        for resistivity in expected["vertical_resistivity"]:
            doc = json.loads(base.dump())
            layer = copy.deepcopy(doc["layers"][expected["formation_layer"]])
            vertical = layer.get("vertical") or layer["horizontal"]
            layer["vertical"] = {**vertical, "conductivity": None, "resistivity": resistivity}
            doc["layers"][expected["formation_layer"]] = layer
            batch = await BatchRunner(Scenario.model_validate(doc), base_settings=test_settings).run()
            record = batch.receivers[0]
            assert record.success, record.error
            magnitudes.append(float(np.linalg.norm(record.fields.H)))

        for got, want in zip(magnitudes, expected["abs_H"], strict=True):
            assert abs(got - want) <= _three_significant(want)
        deltas = [a - b for a, b in zip(magnitudes, magnitudes[1:])]
        for got, want in zip(deltas, expected["delta_abs_H"], strict=True):
            assert abs(got - want) <= expected["abs_tolerance"]
