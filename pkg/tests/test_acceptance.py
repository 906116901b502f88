"""
Comprobaciones de extremo a extremo sobre el banco sintético de la articulación 2:
síntesis con los valores por defecto, certificado, comparación con el DOB base,
margen de módulo medido e identificación frente a FRF exacta.
"""
import time

import numpy as np
import pytest

from convexify.helpers.replay import refine_grid
from convexify.helpers.scp import synthesize
from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset
from plant_lab.helpers.excitation import grid_from_lines, multisine_lines
from plant_lab.helpers.frequency_response import bank_dataset, plant_frf
from plant_lab.helpers.identification import identify_bank
from plant_lab.helpers.table_bank import make_table1_bank
from stability.utils.certificate import certify
from synth_core.helpers.sensitivity import sensitivities
from synth_core.models.controller import WeightSpec
from validate.helpers.baseline import baseline_model_dob
from validate.helpers.closed_loop import analytic_sensitivity, measure_sensitivity, run_closed_loop
from validate.helpers.spectrum import band_labels
from validate.models.scenario import Scenario, standard_bands

pytestmark = pytest.mark.slow

TS = 0.001
BASELINE_CUTOFF_HZ = 2.0


@pytest.fixture(scope="module")
def table_bank():
    return make_table1_bank(2, 3, TS)


@pytest.fixture(scope="module")
def default_synthesis(table_bank):
    """Órdenes (6, 6) por defecto sobre 200 frecuencias; devuelve (dataset, resultado, segundos)."""
    dataset = bank_dataset(table_bank, FrequencyGrid.logspace_hz(0.1, 500.0, 200, TS))
    start = time.perf_counter()
    result = synthesize(dataset, WeightSpec())
    return dataset, result, time.perf_counter() - start


@pytest.fixture(scope="module")
def chirp_runs(table_bank, default_synthesis):
    _, result, _ = default_synthesis
    controllers = {
        "optimized": result.params,
        "baseline": baseline_model_dob(table_bank, BASELINE_CUTOFF_HZ),
        "none": None,
    }
    edges = standard_bands(result.zeta)
    scenario = Scenario.standard("chirp", 30.0)
    runs = {
        name: [run_closed_loop(plant, params, scenario, band_edges=edges) for plant in table_bank.plants]
        for name, params in controllers.items()
    }
    return runs, band_labels(edges)[0]


class TestDefaultSynthesis:
    def test_constraints_hold_within_time(self, default_synthesis):
        dataset, result, elapsed = default_synthesis
        assert len(dataset.grid) == 200
        assert (result.params.qn, result.params.qd) == (6, 6)
        assert result.iterations <= 50
        assert result.replay["passed"]
        for label in dataset.labels:
            assert result.replay["w1s"][label] <= 1 + 1e-6
            assert result.replay["w2s"][label] <= 1 + 1e-6
            assert result.replay["w3t"][label] <= 1 + 1e-6
        assert elapsed < 60.0

    def test_auxiliary_variables_consistent(self, default_synthesis):
        _, result, _ = default_synthesis
        assert result.gamma1 <= result.zeta ** -2 + 1e-9
        assert result.gamma2 <= result.m_var ** -2 + 1e-9

    def test_converged_controller_is_certified(self, table_bank, default_synthesis):
        dataset, result, _ = default_synthesis
        assert result.converged
        refined = bank_dataset(table_bank, refine_grid(dataset.grid, 4))
        certificate = certify(refined, result.params, result.lin_history)
        assert certificate.passed, certificate.failures

    def test_baseline_is_certified_on_median_plant(self, table_bank):
        plant = table_bank.median_plant()
        grid = FrequencyGrid.logspace_hz(0.01, 500.0, 2000, TS)
        dataset = FrfDataset(grid, [FrfConfiguration("median", plant_frf(plant, grid))])
        certificate = certify(dataset, baseline_model_dob(table_bank, BASELINE_CUTOFF_HZ))
        assert certificate.passed, certificate.failures


class TestAgainstBaseline:
    def test_bandwidth_not_below_baseline(self, chirp_runs, table_bank):
        runs, _ = chirp_runs
        for optimized, baseline in zip(runs["optimized"], runs["baseline"]):
            assert optimized.metrics.bandwidth_hz >= baseline.metrics.bandwidth_hz
        assert all(run.metrics.bandwidth_hz == 0.0 for run in runs["none"])

    def test_in_band_power_ordering(self, chirp_runs):
        runs, band = chirp_runs
        power = {name: sum(run.metrics.power_spectrum[band] for run in series)
                 for name, series in runs.items()}
        assert power["optimized"] <= 0.95 * power["baseline"]
        assert power["baseline"] <= 0.95 * power["none"]


class TestModulusMargin:
    def test_peak_sensitivity_bound(self, table_bank, default_synthesis):
        dataset, result, _ = default_synthesis
        bound = 1.0 / result.spec.sigma * 1.02
        grid_peaks, dense_peaks, measured_peaks = [], [], []
        for plant in table_bank.plants:
            s, _ = sensitivities(plant_frf(plant, dataset.grid), result.params.h, result.params.t,
                                 dataset.grid.omega)
            grid_peaks.append(np.max(np.abs(s)))
            _, dense = analytic_sensitivity(plant, result.params)
            dense_peaks.append(np.max(dense))
            _, measured = measure_sensitivity(plant, result.params, dataset.grid, period_length=16384,
                                              periods=2)
            measured_peaks.append(np.max(np.abs(measured)))
        assert 1.0 < max(grid_peaks) <= bound
        assert 1.0 < max(dense_peaks)
        assert 1.0 < max(measured_peaks) <= bound


class TestIdentifiedPipeline:
    def test_identified_frf_keeps_zeta(self, table_bank):
        lines = multisine_lines(4096, 60, 0.5, TS)
        identified = identify_bank(table_bank, 4096, 2, lines)
        exact = bank_dataset(table_bank, grid_from_lines(lines, 4096, TS))
        relative = np.abs(identified.responses - exact.responses) / np.abs(exact.responses)
        assert np.max(relative) < 1e-3

        from_identified = synthesize(identified, WeightSpec(), orders=(4, 4))
        from_exact = synthesize(exact, WeightSpec(), orders=(4, 4))
        assert from_identified.zeta == pytest.approx(from_exact.zeta, rel=1e-2)
