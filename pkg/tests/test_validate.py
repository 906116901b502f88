import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.signal import lfilter

from conftest import random_bank, random_controller
from frf.models.frf_dataset import FrequencyGrid
from plant_lab.helpers.frequency_response import bank_dataset, plant_frf
from plant_lab.models.plants import RigidPlant
from stability.utils.certificate import certify
from synth_core.helpers.polynomials import eval_rational
from synth_core.helpers.sensitivity import sensitivities
from synth_core.models.controller import ControllerParams
from utils.errors import ImproperFilterError, ShortRecordError, WindingError
from validate.helpers import closed_loop
from validate.helpers.baseline import baseline_filters, baseline_model_dob
from validate.helpers.closed_loop import (
    LoopFilter, analytic_sensitivity, dob_filter_coefficients, measure_sensitivity, run_closed_loop,
)
from validate.helpers.spectrum import band_labels, band_power_map, power_spectrum
from validate.models.scenario import Scenario, standard_bands

TS = 0.001


def _gain(k):
    return ControllerParams([k], [1.0])


class TestScenario:
    def test_rejects_unknown_disturbance(self):
        with pytest.raises(ValueError):
            Scenario("x", "earthquake")

    def test_sweep_requires_schedule(self):
        with pytest.raises(ValueError):
            Scenario("x", "inertia_sweep")

    def test_geometric_schedule(self):
        scenario = Scenario("sweep", "inertia_sweep", 10.0, start=1.0, inertia_schedule=(0.01, 4.0, 2.0))
        schedule = scenario.inertia_at(np.array([0.0, 1.0, 2.0, 3.0, 9.0]))
        npt.assert_allclose(schedule, [0.01, 0.01, 0.2, 4.0, 4.0])

    def test_bank_range(self):
        scenario = Scenario("sweep", "inertia_sweep", inertia_schedule=(0.01, 5.0, 5.0))
        with pytest.raises(ValueError):
            scenario.check_bank_range([0.01, 0.2, 4.15])

    def test_standard_scenarios(self, joint2_bank):
        sweep = Scenario.standard("inertia_sweep", inertias=joint2_bank.inertias)
        assert sweep.inertia_schedule[:2] == (min(joint2_bank.inertias), max(joint2_bank.inertias))
        assert sweep.has_reference
        assert Scenario.standard("step").disturbance == "step"
        with pytest.raises(ValueError):
            Scenario.standard("inertia_sweep")

    def test_standard_bands(self):
        bands = standard_bands(2 * math.pi * 3.0)
        assert bands[1] == pytest.approx(0.7 * 3.0)
        assert list(bands) == sorted(bands)


class TestLoopFilter:
    def test_matches_lfilter(self, rng):
        params = random_controller(rng, qn=2, qd=4)
        signal = rng.normal(size=300)
        b, a = dob_filter_coefficients(params)
        loop = LoopFilter(params)
        output = np.array([loop.step(value) for value in signal])
        npt.assert_allclose(output, lfilter(b, a, signal), rtol=1e-10, atol=1e-12)

    def test_static_gain(self):
        loop = LoopFilter(_gain(3.0))
        assert loop.step(2.0) == 6.0

    def test_non_causal_controller(self):
        with pytest.raises(ImproperFilterError):
            dob_filter_coefficients(ControllerParams([0.0, 1.0], [1.0, 0.0]))


class TestClosedLoop:
    def test_zero_inputs_stay_zero(self, rigid_plant, joint2_bank):
        controller = baseline_model_dob(joint2_bank, 2.0)
        run = run_closed_loop(rigid_plant, controller, Scenario("quiet", "none", 1.0))
        for series in (run.torque, run.estimate, run.motor_pos, run.link_vel):
            npt.assert_array_equal(series, 0.0)
        assert not run.diverged

    def test_step_rejection_on_rigid_plant(self, rigid_plant, rigid_dataset):
        controller = _gain(5.0)
        assert certify(rigid_dataset, controller).passed
        scenario = Scenario("step", "step", 20.0)
        open_loop = run_closed_loop(rigid_plant, None, scenario)
        closed = run_closed_loop(rigid_plant, controller, scenario)
        assert abs(closed.link_vel[-1]) < 0.1 * abs(open_loop.link_vel[-1])
        assert abs(closed.estimate[-1]) == pytest.approx(1.0, rel=0.02)

    def test_divergence_is_reported(self, rigid_plant):
        run = run_closed_loop(rigid_plant, _gain(-5.0), Scenario("step", "step", 5.0))
        assert run.diverged
        assert run.event["state_norm"] > 1e9
        assert run.torque.size == run.event["step"] + 1

    def test_sweep_needs_two_mass_plant(self, rigid_plant):
        scenario = Scenario("sweep", "inertia_sweep", 2.0, inertia_schedule=(0.1, 0.2, 1.0))
        with pytest.raises(ValueError):
            run_closed_loop(rigid_plant, None, scenario)

    def test_sweep_on_two_mass_plant(self, joint2_bank):
        plant = joint2_bank.plants[0]
        scenario = Scenario.standard("inertia_sweep", 8.0, inertias=joint2_bank.inertias)
        run = run_closed_loop(plant, None, scenario)
        assert not run.diverged
        assert run.metrics.rmse > 0

    def test_trajectory_export(self, rigid_plant):
        run = run_closed_loop(rigid_plant, None, Scenario("step", "step", 0.5))
        frame = run.to_dataframe()
        assert list(frame.columns) == ["t", "u", "d", "d_hat", "theta", "theta_dot", "q", "q_dot"]
        assert len(frame) == 500

    def test_metrics_without_controller(self, rigid_plant):
        run = run_closed_loop(rigid_plant, None, Scenario("step", "step", 2.0))
        assert run.metrics.sensitivity_peak == 1.0
        assert set(run.metrics.to_dict()) == {"bandwidth_hz", "sensitivity_peak", "step_overshoot_pct",
                                              "rmse", "power_spectrum"}

    def test_analytic_sensitivity(self, rigid_plant):
        grid, magnitude = analytic_sensitivity(rigid_plant, _gain(5.0), points=50)
        s, _ = sensitivities(plant_frf(rigid_plant, grid), [5.0], [1.0], grid.omega)
        npt.assert_allclose(magnitude, np.abs(s))

    def test_peak_is_raw_maximum(self, rigid_plant):
        run = run_closed_loop(rigid_plant, _gain(5.0), Scenario("step", "step", 2.0))
        _, magnitude = analytic_sensitivity(rigid_plant, _gain(5.0))
        assert run.metrics.sensitivity_peak == pytest.approx(float(np.max(magnitude)), rel=1e-12)

    def test_peak_below_one_is_not_clamped(self, rigid_plant, monkeypatch):
        grid = FrequencyGrid.logspace_hz(1.0, 100.0, 4, TS)
        monkeypatch.setattr(closed_loop, "analytic_sensitivity",
                            lambda plant, controller: (grid, np.array([0.2, 0.4, 0.5, 0.3])))
        series = run_closed_loop(rigid_plant, None, Scenario("quiet", "none", 1.0))
        metrics = closed_loop.compute_metrics(rigid_plant, _gain(5.0), {
            "link_vel": series.link_vel, "reference_vel": series.reference_vel,
            "link_pos": series.link_pos, "reference_pos": series.reference_pos,
        }, TS)
        assert metrics.sensitivity_peak == 0.5

class TestCertifiedScenarios:
    @pytest.mark.slow
    def test_certified_controllers_stay_bounded(self):
        rng = np.random.default_rng(2024)
        grid = FrequencyGrid.logspace_hz(0.01, 500.0, 3000, TS)
        disturbances = [Scenario.standard(name, 30.0) for name in ("step", "chirp", "impact")]
        assert disturbances[2].impact_width == pytest.approx(0.002)
        certified = 0
        for _ in range(400):
            if certified >= 50:
                break
            bank = random_bank(rng, n_configs=2)
            qd = int(rng.integers(1, 4))
            candidate = random_controller(rng, int(rng.integers(0, qd + 1)), qd)
            params = ControllerParams(candidate.h * rng.uniform(0.5, 20.0), candidate.t)
            try:
                passed = certify(bank_dataset(bank, grid), params).passed
            except WindingError:
                continue
            if not passed:
                continue
            certified += 1
            for plant in bank.plants:
                for scenario in disturbances:
                    run = run_closed_loop(plant, params, scenario)
                    assert not run.diverged, (certified, scenario.name, run.event)
                    assert np.all(np.isfinite(run.link_vel))
        assert certified >= 50



class TestMeasuredSensitivity:
    def test_zero_controller(self):
        plant = RigidPlant(0.3, 3.0, TS)
        grid = FrequencyGrid.from_hz([1.0, 5.0, 20.0], TS)
        _, measured = measure_sensitivity(plant, None, grid, period_length=2048, periods=2)
        npt.assert_array_equal(measured, 1.0)

    def test_matches_analytic(self):
        plant = RigidPlant(0.3, 3.0, TS)
        grid = FrequencyGrid.from_hz([1.0, 5.0, 20.0, 100.0], TS)
        controller = _gain(5.0)
        lines, measured = measure_sensitivity(plant, controller, grid, period_length=2048, periods=2)
        s, _ = sensitivities(plant_frf(plant, lines), controller.h, controller.t, lines.omega)
        npt.assert_allclose(measured, s, rtol=1e-3)


class TestSpectrum:
    def test_sinusoid_at_band_center(self):
        time = np.arange(20000) * TS
        series = np.sin(2 * math.pi * 5.0 * time)
        bands = power_spectrum(series, TS, [3.0, 7.0])
        assert bands[0] == pytest.approx(0.5, rel=0.01)

    def test_zero_series(self):
        npt.assert_array_equal(power_spectrum(np.zeros(5000), TS, [1.0, 10.0, 100.0]), 0.0)

    def test_white_noise_parseval(self, rng):
        series = rng.normal(size=20000)
        total = power_spectrum(series, TS, [0.0, 50.0, 600.0]).sum()
        assert total == pytest.approx(np.var(series), rel=0.05)

    def test_short_record(self):
        with pytest.raises(ShortRecordError):
            power_spectrum(np.ones(1000), TS, [0.1, 1.0])

    def test_edges_must_increase(self):
        with pytest.raises(ValueError):
            power_spectrum(np.ones(1000), TS, [10.0, 1.0])

    def test_labelled_map(self):
        power = band_power_map(np.zeros(5000), TS, [1.0, 10.0])
        assert list(power) == band_labels([1.0, 10.0])


class TestBaseline:
    def test_zero_cutoff_disables(self, joint2_bank):
        params = baseline_model_dob(joint2_bank, 0.0)
        npt.assert_array_equal(params.h, 0.0)

    def test_vanishing_cutoff(self, joint2_bank):
        params = baseline_model_dob(joint2_bank, 1e-3)
        assert np.max(np.abs(params.h)) < 1e-6
        assert np.max(np.abs(params.t)) == pytest.approx(1.0)

    def test_identity_replay(self, joint2_bank, design_grid):
        params = baseline_model_dob(joint2_bank, 2.0)
        q_num, q_den, gn_num, gn_den = baseline_filters(joint2_bank, 2.0)
        omega = design_grid.omega
        q = eval_rational(q_num, q_den, omega)
        gn = eval_rational(gn_num, gn_den, omega)
        npt.assert_allclose(eval_rational(params.h, params.t, omega), q / (gn * (1.0 - q)), rtol=1e-6)

    def test_orders(self, joint2_bank):
        params = baseline_model_dob(joint2_bank, 2.0)
        assert (params.qn, params.qd) == (3, 3)
