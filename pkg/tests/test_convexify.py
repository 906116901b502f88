import json
import math
from dataclasses import replace

import numpy as np
import numpy.testing as npt
import pytest

import convexify.helpers.scp as scp
from conftest import random_bank, random_controller
from convexify.helpers.assembly import assemble
from convexify.helpers.blocks import (
    comp_sensitivity_blocks, linearized_p, m_aux_block, margin_block, phi_affine,
    sensitivity_blocks, winding_guards, zeta_aux_block,
)
from convexify.helpers.replay import inner_gap, refine_grid, replay_constraints
from convexify.helpers.scp import initial_linearization, synthesize
from convexify.helpers.solver import _project_aux, solve
from convexify.models.conic_program import (
    INFEASIBLE, AffineExpr, LinearConstraint, LinearizationPoint, SolveReport, SynthesisOptions,
    SynthesisResult, VariableLayout,
)
from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset
from plant_lab.helpers.frequency_response import bank_dataset, plant_frf
from plant_lab.models.plants import RigidPlant
from synth_core.helpers.polynomials import eval_poly
from synth_core.models.controller import ControllerParams, WeightSpec
from utils.errors import InfeasibleProgramError

TS = 0.001
ORDERS = (3, 3)


def _zero_lin(zeta_c=1.0, m_c=1.0, orders=ORDERS):
    zero = ControllerParams.zero(*orders)
    return LinearizationPoint(zero.h, zero.t, zeta_c, m_c)


def _small_dataset(rigid_plant, *labels):
    grid = FrequencyGrid([0.01, 0.1, 1.0], TS)
    response = plant_frf(rigid_plant, grid)
    return FrfDataset(grid, [FrfConfiguration(label, response * (i + 1))
                             for i, label in enumerate(labels or ("rigid",))])


def _random_lin(rng):
    params = random_controller(rng)
    return LinearizationPoint(params.h, params.t, 5.0, 0.5)


class TestPhi:
    def test_fixed_point(self, rng):
        layout = VariableLayout(*ORDERS)
        lin = _random_lin(rng)
        G, omega = 0.4 - 1.2j, 0.3
        x = layout.pack(lin.hc, lin.tc)
        p_c = linearized_p(G, lin, omega)
        assert phi_affine(G, layout, lin, omega).evaluate(x) == pytest.approx(abs(p_c) ** 2, rel=1e-12)

    def test_zero_point(self, rng):
        layout = VariableLayout(*ORDERS)
        lin = _random_lin(rng)
        G, omega = 0.4 - 1.2j, 0.3
        p_c = linearized_p(G, lin, omega)
        x = layout.pack(np.zeros(4), np.zeros(4))
        assert phi_affine(G, layout, lin, omega).evaluate(x) == pytest.approx(-abs(p_c) ** 2, rel=1e-12)

    def test_inner_approximation(self, rng):
        layout = VariableLayout(*ORDERS)
        lin = _random_lin(rng)
        for _ in range(50):
            G = complex(rng.normal(), rng.normal())
            omega = rng.uniform(0.01, math.pi)
            h, t = rng.normal(size=4), rng.normal(size=4)
            p = eval_poly(t, omega) + G * eval_poly(h, omega)
            phi = phi_affine(G, layout, lin, omega).evaluate(layout.pack(h, t))
            assert phi <= abs(p) ** 2 * (1 + 1e-12) + 1e-12


class TestBlocks:
    def test_margin_feasible_at_fixed_point(self):
        layout = VariableLayout(*ORDERS)
        lin = _zero_lin()
        block = margin_block(0.5 - 0.5j, layout, lin, 0.5, 0.2)
        assert block.min_eigenvalue(layout.pack(lin.hc, lin.tc)) == pytest.approx(0.5)

    def test_margin_without_sigma_is_phi(self, rng):
        layout = VariableLayout(*ORDERS)
        lin = _random_lin(rng)
        G, omega = 0.3 + 0.1j, 0.8
        block = margin_block(G, layout, lin, 0.0, omega)
        x = layout.pack(rng.normal(size=4), rng.normal(size=4))
        phi = phi_affine(G, layout, lin, omega).evaluate(x)
        assert block.b.evaluate(x) == 0
        assert (block.min_eigenvalue(x) >= 0) == (phi >= 0)

    def test_zeta_aux_boundary(self):
        layout = VariableLayout(*ORDERS)
        lin = _zero_lin(zeta_c=3.0)
        x = layout.pack(lin.hc, lin.tc, zeta=3.0, g1=1.0)
        assert zeta_aux_block(layout, lin).min_eigenvalue(x) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("g1", [1e-9, 0.1, 1.0])
    def test_zeta_trust_region(self, g1):
        layout = VariableLayout(*ORDERS)
        lin = _zero_lin(zeta_c=3.0)
        x = layout.pack(lin.hc, lin.tc, zeta=1.5 * 3.0, g1=g1)
        assert zeta_aux_block(layout, lin).min_eigenvalue(x) < 0

    def test_m_aux_boundary(self):
        layout = VariableLayout(*ORDERS)
        lin = _zero_lin(m_c=0.25)
        x = layout.pack(lin.hc, lin.tc, m_var=0.25, g2=1.0)
        assert m_aux_block(layout, lin).min_eigenvalue(x) == pytest.approx(0.0, abs=1e-12)

    def test_comp_sensitivity_without_numerator(self):
        layout = VariableLayout(*ORDERS)
        lin = _zero_lin()
        block, aux = comp_sensitivity_blocks(1 - 1j, layout, lin, WeightSpec(), 0.3, TS)
        x = layout.pack(np.zeros(4), lin.tc, m_var=0.5, g2=0.1)
        assert block.b.evaluate(x) == 0
        assert aux.kind == "aux_m"

    def test_sensitivity_block_bounds_w2s(self):
        layout = VariableLayout(*ORDERS)
        lin = _zero_lin(zeta_c=2.0)
        omega = 0.01
        block, _ = sensitivity_blocks(1.0 + 0j, layout, lin, omega, TS)
        # S = 1 con el controlador nulo: |W₂S| = ζ/ω_phys ≤ 1 exige g₁ ≥ (ζ_c/ω_phys)²
        needed = (2.0 / (omega / TS)) ** 2
        x_ok = layout.pack(lin.hc, lin.tc, g1=needed * 1.01)
        x_bad = layout.pack(lin.hc, lin.tc, g1=needed * 0.99)
        assert block.min_eigenvalue(x_ok) >= 0
        assert block.min_eigenvalue(x_bad) < 0

    def test_winding_guards(self, rng):
        layout = VariableLayout(*ORDERS)
        lin = _random_lin(rng)
        guard_p, guard_d = winding_guards(0.2 + 0.7j, layout, lin, 0.4)
        same = layout.pack(lin.hc, lin.tc)
        flipped = layout.pack(-lin.hc, -lin.tc)
        assert guard_p.expr.evaluate(same) == pytest.approx(2.0 - 1e-9)
        assert guard_d.expr.evaluate(same) == pytest.approx(2.0 - 1e-9)
        assert guard_p.residual(flipped) > 0
        assert guard_d.residual(flipped) > 0


class TestAssembly:
    def test_counts_single_config(self, rigid_plant):
        program = assemble(_small_dataset(rigid_plant), WeightSpec(), _zero_lin(), ORDERS)
        assert program.count("margin") == 3
        assert program.count("sensitivity") == 3
        assert program.count("comp_sensitivity") == 3
        assert program.count("aux_zeta") + program.count("aux_m") == 2
        assert program.count("winding_p") + program.count("winding_d") == 6
        assert program.count("bounds") == 6
        assert program.layout.size == 4 + 4 + 4

    def test_counts_two_configs(self, rigid_plant):
        program = assemble(_small_dataset(rigid_plant, "a", "b"), WeightSpec(), _zero_lin(), ORDERS)
        assert program.count("margin") == 6
        assert program.count("aux_zeta") + program.count("aux_m") == 2
        assert program.count("winding_p") + program.count("winding_d") == 12

    def test_order_mismatch(self, rigid_plant):
        with pytest.raises(ValueError):
            assemble(_small_dataset(rigid_plant), WeightSpec(), _zero_lin(orders=(2, 3)), ORDERS)

    def test_blocks_located(self, rigid_plant):
        program = assemble(_small_dataset(rigid_plant), WeightSpec(), _zero_lin(), ORDERS)
        margins = [block for block in program.blocks if block.kind == "margin"]
        assert [block.omega_index for block in margins] == [0, 1, 2]
        assert {block.config for block in margins} == {"rigid"}

    def test_initial_point_is_feasible(self, rigid_plant):
        dataset = _small_dataset(rigid_plant)
        lin = initial_linearization(dataset.grid, ORDERS)
        program = assemble(dataset, WeightSpec(), lin, ORDERS)
        x0 = program.layout.pack(lin.hc, lin.tc, lin.zeta_c, lin.m_c, 1.0, 1.0)
        assert program.violated(x0, tol=1e-9) == []

    def test_dump(self, rigid_plant, tmp_path):
        program = assemble(_small_dataset(rigid_plant), WeightSpec(), _zero_lin(), ORDERS)
        path = program.dump(str(tmp_path / "program.json"))
        with open(path, encoding="utf-8") as file:
            payload = json.load(file)
        assert len(payload["blocks"]) == 11
        assert len(payload["linear"]) == 12


class TestSolver:
    def _program(self, rigid_plant):
        dataset = _small_dataset(rigid_plant)
        spec = WeightSpec(sigma=0.01, tau=1e-4)
        return assemble(dataset, spec, initial_linearization(dataset.grid, ORDERS), ORDERS)

    def test_feasible_program(self, rigid_plant):
        report, candidate = solve(self._program(rigid_plant))
        assert report.ok
        assert report.max_residual <= 1e-6
        assert candidate.zeta > 0
        assert 0 < candidate.m_var <= 1 + 1e-9

    def test_contradictory_bounds(self, rigid_plant):
        program = self._program(rigid_plant)
        layout = program.layout
        forced = LinearConstraint("bounds", AffineExpr(layout.unit(layout.m), -2.0))
        report, candidate = solve(replace(program, linear=program.linear + (forced,)))
        assert report.status == INFEASIBLE
        assert candidate is None

    def test_deterministic(self, rigid_plant):
        program = self._program(rigid_plant)
        first, a = solve(program)
        second, b = solve(program)
        assert first.objective == second.objective
        npt.assert_array_equal(a.params.h, b.params.h)

    def test_psd_backend_agrees(self, rigid_plant):
        program = self._program(rigid_plant)
        soc, _ = solve(program, backend="soc")
        psd, _ = solve(program, backend="psd")
        assert psd.ok
        assert psd.objective == pytest.approx(soc.objective, rel=1e-5)

    def test_unknown_backend(self, rigid_plant):
        with pytest.raises(ValueError):
            solve(self._program(rigid_plant), backend="lp")

    def test_auxiliary_variables_consistent(self, rigid_plant):
        report, candidate = solve(self._program(rigid_plant))
        assert report.ok
        assert candidate.gamma1 <= candidate.zeta ** -2 + 1e-9
        assert candidate.gamma2 <= candidate.m_var ** -2 + 1e-9

    @pytest.mark.parametrize("g, ratio, expected", [(1.5, 1.0, 1.0), (-1e-12, 0.5, 0.0), (0.3, 0.5, 0.3),
                                                   (0.1, 1.5, 0.0)])
    def test_aux_projection(self, g, ratio, expected):
        assert _project_aux(g, ratio) == pytest.approx(expected)

    def test_alpha_zero_decouples_m(self, rigid_plant):
        dataset = _small_dataset(rigid_plant)
        spec = WeightSpec(sigma=0.01, tau=1e-4, alpha=0.0)
        program = assemble(dataset, spec, initial_linearization(dataset.grid, ORDERS), ORDERS)
        free_report, free = solve(program)
        assert free_report.ok
        assert free_report.objective == pytest.approx(free.zeta, rel=1e-9)

        # Con α = 0, M solo aparece en el bloque auxiliar: fijarlo abajo no cambia ζ
        layout = program.layout
        cap = min(0.01, free.m_var)
        forced = LinearConstraint("bounds", AffineExpr(-layout.unit(layout.m), cap))
        capped_report, capped = solve(replace(program, linear=program.linear + (forced,)))
        assert capped_report.ok
        assert capped.m_var <= cap * (1 + 1e-6)
        assert capped.zeta == pytest.approx(free.zeta, rel=1e-5)


class TestReplay:
    def test_zero_controller(self, rigid_dataset):
        spec = WeightSpec(sigma=0.5)
        params = ControllerParams.zero(*ORDERS)
        zeta = 0.5 * rigid_dataset.grid.omega_phys[0]
        report = replay_constraints(rigid_dataset, params, zeta, 0.5, spec)
        assert report.max_w1s == pytest.approx(0.5)
        assert report.max_w2s == pytest.approx(0.5)
        assert report.max_w3t == 0.0
        assert report.passed

    def test_detects_violation(self, rigid_dataset):
        params = ControllerParams.zero(*ORDERS)
        zeta = 10.0 * rigid_dataset.grid.omega_phys[0]
        report = replay_constraints(rigid_dataset, params, zeta, 0.5, WeightSpec())
        assert not report.passed
        assert report.worst["constraint"] == "w2s"

    def test_inner_gap_never_positive(self, rigid_dataset, rng):
        lin = _random_lin(rng)
        for _ in range(5):
            params = random_controller(rng)
            assert inner_gap(rigid_dataset, params, lin) <= 1e-9

    def test_refine_grid(self, design_grid):
        assert len(refine_grid(design_grid, 4)) == 4 * (len(design_grid) - 1) + 1


class TestSynthesize:
    def test_initial_linearization(self):
        grid = FrequencyGrid([0.01, 0.1, 1.0], TS)
        lin = initial_linearization(grid, ORDERS, zeta_init_hz=0.1)
        assert lin.zeta_c == pytest.approx(2 * math.pi * 0.1)
        assert lin.m_c == 1.0
        npt.assert_array_equal(lin.tc, [0, 0, 0, 1])
        capped = initial_linearization(grid, ORDERS, zeta_init_hz=100.0)
        assert capped.zeta_c == pytest.approx(0.9 * grid.omega_phys[0])

    def test_invalid_orders(self, rigid_dataset):
        with pytest.raises(ValueError):
            synthesize(rigid_dataset, WeightSpec(), orders=(4, 3))

    def test_first_iteration_infeasible(self, rigid_dataset, monkeypatch):
        monkeypatch.setattr(scp, "solve", lambda *args, **kwargs: (SolveReport(INFEASIBLE), None))
        with pytest.raises(InfeasibleProgramError) as info:
            synthesize(rigid_dataset, WeightSpec(), orders=ORDERS)
        assert isinstance(info.value.violated_blocks, list)
        assert info.value.exit_code == 3

    def test_failure_keeps_best_iterate(self, rigid_plant, monkeypatch):
        dataset = _small_dataset(rigid_plant)
        calls = []

        def flaky(program, backend="soc", solver=None):
            calls.append(program)
            if len(calls) > 2:
                return SolveReport(INFEASIBLE), None
            return solve(program, backend, solver)

        monkeypatch.setattr(scp, "solve", flaky)
        result = synthesize(dataset, WeightSpec(), orders=ORDERS)
        assert not result.converged
        assert result.status == INFEASIBLE
        assert result.iterations == 2
        assert len(result.lin_history) <= 3

    @pytest.mark.slow
    def test_rigid_bank(self, rigid_dataset):
        result = synthesize(rigid_dataset, WeightSpec(sigma=0.5), orders=ORDERS)
        assert result.converged
        assert result.replay["passed"]
        trace = np.array(result.objective_trace)
        assert np.all(np.diff(trace) >= -1e-6)
        assert result.zeta > initial_linearization(rigid_dataset.grid, ORDERS).zeta_c
        assert np.max(np.abs(result.params.t)) == pytest.approx(1.0)

    @pytest.mark.slow
    def test_joint2_bank(self, joint2_dataset):
        result = synthesize(joint2_dataset, WeightSpec(), orders=(4, 4))
        assert result.replay["passed"]
        for label in joint2_dataset.labels:
            assert result.replay["w1s"][label] <= 1 + 1e-6
            assert result.replay["w2s"][label] <= 1 + 1e-6
            assert result.replay["w3t"][label] <= 1 + 1e-6
        assert result.gamma1 <= result.zeta ** -2 + 1e-9
        assert result.gamma2 <= result.m_var ** -2 + 1e-9

    @pytest.mark.slow
    def test_rigid_bank_matches_bisection(self):
        grid = FrequencyGrid.logspace_hz(1.0, 500.0, 40, TS)
        plants = (RigidPlant(0.3, 0.05, TS), RigidPlant(1.2, 0.05, TS))
        dataset = FrfDataset(grid, [FrfConfiguration(f"J={plant.inertia}", plant_frf(plant, grid))
                                    for plant in plants])
        spec = WeightSpec(sigma=0.5)
        result = synthesize(dataset, spec, orders=ORDERS, options=SynthesisOptions(zeta_init_hz=0.9))
        assert result.converged
        assert result.iterations <= 15

        # ζ máximo que el controlador final admite con su M, por bisección sobre la verificación
        def passes(zeta):
            return replay_constraints(dataset, result.params, zeta, result.m_var, spec).passed

        low, high = 0.5 * result.zeta, 2.0 * result.zeta
        while passes(high):
            low, high = high, 2.0 * high
        for _ in range(60):
            middle = 0.5 * (low + high)
            low, high = (middle, high) if passes(middle) else (low, middle)
        assert result.zeta <= low * (1 + 1e-6)
        assert result.zeta >= 0.95 * low

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_objective_never_decreases(self, seed):
        bank = random_bank(np.random.default_rng(seed))
        dataset = bank_dataset(bank, FrequencyGrid.logspace_hz(0.5, 500.0, 25, TS))
        result = synthesize(dataset, WeightSpec(), orders=(2, 2), options=SynthesisOptions(max_iter=8))
        trace = np.array(result.objective_trace)
        assert trace.size >= 1
        assert np.all(np.diff(trace) >= -1e-6 * np.maximum(np.abs(trace[:-1]), 1.0))

    @pytest.mark.slow
    def test_two_point_grid(self, rigid_plant):
        grid = FrequencyGrid([0.01, 0.1], TS)
        dataset = FrfDataset(grid, [FrfConfiguration("rigid", plant_frf(rigid_plant, grid))])
        result = synthesize(dataset, WeightSpec(), orders=(1, 1))
        assert result.iterations >= 1
        assert result.replay["passed"]

    @pytest.mark.slow
    def test_result_round_trip(self, rigid_dataset):
        result = synthesize(rigid_dataset, WeightSpec(), orders=(2, 2),
                            options=SynthesisOptions(max_iter=3))
        restored = SynthesisResult.from_dict(json.loads(json.dumps(result.to_dict())))
        npt.assert_array_equal(restored.params.t, result.params.t)
        assert restored.objective_trace == result.objective_trace
        assert len(restored.lin_history) == len(result.lin_history)
