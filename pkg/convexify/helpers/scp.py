"""
Programación convexa secuencial: resolver, mover el punto de linealización
(P_c, ζ_c, M_c) a la solución y repetir hasta que el objetivo se estanque.
"""
import math
import logging
from typing import Optional, Tuple

import numpy as np

from convexify.helpers.assembly import assemble
from convexify.helpers.replay import replay_constraints
from convexify.helpers.solver import solve
from convexify.models.conic_program import (
    LinearizationPoint, SynthesisOptions, SynthesisResult,
)
from frf.models.frf_dataset import FrequencyGrid, FrfDataset
from synth_core.models.controller import ControllerParams, WeightSpec
from utils.errors import InfeasibleProgramError

logger = logging.getLogger(__name__)


def initial_linearization(grid: FrequencyGrid, orders: Tuple[int, int],
                          zeta_init_hz: float = 0.1) -> LinearizationPoint:
    """
    Controlador nulo N = 0, D = z^qd, M_c = 1 y ζ_c0 = min(2π·zeta_init_hz, 0.9·ω_phys,min).
    Con este ζ_c0 el punto inicial es factible en el primer subproblema.
    """
    qn, qd = orders
    zero = ControllerParams.zero(qn, qd)
    zeta_c = min(2.0 * math.pi * zeta_init_hz, 0.9 * float(grid.omega_phys[0]))
    return LinearizationPoint(zero.h, zero.t, zeta_c, 1.0)


def synthesize(dataset: FrfDataset, spec: WeightSpec, orders: Tuple[int, int] = (6, 6),
               options: Optional[SynthesisOptions] = None) -> SynthesisResult:
    """
    Sintetiza el DOB a partir de las FRF maximizando ζ + αM.

    Args:
        dataset (FrfDataset): FRFs de todas las configuraciones
        spec (WeightSpec): Pesos de diseño
        orders (Tuple[int, int]): (qn, qd)
        options (SynthesisOptions, optional): Tolerancias, solver y backend

    Returns:
        SynthesisResult: Mejor iterado, con traza del objetivo y verificación

    Raises:
        InfeasibleProgramError: Si la primera iteración no es factible
    """
    options = options or SynthesisOptions()
    qn, qd = orders
    if qn < 0 or qd < qn:
        raise ValueError(f"Órdenes inválidos: qn={qn}, qd={qd}")

    lin = initial_linearization(dataset.grid, orders, options.zeta_init_hz)
    history = [lin]
    trace = []
    best = None
    best_lin = lin
    converged = False
    status = "stalled"
    small_steps = 0
    best_history = 1

    logger.info(
        f"Síntesis: {len(dataset)} configuraciones × {len(dataset.grid)} frecuencias, "
        f"qn={qn}, qd={qd}, σ={spec.sigma}, α={spec.alpha}, ζ_c0={lin.zeta_c:.4g} rad/s"
    )

    for iteration in range(1, options.max_iter + 1):
        program = assemble(dataset, spec, lin, orders)
        report, candidate = solve(program, options.backend, options.solver)

        if not report.ok:
            if iteration == 1:
                x0 = program.layout.pack(lin.hc, lin.tc, lin.zeta_c, lin.m_c, 1.0, 1.0)
                violated = program.violated(x0, tol=1e-9)
                logger.error(f"Primera iteración {report.status}; {len(violated)} bloques violados en el punto inicial")
                raise InfeasibleProgramError(
                    f"El primer subproblema es {report.status}", violated_blocks=violated
                )
            logger.warning(f"Iteración {iteration}: solver {report.status}; se conserva el mejor iterado")
            status = report.status
            break

        params = candidate.params.normalized()
        objective = candidate.zeta + spec.alpha * candidate.m_var
        if trace and objective < trace[-1] - options.monotone_tol:
            logger.warning(f"Iteración {iteration}: el objetivo bajó de {trace[-1]:.8g} a {objective:.8g}")
        logger.info(
            f"Iteración {iteration}: objetivo={objective:.6g}, ζ={candidate.zeta:.5g} rad/s "
            f"({candidate.zeta / (2 * math.pi):.4g} Hz), M={candidate.m_var:.4g}, "
            f"residuo={report.max_residual:.1e}"
        )

        previous = trace[-1] if trace else None
        trace.append(objective)
        is_best = best is None or objective >= best[0].zeta + spec.alpha * best[0].m_var
        if is_best:
            best = (candidate, params, report)
            best_lin = lin

        lin = LinearizationPoint(params.h, params.t, candidate.zeta, min(candidate.m_var, 1.0))
        history.append(lin)
        if is_best:
            best_history = len(history)

        if previous is not None:
            change = abs(objective - previous) / max(abs(previous), 1e-12)
            small_steps = small_steps + 1 if change < options.tol_obj else 0
            if small_steps >= 2:
                converged = True
                status = "converged"
                break

    candidate, params, report = best
    replay = replay_constraints(dataset, params, candidate.zeta, candidate.m_var, spec, best_lin)
    if not converged:
        logger.warning(f"Síntesis sin convergencia tras {len(trace)} iteraciones ({status})")
    logger.info(
        f"Resultado: ζ={candidate.zeta / (2 * math.pi):.4g} Hz, M={candidate.m_var:.4g}, "
        f"verificación {'correcta' if replay.passed else 'fallida'}"
    )

    return SynthesisResult(
        params=params,
        zeta=candidate.zeta,
        m_var=candidate.m_var,
        gamma1=candidate.gamma1,
        gamma2=candidate.gamma2,
        objective_trace=trace,
        converged=converged,
        lin_history=tuple(history[:best_history]),
        residuals=report.residuals,
        replay=replay.to_dict(),
        spec=spec,
        ts=dataset.grid.ts,
        status=status,
    )
