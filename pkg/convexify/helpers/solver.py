"""
Contrato del solver cónico: recibe un ConicProgram y devuelve estado, valores primales
y residuos. Los bloques 2×2 se reducen a conos de segundo orden
‖(2Re b, 2Im b, a − c)‖ ≤ a + c  ⟺  [[a, b], [b*, c]] ⪰ 0,
o, con backend="psd", a una restricción PSD real 4×4 equivalente.
"""
import logging
from typing import Optional, Tuple

import cvxpy as cp
import numpy as np

from config import Config
from convexify.models.conic_program import (
    INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL, Candidate, ConicProgram, SolveReport,
)
from synth_core.models.controller import ControllerParams

logger = logging.getLogger(__name__)

BACKENDS = ("soc", "psd")

# Representación real [[Re H, −Im H], [Im H, Re H]] de H = [[a, b], [b*, c]]
_EMBED_A = np.diag([1.0, 0.0, 1.0, 0.0])
_EMBED_C = np.diag([0.0, 1.0, 0.0, 1.0])
_EMBED_RE = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)
_EMBED_IM = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)


def _block_matrices(program: ConicProgram):
    blocks = program.blocks
    a_coef = np.vstack([block.a.coef for block in blocks])
    a_const = np.array([block.a.const for block in blocks])
    b_coef = np.vstack([block.b.coef for block in blocks]).astype(complex)
    b_const = np.array([complex(block.b.const) for block in blocks])
    c_coef = np.vstack([block.c.coef for block in blocks])
    c_const = np.array([block.c.const for block in blocks])
    return a_coef, a_const, b_coef, b_const, c_coef, c_const


def _constraints(program: ConicProgram, x: cp.Variable, backend: str):
    a_coef, a_const, b_coef, b_const, c_coef, c_const = _block_matrices(program)
    a = a_coef @ x + a_const
    c = c_coef @ x + c_const
    b_re = b_coef.real @ x + b_const.real
    b_im = b_coef.imag @ x + b_const.imag

    constraints = []
    if backend == "soc":
        constraints.append(cp.SOC(a + c, cp.vstack([2.0 * b_re, 2.0 * b_im, a - c]), axis=0))
    else:
        for i in range(len(program.blocks)):
            embedded = (a[i] * _EMBED_A + c[i] * _EMBED_C + b_re[i] * _EMBED_RE + b_im[i] * _EMBED_IM)
            constraints.append(embedded >> 0)

    if program.linear:
        l_coef = np.vstack([constraint.expr.coef for constraint in program.linear])
        l_const = np.array([constraint.expr.const for constraint in program.linear])
        constraints.append(l_coef @ x + l_const >= 0)
    return constraints


def _solver_name(solver: Optional[str]) -> Optional[str]:
    name = (solver or Config.SOLVER or "").upper()
    if name and name not in cp.installed_solvers():
        logger.warning(f"Solver {name} no instalado; se usa el solver por defecto de cvxpy")
        return None
    return name or None


def _project_aux(g: float, ratio: float) -> float:
    """Lleva g al borde factible de [[2 − g, r], [r, 1]] ⪰ 0, es decir 0 ≤ g ≤ 2 − r²."""
    return float(min(max(g, 0.0), max(2.0 - ratio ** 2, 0.0)))


def solve(
program: ConicProgram, backend: str = "soc",
          solver: Optional[str] = None) -> Tuple[SolveReport, Optional[Candidate]]:
    """
    Resuelve el programa. Nunca lanza por problemas del solver: los devuelve en el informe.

    Args:
        program (ConicProgram): Programa ensamblado
        backend (str): "soc" (conos de segundo orden) o "psd" (bloques semidefinidos)
        solver (str, optional): Nombre del solver de cvxpy; por defecto Config.SOLVER

    Returns:
        Tuple[SolveReport, Optional[Candidate]]: Informe y candidato (None si no hay solución)
    """
    if backend not in BACKENDS:
        raise ValueError(f"Backend desconocido: {backend}")

    layout = program.layout
    x = cp.Variable(layout.size)
    problem = cp.Problem(cp.Maximize(program.objective @ x), _constraints(program, x, backend))
    solver_name = _solver_name(solver)

    try:
        problem.solve(solver=solver_name)
    except (cp.error.SolverError, ValueError, ArithmeticError) as e:
        logger.error(f"Fallo numérico del solver: {e}")
        return SolveReport(NUMERICAL_FAILURE, solver=str(solver_name), message=str(e)), None

    stats = problem.solver_stats
    used = getattr(stats, "solver_name", None) or str(solver_name)
    iterations = int(getattr(stats, "num_iters", 0) or 0)

    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        logger.info(f"Programa infactible ({problem.status})")
        return SolveReport(INFEASIBLE, iterations=iterations, solver=used, message=problem.status), None
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or x.value is None:
        logger.error(f"Estado del solver no utilizable: {problem.status}")
        return SolveReport(NUMERICAL_FAILURE, iterations=iterations, solver=used,
                           message=str(problem.status)), None
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning("Solución óptima inexacta; se revisan los residuos")

    values = np.asarray(x.value, dtype=float)
    residuals = program.residuals(values)
    lin = program.lin
    zeta = float(values[layout.zeta])
    m_var = float(values[layout.m])
    # γ₁ ≤ ζ⁻² y γ₂ ≤ M⁻² se cumplen exactamente tras la proyección
    g1 = _project_aux(float(values[layout.g1]), zeta / lin.zeta_c)
    g2 = _project_aux(float(values[layout.g2]), m_var / lin.m_c)
    candidate = Candidate(
        params=ControllerParams(values[layout.h], values[layout.t]),
        zeta=zeta,
        m_var=m_var,
        gamma1=g1 / lin.zeta_c ** 2,
        gamma2=g2 / lin.m_c ** 2,
    )
    report = SolveReport(OPTIMAL, float(program.objective @ values), iterations, residuals, used,
                         str(problem.status))
    logger.debug(f"Solve {used}: objetivo {report.objective:.6g}, residuo máx {report.max_residual:.2e}")
    return report, candidate
