"""
Certificado a posteriori de estabilidad en lazo cerrado.

Comprobaciones por configuración:
  - cadena de linealizaciones: 2Re(D_k*·D_{k+1}) > 0 y 2Re(P_k*·P_{k+1}) > 0 en toda la rejilla,
    de modo que wno(D) = wno(D_c) y wno(P) = wno(P_c);
  - Nyquist directo: wno(1 + L) = 0 (planta estable en lazo abierto y K estable);
  - raíces de D dentro del círculo unidad, a más de 1e-6 de él, y órdenes fijos.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from convexify.models.conic_program import LinearizationPoint
from frf.models.frf_dataset import FrfDataset
from stability.utils.winding import MAX_PHASE_STEP, winding_number
from synth_core.helpers.polynomials import eval_poly
from synth_core.helpers.sensitivity import closed_loop_denominator
from synth_core.models.controller import ControllerParams

logger = logging.getLogger(__name__)

UNIT_CIRCLE_MARGIN = 1e-6


@dataclass(frozen=True)
class StabilityCertificate:
    """
    Resultado de la certificación.

    Attributes:
        passed (bool): Todas las comprobaciones correctas en todas las configuraciones
        configs (Dict[str, Dict[str, Any]]): wno de P y de 1+L y mínimos de positividad por configuración
        controller (Dict[str, Any]): Radio máximo de las raíces de D y órdenes
        failures (List[Dict[str, Any]]): Comprobaciones fallidas con su ubicación (ω, configuración)
    """

    passed: bool
    configs: Dict[str, Dict[str, Any]]
    controller: Dict[str, Any]
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "configs": self.configs,
            "controller": self.controller,
            "failures": self.failures,
        }


def positivity_scan(reference, candidate) -> Tuple[float, int]:
    """
    Mínimo de 2Re(reference*·candidate)/(|reference|·|candidate|) y su índice.
    Positivo en todos los puntos ⟹ igual número de vueltas.
    """
    reference = np.asarray(reference, dtype=complex)
    candidate = np.asarray(candidate, dtype=complex)
    values = 2.0 * np.real(np.conj(reference) * candidate) / (np.abs(reference) * np.abs(candidate))
    index = int(np.argmin(values))
    return float(values[index]), index


def _controller_checks(params: ControllerParams, history: Sequence[LinearizationPoint]) -> Dict[str, Any]:
    roots = np.roots(params.t[::-1]) if params.qd > 0 else np.array([])
    max_radius = float(np.max(np.abs(roots))) if roots.size else 0.0
    orders_fixed = all(lin.hc.size == params.h.size and lin.tc.size == params.t.size for lin in history)
    return {
        "qn": params.qn,
        "qd": params.qd,
        "max_root_radius": max_radius,
        "stable": bool(max_radius < 1.0 - UNIT_CIRCLE_MARGIN),
        "leading_coefficient": float(params.t[-1]),
        "orders_fixed": orders_fixed,
    }


def certify(dataset: FrfDataset, params: ControllerParams,
            lin_history: Optional[Sequence[LinearizationPoint]] = None,
            max_step: float = MAX_PHASE_STEP) -> StabilityCertificate:
    """
    Certifica la estabilidad del lazo cerrado de cada configuración.

    Args:
        dataset (FrfDataset): FRFs (planta estable en lazo abierto)
        params (ControllerParams): Controlador a certificar
        lin_history (Sequence[LinearizationPoint], optional): Puntos de linealización de la síntesis
        max_step (float): Incremento de fase máximo admitido en el conteo de vueltas

    Returns:
        StabilityCertificate: Veredicto con la ubicación de los fallos

    Raises:
        WindingError: Si una curva pasa por el origen o la rejilla es demasiado gruesa
    """
    grid = dataset.grid
    history = list(lin_history or [])
    failures: List[Dict[str, Any]] = []

    controller = _controller_checks(params, history)
    if not controller["stable"]:
        failures.append({"check": "controller_roots", "config": None, "hz": None,
                         "value": controller["max_root_radius"]})
    if not controller["orders_fixed"]:
        failures.append({"check": "orders", "config": None, "hz": None, "value": None})

    d_final = eval_poly(params.t, grid.omega)
    chain = [(lin.hc, lin.tc) for lin in history] + [(params.h, params.t)]
    d_chain = [eval_poly(t, grid.omega) for _, t in chain]
    min_guard_d = np.inf
    for previous, following in zip(d_chain[:-1], d_chain[1:]):
        value, index = positivity_scan(previous, following)
        min_guard_d = min(min_guard_d, value)
        if value <= 0:
            failures.append({"check": "denominator_chain", "config": None,
                             "hz": float(grid.hz[index]), "value": value})
            break

    configs: Dict[str, Dict[str, Any]] = {}
    for config in dataset.configurations:
        p_chain = [closed_loop_denominator(config.response, h, t, grid.omega) for h, t in chain]
        min_guard_p = np.inf
        for previous, following in zip(p_chain[:-1], p_chain[1:]):
            value, index = positivity_scan(previous, following)
            min_guard_p = min(min_guard_p, value)
            if value <= 0:
                failures.append({"check": "closed_loop_chain", "config": config.label,
                                 "hz": float(grid.hz[index]), "value": value})
                break

        return_difference = p_chain[-1] / d_final
        wno_l = winding_number(return_difference, max_step=max_step)
        wno_p = winding_number(p_chain[-1], max_step=max_step)
        if wno_l != 0:
            failures.append({"check": "nyquist", "config": config.label, "hz": None, "value": wno_l})
        configs[config.label] = {
            "wno_p": wno_p,
            "wno_return_difference": wno_l,
            "min_guard_p": None if not np.isfinite(min_guard_p) else float(min_guard_p),
            "min_guard_d": None if not np.isfinite(min_guard_d) else float(min_guard_d),
            "min_return_difference": float(np.min(np.abs(return_difference))),
        }

    passed = not failures
    if passed:
        logger.info(f"Certificado de estabilidad correcto en {len(dataset)} configuraciones")
    else:
        logger.warning(f"Certificado de estabilidad fallido: {failures}")
    return StabilityCertificate(passed, configs, controller, failures)
