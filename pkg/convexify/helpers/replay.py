"""
Verificación a posteriori de las restricciones originales (no convexas) sobre una rejilla:
|W₁S| ≤ 1, |W₂S| ≤ 1 y |W₃T| ≤ 1 en cada frecuencia y configuración.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from convexify.helpers.blocks import linearized_p
from convexify.models.conic_program import LinearizationPoint
from frf.models.frf_dataset import FrequencyGrid, FrfDataset
from synth_core.helpers.sensitivity import closed_loop_denominator, sensitivities
from synth_core.helpers.weights import weight_w1, weight_w2, weight_w3
from synth_core.models.controller import ControllerParams, WeightSpec

logger = logging.getLogger(__name__)

REPLAY_TOL = 1e-6


@dataclass(frozen=True)
class ReplayReport:
    """Máximos de |W₁S|, |W₂S|, |W₃T| por configuración y brecha de la aproximación interna."""

    w1s: Dict[str, float]
    w2s: Dict[str, float]
    w3t: Dict[str, float]
    inner_gap: Optional[float] = None
    n_points: int = 0
    tol: float = REPLAY_TOL
    worst: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_w1s(self) -> float:
        return max(self.w1s.values())

    @property
    def max_w2s(self) -> float:
        return max(self.w2s.values())

    @property
    def max_w3t(self) -> float:
        return max(self.w3t.values())

    @property
    def passed(self) -> bool:
        bound = 1.0 + self.tol
        gap_ok = self.inner_gap is None or self.inner_gap <= self.tol
        return self.max_w1s <= bound and self.max_w2s <= bound and self.max_w3t <= bound and gap_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w1s": self.w1s, "w2s": self.w2s, "w3t": self.w3t,
            "max_w1s": self.max_w1s, "max_w2s": self.max_w2s, "max_w3t": self.max_w3t,
            "inner_gap": self.inner_gap, "n_points": self.n_points, "passed": self.passed,
            "worst": self.worst,
        }


def refine_grid(grid: FrequencyGrid, factor: int = 4) -> FrequencyGrid:
    """Rejilla refinada para repetir la verificación entre los puntos de diseño."""
    return grid.refine(factor)


def inner_gap(dataset: FrfDataset, params: ControllerParams, lin: LinearizationPoint) -> float:
    """max (Φ − |P|²)/|P_c|² sobre la rejilla; nunca positivo salvo error de redondeo."""
    worst = -np.inf
    omega = dataset.grid.omega
    for config in dataset.configurations:
        p = closed_loop_denominator(config.response, params.h, params.t, omega)
        p_c = np.array([linearized_p(complex(G), lin, float(w)) for G, w in zip(config.response, omega)])
        phi = 2.0 * np.real(np.conj(p_c) * p) - np.abs(p_c) ** 2
        worst = max(worst, float(np.max((phi - np.abs(p) ** 2) / np.abs(p_c) ** 2)))
    return worst


def replay_constraints(dataset: FrfDataset, params: ControllerParams, zeta: float, m_var: float,
                       spec: WeightSpec, lin: Optional[LinearizationPoint] = None,
                       tol: float = REPLAY_TOL) -> ReplayReport:
    """
    Evalúa las restricciones originales con el controlador realizado.

    Args:
        dataset (FrfDataset): FRFs (la rejilla de diseño o una refinada)
        params (ControllerParams): Controlador
        zeta (float): ζ realizado (rad/s)
        m_var (float): M realizado
        spec (WeightSpec): Pesos
        lin (LinearizationPoint, optional): Si se indica, se verifica también Φ ≤ |P|²
        tol (float): Tolerancia sobre la cota 1

    Returns:
        ReplayReport: Máximos por configuración
    """
    grid = dataset.grid
    w1, w2, w3 = {}, {}, {}
    worst = {"value": -np.inf}
    for config in dataset.configurations:
        s, t = sensitivities(config.response, params.h, params.t, grid.omega)
        values = {
            "w1s": weight_w1(spec) * np.abs(s),
            "w2s": np.abs(weight_w2(zeta, grid.omega, grid.ts) * s),
            "w3t": np.abs(weight_w3(m_var, grid.omega, spec, grid.ts) * t),
        }
        w1[config.label] = float(np.max(values["w1s"]))
        w2[config.label] = float(np.max(values["w2s"]))
        w3[config.label] = float(np.max(values["w3t"]))
        for name, series in values.items():
            index = int(np.argmax(series))
            if series[index] > worst["value"]:
                worst = {"value": float(series[index]), "constraint": name, "config": config.label,
                         "hz": float(grid.hz[index])}

    gap = inner_gap(dataset, params, lin) if lin is not None else None
    report = ReplayReport(w1, w2, w3, gap, len(grid) * len(dataset), tol, worst)
    if not report.passed:
        logger.warning(f"Verificación de restricciones originales fallida: {worst}")
    return report
