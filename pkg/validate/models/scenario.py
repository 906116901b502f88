"""
Escenarios de validación en lazo cerrado y métricas resultantes.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

DISTURBANCES = ("none", "step", "chirp", "impact", "inertia_sweep")


@dataclass(frozen=True)
class Scenario:
    """
    Perfil de perturbación, referencia y duración de una simulación.

    Attributes:
        name (str): Nombre del escenario
        disturbance (str): none | step | chirp | impact | inertia_sweep
        duration (float): Duración en segundos
        magnitude (float): Par de perturbación (escalón/chirp) o par nominal (impacto) en N·m
        start (float): Instante de inicio de la perturbación en segundos
        chirp_hz (Tuple[float, float]): Frecuencias inicial y final del chirp
        impact_width (float): Anchura del pulso de impacto en segundos
        impact_gain (float): Múltiplo del par nominal aplicado en el impacto
        inertia_schedule (Tuple[float, float, float], optional): (J inicial, J final, duración del barrido)
        reference_amplitude (float): Amplitud de la referencia senoidal de posición (0 = sin referencia)
        reference_hz (float): Frecuencia de la referencia
        coulomb (float): Fricción de Coulomb suavizada con tanh aplicada en el eslabón (N·m)
    """

    name: str
    disturbance: str = "none"
    duration: float = 30.0
    magnitude: float = 1.0
    start: float = 1.0
    chirp_hz: Tuple[float, float] = (0.1, 20.0)
    impact_width: float = 0.002
    impact_gain: float = 5.0
    inertia_schedule: Optional[Tuple[float, float, float]] = None
    reference_amplitude: float = 0.0
    reference_hz: float = 0.5
    coulomb: float = 0.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"La duración debe ser positiva: {self.duration}")
        if self.disturbance not in DISTURBANCES:
            raise ValueError(f"Perturbación desconocida: {self.disturbance}")
        if self.disturbance == "inertia_sweep" and self.inertia_schedule is None:
            raise ValueError("El barrido de inercia requiere inertia_schedule")
        if self.inertia_schedule is not None:
            j_start, j_end, sweep = self.inertia_schedule
            if min(j_start, j_end) <= 0 or sweep <= 0:
                raise ValueError("Inercias y duración del barrido deben ser positivas")

    @property
    def has_reference(self) -> bool:
        return self.reference_amplitude != 0.0

    def check_bank_range(self, inertias) -> None:
        """Raises ValueError si el barrido se sale del rango de inercias del banco."""
        if self.inertia_schedule is None:
            return
        low, high = min(inertias), max(inertias)
        j_start, j_end, _ = self.inertia_schedule
        for j in (j_start, j_end):
            if not low * (1 - 1e-12) <= j <= high * (1 + 1e-12):
                raise ValueError(f"J={j} fuera del rango del banco [{low}, {high}]")

    def inertia_at(self, time: np.ndarray) -> Optional[np.ndarray]:
        """J(t): interpolación geométrica entre J inicial y final, constante después."""
        if self.inertia_schedule is None:
            return None
        j_start, j_end, sweep = self.inertia_schedule
        progress = np.clip((time - self.start) / sweep, 0.0, 1.0)
        return j_start * (j_end / j_start) ** progress

    @classmethod
    def standard(cls, name: str, duration: float = 30.0, inertias=None) -> "Scenario":
        """
        Escenarios predefinidos: step, chirp, impact e inertia_sweep (de J mínimo a máximo en 5 s).
        """
        if name == "step":
            return cls(name, "step", duration)
        if name == "chirp":
            return cls(name, "chirp", duration, magnitude=0.5)
        if name == "impact":
            return cls(name, "impact", duration)
        if name == "inertia_sweep":
            if inertias is None:
                raise ValueError("inertia_sweep necesita las inercias del banco")
            schedule = (float(min(inertias)), float(max(inertias)), 5.0)
            return cls(name, "inertia_sweep", duration, inertia_schedule=schedule,
                       reference_amplitude=0.5, reference_hz=0.5)
        raise ValueError(f"Escenario desconocido: {name}")


@dataclass(frozen=True)
class MetricsReport:
    """
    Métricas de una simulación.

    Attributes:
        bandwidth_hz (float): Cruce de −3 dB de |S|
        sensitivity_peak (float): max |S| sobre la rejilla densa, sin recortar
        step_overshoot_pct (float): Sobreoscilación de la desviación de velocidad
        rmse (float): RMS del error de posición (rad)
        power_spectrum (Dict[str, float]): Potencia media cuadrática por banda
    """

    bandwidth_hz: float
    sensitivity_peak: float
    step_overshoot_pct: float
    rmse: float
    power_spectrum: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bandwidth_hz": self.bandwidth_hz,
            "sensitivity_peak": self.sensitivity_peak,
            "step_overshoot_pct": self.step_overshoot_pct,
            "rmse": self.rmse,
            "power_spectrum": dict(self.power_spectrum),
        }


@dataclass(frozen=True, eq=False)
class ClosedLoopRun:
    """Trayectorias de una simulación en lazo cerrado, métricas y eventos de inestabilidad."""

    ts: float
    torque: np.ndarray
    disturbance: np.ndarray
    estimate: np.ndarray
    motor_pos: np.ndarray
    motor_vel: np.ndarray
    link_pos: np.ndarray
    link_vel: np.ndarray
    reference_pos: np.ndarray
    reference_vel: np.ndarray
    metrics: MetricsReport
    diverged: bool = False
    event: Optional[Dict[str, Any]] = None

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.torque.size) * self.ts

    @property
    def velocity_deviation(self) -> np.ndarray:
        return self.link_vel - self.reference_vel

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.time,
            "u": self.torque,
            "d": self.disturbance,
            "d_hat": self.estimate,
            "theta": self.motor_pos,
            "theta_dot": self.motor_vel,
            "q": self.link_pos,
            "q_dot": self.link_vel,
        })


def standard_bands(zeta: Optional[float] = None) -> Tuple[float, ...]:
    """Bordes de banda (Hz) por defecto; con ζ, la primera banda acaba en 0.7·ζ/(2π)."""
    if zeta is None:
        return (0.1, 1.0, 3.0, 7.0, 20.0, 100.0)
    upper = max(0.7 * zeta / (2.0 * math.pi), 0.2)
    return (0.1, upper, max(100.0, 2.0 * upper))
