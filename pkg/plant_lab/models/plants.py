"""
Modelos de planta de una articulación flexible (modelo de dos masas de Spong)
y su discretización por retenedor de orden cero (ZOH).

Estado continuo x = [θ, θ̇, q, q̇] (posición/velocidad de motor y de eslabón),
entradas [τ_m, τ_link] y salida medida q̇ (velocidad del lado de carga).
"""
import math
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
from scipy.signal import cont2discrete

from utils.errors import NyquistViolationError

logger = logging.getLogger(__name__)

# Índices de estado de la representación común de 4 estados
MOTOR_POS, MOTOR_VEL, LINK_POS, LINK_VEL = range(4)

StateSpace = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _zoh(model: StateSpace, ts: float) -> StateSpace:
    ad, bd, cd, dd, _ = cont2discrete(model, ts, method="zoh")
    return ad, bd, cd, dd


@dataclass(frozen=True)
class TwoMassPlant:
    """
    Planta de dos masas: inercia de motor B y de eslabón J acopladas por un resorte K.

    Attributes:
        motor_inertia (float): B en kg·m²
        motor_damping (float): D_m en N·m·s/rad
        link_inertia (float): J en kg·m² (congelada en una configuración)
        link_damping (float): d_l en N·m·s/rad
        joint_stiffness (float): K en N·m/rad
        ts (float): Periodo de muestreo en segundos
    """

    motor_inertia: float
    motor_damping: float
    link_inertia: float
    link_damping: float
    joint_stiffness: float
    ts: float

    def __post_init__(self):
        if min(self.motor_inertia, self.link_inertia, self.joint_stiffness, self.ts) <= 0:
            raise ValueError("B, J, K y ts deben ser positivos")
        if min(self.motor_damping, self.link_damping) < 0:
            raise ValueError("Los amortiguamientos deben ser no negativos")

    @property
    def resonance_rad_s(self) -> float:
        b, j, k = self.motor_inertia, self.link_inertia, self.joint_stiffness
        return math.sqrt(k * (b + j) / (b * j))

    @property
    def anti_resonance_rad_s(self) -> float:
        return math.sqrt(self.joint_stiffness / self.link_inertia)

    @property
    def total_inertia(self) -> float:
        return self.motor_inertia + self.link_inertia

    def check_nyquist(self) -> None:
        """
        Raises:
            NyquistViolationError: Si la resonancia no queda por debajo de 1/(2·ts)
        """
        resonance_hz = self.resonance_rad_s / (2.0 * math.pi)
        nyquist_hz = 0.5 / self.ts
        if resonance_hz >= nyquist_hz:
            logger.error(f"Resonancia {resonance_hz:.1f} Hz ≥ Nyquist {nyquist_hz:.1f} Hz")
            raise NyquistViolationError(
                f"La resonancia ({resonance_hz:.1f} Hz) no está por debajo de Nyquist ({nyquist_hz:.1f} Hz)"
            )

    def with_link_inertia(self, link_inertia: float) -> "TwoMassPlant":
        return TwoMassPlant(self.motor_inertia, self.motor_damping, link_inertia,
                            self.link_damping, self.joint_stiffness, self.ts)

    def continuous_model(self) -> StateSpace:
        """(A, B, C, D) continuos; C devuelve los 4 estados."""
        b, dm, j, dl, k = (self.motor_inertia, self.motor_damping, self.link_inertia,
                           self.link_damping, self.joint_stiffness)
        a = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [-k / b, -dm / b, k / b, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [k / j, 0.0, -k / j, -dl / j],
        ])
        bm = np.array([
            [0.0, 0.0],
            [1.0 / b, 0.0],
            [0.0, 0.0],
            [0.0, 1.0 / j],
        ])
        return a, bm, np.eye(4), np.zeros((4, 2))

    def discrete_model(self) -> StateSpace:
        """Discretización ZOH exacta (Ad, Bd, Cd, Dd)."""
        self.check_nyquist()
        return self._discrete

    @cached_property
    def _discrete(self) -> StateSpace:
        return _zoh(self.continuous_model(), self.ts)


@dataclass(frozen=True)
class RigidPlant:
    """
    Planta rígida (límite K → ∞): una sola inercia B + J con amortiguamiento viscoso.
    Comparte la representación de 4 estados (θ = q).
    """

    inertia: float
    damping: float
    ts: float

    def __post_init__(self):
        if self.inertia <= 0 or self.ts <= 0 or self.damping < 0:
            raise ValueError("Inercia y ts positivos, amortiguamiento no negativo")

    @property
    def total_inertia(self) -> float:
        return self.inertia

    @property
    def link_inertia(self) -> float:
        return self.inertia

    def check_nyquist(self) -> None:
        return None

    def continuous_model(self) -> StateSpace:
        m, c = self.inertia, self.damping
        a = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [0.0, -c / m, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, -c / m],
        ])
        bm = np.array([
            [0.0, 0.0],
            [1.0 / m, 1.0 / m],
            [0.0, 0.0],
            [1.0 / m, 1.0 / m],
        ])
        return a, bm, np.eye(4), np.zeros((4, 2))

    def discrete_model(self) -> StateSpace:
        return self._discrete

    @cached_property
    def _discrete(self) -> StateSpace:
        return _zoh(self.continuous_model(), self.ts)


@dataclass(frozen=True)
class PlantBank:
    """
    Conjunto de plantas que comparten B, D_m, K, d_l y ts y difieren en J
    (variación de inercia según la configuración del robot).
    """

    plants: Tuple[TwoMassPlant, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        plants = tuple(self.plants)
        object.__setattr__(self, "plants", plants)
        if len(plants) < 2:
            raise ValueError("El banco necesita al menos 2 plantas")
        first = plants[0]
        for plant in plants[1:]:
            shared = (plant.motor_inertia, plant.motor_damping, plant.joint_stiffness,
                      plant.link_damping, plant.ts)
            if shared != (first.motor_inertia, first.motor_damping, first.joint_stiffness,
                          first.link_damping, first.ts):
                raise ValueError("Las plantas del banco deben compartir B, D_m, K, d_l y ts")
        inertias = np.array([plant.link_inertia for plant in plants])
        degenerate = np.all(inertias == inertias[0])
        if not degenerate and np.any(np.diff(inertias) <= 0):
            raise ValueError("Las inercias J del banco deben ser estrictamente crecientes")

        labels = tuple(self.labels) or tuple(f"J={plant.link_inertia:.4g}" for plant in plants)
        if degenerate and not self.labels:
            labels = tuple(f"{label}#{i + 1}" for i, label in enumerate(labels))
        if len(labels) != len(plants):
            raise ValueError("Debe haber una etiqueta por planta")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.plants)

    def __iter__(self):
        return iter(self.plants)

    @property
    def inertias(self) -> List[float]:
        return [plant.link_inertia for plant in self.plants]

    @property
    def median_inertia(self) -> float:
        """Media geométrica del rango de inercias (el 'J mediano' del diseño)."""
        return math.sqrt(self.inertias[0] * self.inertias[-1])

    def median_plant(self) -> TwoMassPlant:
        return self.plants[0].with_link_inertia(self.median_inertia)

    @classmethod
    def from_inertias(cls, template: TwoMassPlant, inertias: Sequence[float]) -> "PlantBank":
        return cls(tuple(template.with_link_inertia(float(j)) for j in inertias))


@dataclass(frozen=True, eq=False)
class ExcitationSignal:
    """
    Señal multiseno periódica de par.

    Attributes:
        samples (np.ndarray): Par en N·m, longitud periods × period_length
        ts (float): Periodo de muestreo
        periods (int): Número de periodos
        lines (Tuple[int, ...]): Índices de bin excitados
    """

    samples: np.ndarray
    ts: float
    periods: int
    lines: Tuple[int, ...]

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).reshape(-1)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "lines", tuple(int(k) for k in self.lines))
        if self.periods < 1 or samples.size % self.periods != 0:
            raise ValueError("La longitud de la señal debe ser múltiplo del número de periodos")
        if not np.all(np.isfinite(samples)):
            raise ValueError("La señal contiene valores no finitos")

    @property
    def period_length(self) -> int:
        return self.samples.size // self.periods

    @property
    def crest_factor(self) -> float:
        rms = float(np.sqrt(np.mean(self.samples ** 2)))
        return float(np.max(np.abs(self.samples))) / rms if rms > 0 else 0.0
