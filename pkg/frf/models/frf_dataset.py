"""
Modelo de datos de respuestas en frecuencia (FRF) de una articulación.
Las frecuencias se guardan normalizadas en rad/muestra: z = e^{jω}.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

import numpy as np

from utils.errors import FrfValidationError

logger = logging.getLogger(__name__)

DEFAULT_CHANNEL = "motor_torque->load_velocity"


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    if array.ndim > 1:
        raise FrfValidationError(f"Se esperaba un vector 1-D y llegó un arreglo de forma {array.shape}")
    array = array.reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """
    Rejilla de frecuencias normalizadas ω ∈ (0, π] y periodo de muestreo.

    Attributes:
        omega (np.ndarray): Frecuencias angulares en rad/muestra, estrictamente crecientes
        ts (float): Periodo de muestreo en segundos
    """

    omega: np.ndarray
    ts: float

    def __post_init__(self):
        omega = _frozen(self.omega, float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "ts", float(self.ts))

        if not math.isfinite(self.ts) or self.ts <= 0:
            raise FrfValidationError(f"Periodo de muestreo inválido: {self.ts}")
        if omega.size < 2:
            raise FrfValidationError("La rejilla necesita al menos 2 frecuencias")
        if not np.all(np.isfinite(omega)):
            raise FrfValidationError("La rejilla contiene frecuencias no finitas")
        if omega[0] <= 0 or omega[-1] > math.pi:
            raise FrfValidationError(
                f"Las frecuencias deben estar en (0, π] rad/muestra: [{omega[0]}, {omega[-1]}]"
            )
        if np.any(np.diff(omega) <= 0):
            raise FrfValidationError("La rejilla no es estrictamente creciente")

    def __len__(self) -> int:
        return self.omega.size

    @property
    def omega_phys(self) -> np.ndarray:
        """Frecuencia física en rad/s."""
        return self.omega / self.ts

    @property
    def hz(self) -> np.ndarray:
        """Frecuencia física en Hz (solo para reportes)."""
        return self.omega / (2.0 * math.pi * self.ts)

    @property
    def z(self) -> np.ndarray:
        return np.exp(1j * self.omega)

    @classmethod
    def from_hz(cls, hz, ts: float) -> "FrequencyGrid":
        return cls(2.0 * math.pi * np.asarray(hz, dtype=float) * ts, ts)

    @classmethod
    def logspace_hz(cls, f_min_hz: float, f_max_hz: float, points: int, ts: float) -> "FrequencyGrid":
        """Rejilla logarítmica entre f_min_hz y f_max_hz (acotada a Nyquist)."""
        f_max_hz = min(f_max_hz, 0.5 / ts)
        return cls.from_hz(np.geomspace(f_min_hz, f_max_hz, points), ts)

    def matches(self, other: "FrequencyGrid", rtol: float = 1e-12) -> bool:
        return (
            math.isclose(self.ts, other.ts, rel_tol=rtol, abs_tol=0.0)
            and self.omega.size == other.omega.size
            and bool(np.all(np.abs(self.omega - other.omega) <= rtol * np.abs(other.omega)))
        )

    def refine(self, factor: int = 4) -> "FrequencyGrid":
        """Inserta factor-1 puntos (espaciado logarítmico) entre cada par de frecuencias."""
        if factor < 1:
            raise ValueError("factor debe ser >= 1")
        log_w = np.log(self.omega)
        fine = [log_w[0]]
        for lo, hi in zip(log_w[:-1], log_w[1:]):
            fine.extend(np.linspace(lo, hi, factor + 1)[1:])
        return FrequencyGrid(np.exp(np.array(fine)), self.ts)


@dataclass(frozen=True)
class ComplexResponsePoint:
    omega: float
    value: complex

    def __post_init__(self):
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise FrfValidationError(f"Valor no finito en ω={self.omega}")


@dataclass(frozen=True, eq=False)
class FrfConfiguration:
    """Respuesta G(e^{jω}) medida en una configuración (punto de operación)."""

    label: str
    response: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "response", _frozen(self.response, complex))
        object.__setattr__(self, "label", str(self.label))

    def points(self, grid: FrequencyGrid) -> Iterator[ComplexResponsePoint]:
        for omega, value in zip(grid.omega, self.response):
            yield ComplexResponsePoint(float(omega), complex(value))


@dataclass(frozen=True, eq=False)
class FrfDataset:
    """
    Conjunto de FRFs de una articulación sobre una rejilla común, una por configuración.

    Attributes:
        grid (FrequencyGrid): Rejilla compartida
        configurations (Tuple[FrfConfiguration, ...]): Respuestas por configuración
        channel (str): Canal medido (entrada → salida)
    """

    grid: FrequencyGrid
    configurations: Tuple[FrfConfiguration, ...]
    channel: str = DEFAULT_CHANNEL

    def __post_init__(self):
        configurations = tuple(self.configurations)
        object.__setattr__(self, "configurations", configurations)

        if not configurations:
            raise FrfValidationError("El dataset necesita al menos una configuración")
        for config in configurations:
            if config.response.size != len(self.grid):
                raise FrfValidationError(
                    f"La configuración '{config.label}' tiene {config.response.size} puntos, "
                    f"la rejilla tiene {len(self.grid)}"
                )
            magnitude = np.abs(config.response)
            if not np.all(np.isfinite(config.response.real)) or not np.all(np.isfinite(config.response.imag)):
                raise FrfValidationError(f"Respuesta no finita en la configuración '{config.label}'")
            if np.any(magnitude == 0.0):
                raise FrfValidationError(f"Respuesta de magnitud cero en la configuración '{config.label}'")
        labels = [config.label for config in configurations]
        if len(set(labels)) != len(labels):
            raise FrfValidationError(f"Etiquetas de configuración repetidas: {labels}")

    @property
    def labels(self) -> List[str]:
        return [config.label for config in self.configurations]

    @property
    def responses(self) -> np.ndarray:
        """Matriz (n_configs, n_omega) de respuestas complejas."""
        return np.vstack([config.response for config in self.configurations])

    def __len__(self) -> int:
        return len(self.configurations)
