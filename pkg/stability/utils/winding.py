"""
Número de vueltas (wno) alrededor del origen de una respuesta en frecuencia de un
sistema de coeficientes reales, muestreada en ω ∈ (0, π] y cerrada por simetría conjugada.
"""
import math
import logging
from typing import Tuple

import numpy as np

from utils.errors import WindingError

logger = logging.getLogger(__name__)

ORIGIN_TOL = 1e-12
MAX_PHASE_STEP = math.pi / 2


def closed_contour(samples, mirror: bool = True) -> np.ndarray:
    """Contorno ω: −π → π formado por conj(muestras invertidas) seguido de las muestras."""
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    if not mirror:
        return samples
    return np.concatenate([np.conj(samples[::-1]), samples])


def phase_increments(samples, mirror: bool = True) -> np.ndarray:
    """Incrementos de fase entre muestras consecutivas del contorno cerrado (incluido el cierre)."""
    contour = closed_contour(samples, mirror)
    following = np.roll(contour, -1)
    return np.angle(following / contour)


def winding_turns(samples, mirror: bool = True, max_step: float = MAX_PHASE_STEP) -> Tuple[float, float]:
    """
    Vueltas acumuladas (sin redondear) y mayor incremento de fase.

    Args:
        samples (array-like): Valores complejos en ω ∈ (0, π] crecientes
        mirror (bool): Cerrar el contorno por simetría conjugada
        max_step (float): Incremento máximo admitido entre muestras (rad)

    Returns:
        Tuple[float, float]: (vueltas, mayor |incremento|)

    Raises:
        WindingError: Si alguna muestra está a menos de 1e-12 del origen o la rejilla es demasiado gruesa
    """
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    if samples.size == 0:
        raise WindingError("No hay muestras para contar vueltas")
    if np.any(np.abs(samples) < ORIGIN_TOL):
        index = int(np.argmin(np.abs(samples)))
        logger.error(f"La curva pasa por el origen en la muestra {index}")
        raise WindingError(f"La curva pasa por el origen (muestra {index})")

    increments = phase_increments(samples, mirror)
    interior = np.abs(increments)
    if mirror:
        # Los cierres en DC y Nyquist cruzan el eje real: se toma el valor principal
        interior = np.delete(interior, [samples.size - 1, 2 * samples.size - 1])
    largest = float(np.max(interior)) if interior.size else 0.0
    if largest > max_step:
        index = int(np.argmax(interior))
        logger.error(f"Incremento de fase {largest:.2f} rad > {max_step:.2f} en el paso {index}")
        raise WindingError(
            f"Rejilla demasiado gruesa: incremento de fase {largest:.2f} rad en el paso {index}; "
            "use una rejilla más densa"
        )
    return float(np.sum(increments) / (2.0 * math.pi)), largest


def winding_number(samples, mirror: bool = True, max_step: float = MAX_PHASE_STEP) -> int:
    """Número de vueltas en sentido antihorario alrededor del origen (entero)."""
    turns, _ = winding_turns(samples, mirror, max_step)
    number = int(round(turns))
    residue = abs(turns - number)
    if residue > 1e-6:
        logger.warning(f"Residuo de redondeo del número de vueltas: {residue:.2e}")
    return number
