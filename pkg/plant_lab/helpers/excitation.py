"""
Generación de excitación multiseno de Schroeder para identificación.
"""
import math
import logging
from typing import Sequence

import numpy as np

from frf.models.frf_dataset import FrequencyGrid
from plant_lab.models.plants import ExcitationSignal
from utils.errors import ExcitationError

logger = logging.getLogger(__name__)


def schroeder_multisine(period_length: int, lines: Sequence[int], amplitude: float, ts: float,
                        periods: int = 1) -> ExcitationSignal:
    """
    Suma de cosenos en los bins excitados con fases de Schroeder φ_k = −π·k·(k−1)/L.

    Args:
        period_length (int): Muestras por periodo N
        lines (Sequence[int]): Bins excitados, 1 ≤ k < N/2
        amplitude (float): Valor RMS de la señal en N·m; cada línea tiene amplitud amplitude·sqrt(2/L)
        ts (float): Periodo de muestreo
        periods (int): Repeticiones del periodo

    Returns:
        ExcitationSignal: Señal periódica de longitud periods × period_length

    Raises:
        ExcitationError: Bin fuera de rango o amplitud no positiva
    """
    lines = np.asarray(lines, dtype=int).reshape(-1)
    if amplitude <= 0:
        raise ExcitationError(f"La amplitud debe ser positiva: {amplitude}")
    if lines.size == 0 or np.any(lines < 1) or np.any(lines >= period_length / 2):
        logger.error(f"Bins fuera de rango para N={period_length}: {lines.tolist()}")
        raise ExcitationError(f"Bins fuera de rango (1 ≤ k < {period_length / 2}): {lines.tolist()}")
    if np.unique(lines).size != lines.size:
        raise ExcitationError("Bins excitados repetidos")

    n_lines = lines.size
    k = np.arange(1, n_lines + 1)
    phases = -math.pi * k * (k - 1) / n_lines
    line_amplitude = amplitude * math.sqrt(2.0 / n_lines)

    n = np.arange(period_length)
    period = line_amplitude * np.cos(
        2.0 * math.pi * np.outer(lines, n) / period_length + phases[:, None]
    ).sum(axis=0)

    signal = ExcitationSignal(np.tile(period, periods), ts, periods, tuple(lines.tolist()))
    logger.debug(f"Multiseno: {n_lines} líneas, N={period_length}, factor de cresta {signal.crest_factor:.2f}")
    return signal


def multisine_lines(period_length: int, n_lines: int, f_min_hz: float, ts: float) -> np.ndarray:
    """Bins únicos, espaciados logarítmicamente desde f_min_hz hasta justo bajo Nyquist."""
    k_min = max(1, int(math.ceil(f_min_hz * period_length * ts)))
    k_max = period_length // 2 - 1
    if k_min > k_max:
        raise ExcitationError(f"f_min_hz={f_min_hz} no deja bins disponibles con N={period_length}")
    bins = np.unique(np.round(np.geomspace(k_min, k_max, n_lines)).astype(int))
    return bins


def grid_from_lines(lines: Sequence[int], period_length: int, ts: float) -> FrequencyGrid:
    """Rejilla normalizada ω_k = 2πk/N de los bins excitados."""
    return FrequencyGrid(2.0 * math.pi * np.asarray(lines, dtype=float) / period_length, ts)
