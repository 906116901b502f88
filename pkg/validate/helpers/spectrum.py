"""
Potencia por bandas de frecuencia a partir del periodograma.
"""
import logging
from typing import Dict, Sequence

import numpy as np
from scipy.signal import periodogram

from utils.errors import ShortRecordError

logger = logging.getLogger(__name__)


def power_spectrum(series, ts: float, band_edges: Sequence[float]) -> np.ndarray:
    """
    Potencia media cuadrática por banda [f_i, f_{i+1}) en Hz.

    Periodograma con ventana rectangular, sin eliminar tendencia y escalado 'spectrum':
    la suma de todos los bins es el valor cuadrático medio de la serie.

    Args:
        series (array-like): Serie temporal
        ts (float): Periodo de muestreo
        band_edges (Sequence[float]): Bordes de banda crecientes en Hz

    Returns:
        np.ndarray: Potencia de cada banda (len(band_edges) − 1 valores)

    Raises:
        ShortRecordError: Si la serie no cubre dos periodos de la banda más lenta
    """
    series = np.asarray(series, dtype=float).reshape(-1)
    edges = np.asarray(band_edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("Los bordes de banda deben ser crecientes (al menos 2)")
    positive = edges[edges > 0]
    longest_period = 1.0 / positive[0] if positive.size else 0.0
    if series.size * ts < 2.0 * longest_period or series.size < 2:
        logger.error(f"Registro de {series.size * ts:.3g} s demasiado corto para la banda de {positive[0]} Hz")
        raise ShortRecordError(
            f"El registro ({series.size * ts:.3g} s) debe durar al menos 2 periodos de la banda más lenta"
        )

    freqs, power = periodogram(series, fs=1.0 / ts, window="boxcar", detrend=False, scaling="spectrum")
    bands = np.empty(edges.size - 1)
    for i, (low, high) in enumerate(zip(edges[:-1], edges[1:])):
        mask = (freqs >= low) & (freqs < high)
        bands[i] = float(np.sum(power[mask]))
    return bands


def band_labels(band_edges: Sequence[float]) -> list:
    return [f"{low:.3g}-{high:.3g} Hz" for low, high in zip(band_edges[:-1], band_edges[1:])]


def band_power_map(series, ts: float, band_edges: Sequence[float]) -> Dict[str, float]:
    """power_spectrum con etiquetas de banda."""
    return dict(zip(band_labels(band_edges), power_spectrum(series, ts, band_edges).tolist()))
