"""
Recuperación del filtro Q a partir del factor optimizado K = N/D y un modelo nominal G_n:
Q = K·G_n/(1 + K·G_n), invirtiendo K = Q·G_n^{-1}·(1 − Q)^{-1}.
Solo para reportes; no interviene en la optimización.
"""
import logging
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from synth_core.helpers.polynomials import degree
from synth_core.models.controller import ControllerParams, QFilter
from utils.errors import ImproperFilterError

logger = logging.getLogger(__name__)


def rigid_nominal_model(inertia: float, ts: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Modelo nominal rígido 1/(inertia·s) discretizado por ZOH: (ts/inertia)/(z − 1).

    Returns:
        Tuple[np.ndarray, np.ndarray]: (numerador, denominador) en potencias ascendentes
    """
    if inertia <= 0 or ts <= 0:
        raise ValueError("Inercia y ts deben ser positivos")
    return np.array([ts / inertia]), np.array([-1.0, 1.0])


def recover_q_filter(params: ControllerParams, gn_num, gn_den, ts: float = None) -> QFilter:
    """
    Calcula Q = N·Gn_num / (D·Gn_den + N·Gn_num) por convolución de coeficientes.

    Args:
        params (ControllerParams): Factor K = N/D optimizado
        gn_num (array-like): Numerador de G_n (potencias ascendentes de z)
        gn_den (array-like): Denominador de G_n
        ts (float, optional): Periodo de muestreo para exportar

    Returns:
        QFilter: Filtro Q propio y el G_n usado

    Raises:
        ImproperFilterError: Si Q resulta impropio
    """
    gn_num = np.asarray(gn_num, dtype=float)
    gn_den = np.asarray(gn_den, dtype=float)
    if degree(gn_den) < 0:
        raise ValueError("El denominador de G_n es nulo")

    num = P.polymul(params.h, gn_num)
    den = P.polyadd(P.polymul(params.t, gn_den), num)

    if degree(num) < 0:
        return QFilter(np.zeros(1), P.polytrim(den), gn_num, gn_den, ts)
    if degree(den) < 0:
        raise ImproperFilterError("El denominador de Q es idénticamente nulo")
    if degree(num) > degree(den):
        logger.error(f"Q impropio: grado num {degree(num)} > grado den {degree(den)}")
        raise ImproperFilterError(
            "El filtro Q recuperado es impropio; aumente el grado relativo de G_n"
        )
    return QFilter(P.polytrim(num), P.polytrim(den), gn_num, gn_den, ts)
