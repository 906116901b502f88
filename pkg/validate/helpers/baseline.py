"""
DOB convencional basado en modelo, para comparar con el optimizado.

G_n(s): modelo nominal de dos masas en la inercia mediana (par → velocidad de carga,
grado relativo 3). Q(s) = c·ω_q³/(s + ω_q)³ con c = 1 − 1e-2 (fuga para que K no
tenga polos sobre la circunferencia unidad). K = Q/(G_n(1 − Q)) se forma en s y se
discretiza por Tustin.
"""
import math
import logging
from typing import Tuple

import numpy as np
from scipy.signal import bilinear

from plant_lab.models.plants import PlantBank, TwoMassPlant
from synth_core.models.controller import ControllerParams

logger = logging.getLogger(__name__)

Q_LEAK = 1e-2
Q_ORDER = 3


def nominal_model(plant: TwoMassPlant) -> Tuple[np.ndarray, np.ndarray]:
    """
    G_n(s) = K / [((Bs² + D_m s + K)(Js² + d_l s + K) − K²)/s], coeficientes descendentes en s.
    """
    b, dm, j, dl, k = (plant.motor_inertia, plant.motor_damping, plant.link_inertia,
                       plant.link_damping, plant.joint_stiffness)
    quartic = np.polymul([b, dm, k], [j, dl, k])
    quartic[-1] -= k ** 2
    cubic = quartic[:-1]
    return np.array([k]), cubic


def q_filter_continuous(cutoff_hz: float) -> Tuple[np.ndarray, np.ndarray]:
    """Q(s) de tercer orden con fuga en DC."""
    omega = 2.0 * math.pi * cutoff_hz
    return np.array([(1.0 - Q_LEAK) * omega ** Q_ORDER]), np.poly(np.full(Q_ORDER, -omega))


def _tustin_ascending(num, den, ts: float) -> Tuple[np.ndarray, np.ndarray]:
    b, a = bilinear(num, den, fs=1.0 / ts)
    size = max(len(b), len(a))
    b = np.concatenate([np.zeros(size - len(b)), b])
    a = np.concatenate([np.zeros(size - len(a)), a])
    # bilinear devuelve potencias descendentes de z
    return b[::-1], a[::-1]


def baseline_filters(bank: PlantBank, q_cutoff_hz: float):
    """
    Q y G_n discretizados por Tustin (potencias ascendentes de z) para verificar identidades.

    Returns:
        Tuple: (q_num, q_den, gn_num, gn_den)
    """
    plant = bank.median_plant()
    gn_num, gn_den = nominal_model(plant)
    q_num, q_den = q_filter_continuous(q_cutoff_hz)
    return (*_tustin_ascending(q_num, q_den, plant.ts), *_tustin_ascending(gn_num, gn_den, plant.ts))


def baseline_model_dob(bank: PlantBank, q_cutoff_hz: float) -> ControllerParams:
    """
    Factor K = N/D equivalente al DOB convencional.

    Args:
        bank (PlantBank): Banco; el modelo nominal usa su inercia mediana
        q_cutoff_hz (float): Frecuencia de corte de Q en Hz (0 desactiva el DOB)

    Returns:
        ControllerParams: (h, t) con qn = qd = 3, max|t| = 1
    """
    if q_cutoff_hz <= 0:
        return ControllerParams.zero(Q_ORDER, Q_ORDER)

    plant = bank.median_plant()
    gn_num, gn_den = nominal_model(plant)
    q_num, q_den = q_filter_continuous(q_cutoff_hz)

    # K(s) = Q_num·G_n,den / (G_n,num·(Q_den − Q_num))
    k_num = np.polymul(q_num, gn_den)
    k_den = np.polymul(gn_num, np.polysub(q_den, q_num))
    h, t = _tustin_ascending(k_num, k_den, plant.ts)
    params = ControllerParams(h, t).normalized()
    logger.info(f"DOB base: corte {q_cutoff_hz} Hz, J nominal {plant.link_inertia:.4g} kg·m²")
    return params
