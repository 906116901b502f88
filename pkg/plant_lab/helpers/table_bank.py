"""
Bancos de plantas con la variación de inercia por configuración de cada articulación
de un brazo de 7 ejes (rango de movimiento → rango de inercia del eslabón).
"""
import math
import logging
from typing import Dict, Tuple

import numpy as np

from plant_lab.models.plants import PlantBank, TwoMassPlant

logger = logging.getLogger(__name__)

# Rango de inercia del eslabón (kg·m²) por articulación
JOINT_INERTIA_RANGES: Dict[int, Tuple[float, float]] = {
    1: (0.03, 3.98),
    2: (0.01, 4.15),
    3: (0.014, 0.69),
    4: (0.50, 0.70),
    5: (0.008, 0.09),
    6: (0.07, 0.07),
    7: (0.0002, 0.0002),
}

DEFAULT_RESONANCE_HZ = 15.0
DEFAULT_DAMPING_RATIO = 0.02
DEFAULT_TS = 0.001


def joint_constants(joint: int, resonance_hz: float = DEFAULT_RESONANCE_HZ,
                    damping_ratio: float = DEFAULT_DAMPING_RATIO,
                    ts: float = DEFAULT_TS) -> TwoMassPlant:
    """
    Planta de referencia de la articulación en su inercia mediana.

    B = J_med/3 y K sitúa la resonancia en `resonance_hz` con J_med. El amortiguamiento
    es proporcional a la masa (D_m = βB, d_l = βJ_med, β = 2ζω_r): el modo resonante
    tiene razón de amortiguamiento exacta ζ y el modo rígido queda estable.

    Args:
        joint (int): Articulación 1..7
        resonance_hz (float): Resonancia deseada en J_med
        damping_ratio (float): Razón de amortiguamiento del modo resonante
        ts (float): Periodo de muestreo

    Returns:
        TwoMassPlant: Planta con J = J_med
    """
    if joint not in JOINT_INERTIA_RANGES:
        raise ValueError(f"Articulación fuera de rango (1..7): {joint}")
    j_low, j_high = JOINT_INERTIA_RANGES[joint]
    j_med = math.sqrt(j_low * j_high)
    b = j_med / 3.0
    omega_r = 2.0 * math.pi * resonance_hz
    k = omega_r ** 2 * b * j_med / (b + j_med)
    beta = 2.0 * damping_ratio * omega_r
    return TwoMassPlant(b, beta * b, j_med, beta * j_med, k, ts)


def make_table1_bank(joint: int, n_configs: int, ts: float = DEFAULT_TS) -> PlantBank:
    """
    Banco de `n_configs` plantas con J espaciado logarítmicamente en el rango de la articulación.

    Args:
        joint (int): Articulación 1..7
        n_configs (int): Número de configuraciones (≥ 2)
        ts (float): Periodo de muestreo

    Returns:
        PlantBank: Banco con J creciente (o constante en rangos degenerados)
    """
    if n_configs < 2:
        raise ValueError("n_configs debe ser ≥ 2")
    j_low, j_high = JOINT_INERTIA_RANGES.get(joint, (None, None))
    if j_low is None:
        raise ValueError(f"Articulación fuera de rango (1..7): {joint}")

    template = joint_constants(joint, ts=ts)
    inertias = np.geomspace(j_low, j_high, n_configs)
    # Extremos exactos del rango
    inertias[0], inertias[-1] = j_low, j_high
    bank = PlantBank.from_inertias(template, inertias)
    for plant in bank:
        plant.check_nyquist()

    logger.info(
        f"Banco articulación {joint}: J = {[round(j, 4) for j in bank.inertias]} kg·m², "
        f"B={template.motor_inertia:.4g}, K={template.joint_stiffness:.4g}"
    )
    return bank
