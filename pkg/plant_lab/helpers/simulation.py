"""
Simulación en el tiempo de la discretización ZOH exacta de la planta.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy.signal import dlsim

from plant_lab.models.plants import LINK_POS, LINK_VEL, MOTOR_POS, MOTOR_VEL, RigidPlant, TwoMassPlant

logger = logging.getLogger(__name__)

Plant = Union[TwoMassPlant, RigidPlant]


@dataclass(frozen=True, eq=False)
class PlantTrajectory:
    """Series simuladas de la articulación (estado inicial nulo)."""

    ts: float
    torque: np.ndarray
    disturbance: np.ndarray
    motor_pos: np.ndarray
    motor_vel: np.ndarray
    link_pos: np.ndarray
    link_vel: np.ndarray

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.torque.size) * self.ts

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.time,
            "u": self.torque,
            "d": self.disturbance,
            "theta": self.motor_pos,
            "theta_dot": self.motor_vel,
            "q": self.link_pos,
            "q_dot": self.link_vel,
        })


def simulate_plant(plant: Plant, torque, extra_disturbance=None) -> PlantTrajectory:
    """
    Simula la planta con par de motor `torque` y par de perturbación en el eslabón.

    Args:
        plant (Plant): Planta a simular
        torque (array-like): Par de motor por muestra (N·m)
        extra_disturbance (array-like, optional): Par externo en el eslabón; ceros si se omite

    Returns:
        PlantTrajectory: Posiciones y velocidades de motor y eslabón

    Raises:
        ValueError: Si las series tienen longitudes distintas
    """
    torque = np.asarray(torque, dtype=float).reshape(-1)
    if extra_disturbance is None:
        extra_disturbance = np.zeros_like(torque)
    extra_disturbance = np.asarray(extra_disturbance, dtype=float).reshape(-1)
    if torque.size != extra_disturbance.size:
        raise ValueError("Entrada y perturbación deben tener la misma longitud")

    ad, bd, cd, dd = plant.discrete_model()
    inputs = np.column_stack([torque, extra_disturbance])
    _, states, _ = dlsim((ad, bd, cd, dd, plant.ts), inputs)
    logger.debug(f"Simulación de {torque.size} muestras completada")

    return PlantTrajectory(
        ts=plant.ts,
        torque=torque,
        disturbance=extra_disturbance,
        motor_pos=states[:, MOTOR_POS],
        motor_vel=states[:, MOTOR_VEL],
        link_pos=states[:, LINK_POS],
        link_vel=states[:, LINK_VEL],
    )


def impulse_response(plant: Plant, length: int) -> np.ndarray:
    """Respuesta al impulso unitario de par de motor → velocidad de carga."""
    torque = np.zeros(length)
    torque[0] = 1.0
    return simulate_plant(plant, torque).link_vel
