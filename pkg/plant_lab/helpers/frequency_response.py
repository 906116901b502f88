"""
Respuesta en frecuencia exacta de los modelos de planta discretizados.
"""
import logging
from typing import Union

import numpy as np

from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset
from plant_lab.models.plants import LINK_VEL, PlantBank, RigidPlant, TwoMassPlant

logger = logging.getLogger(__name__)

Plant = Union[TwoMassPlant, RigidPlant]

INPUT_CHANNELS = {"motor": 0, "link": 1}


def _state_space_frf(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray,
                     s_values: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    identity = np.eye(n)
    response = np.empty(s_values.size, dtype=complex)
    for i, s in enumerate(s_values):
        response[i] = (c @ np.linalg.solve(s * identity - a, b)).item() + d.item()
    return response


def plant_frf(plant: Plant, grid: FrequencyGrid, input_channel: str = "motor") -> np.ndarray:
    """
    Respuesta exacta G(e^{jω}) del modelo ZOH par de motor → velocidad de carga.

    Args:
        plant (Plant): Planta de dos masas o rígida
        grid (FrequencyGrid): Rejilla normalizada; grid.ts debe coincidir con plant.ts
        input_channel (str): "motor" (por defecto) o "link" (par aplicado en el eslabón)

    Returns:
        np.ndarray: Respuesta compleja en cada punto de la rejilla

    Raises:
        NyquistViolationError: Si la resonancia supera Nyquist
        ValueError: Si los periodos de muestreo no coinciden
    """
    if not np.isclose(grid.ts, plant.ts, rtol=1e-12, atol=0.0):
        raise ValueError(f"ts de la rejilla ({grid.ts}) distinto de ts de la planta ({plant.ts})")
    ad, bd, _, _ = plant.discrete_model()
    column = INPUT_CHANNELS[input_channel]
    return _state_space_frf(ad, bd[:, [column]], np.eye(4)[[LINK_VEL]], np.zeros((1, 1)), grid.z)


def continuous_frf(plant: Plant, omega_phys: np.ndarray, input_channel: str = "motor") -> np.ndarray:
    """Respuesta analítica del modelo continuo en jω (rad/s)."""
    a, b, _, _ = plant.continuous_model()
    column = INPUT_CHANNELS[input_channel]
    return _state_space_frf(a, b[:, [column]], np.eye(4)[[LINK_VEL]], np.zeros((1, 1)),
                            1j * np.asarray(omega_phys, dtype=float))


def bank_dataset(bank: PlantBank, grid: FrequencyGrid) -> FrfDataset:
    """Dataset FRF exacto del banco de plantas (una configuración por planta)."""
    configurations = [FrfConfiguration(label, plant_frf(plant, grid))
                      for label, plant in zip(bank.labels, bank.plants)]
    logger.info(f"FRF exacta de {len(bank)} plantas sobre {len(grid)} frecuencias")
    return FrfDataset(grid, configurations)
