"""
Identificación de FRF a partir de registros periódicos (excitación multiseno).
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np

from frf.models.frf_dataset import FrfConfiguration, FrfDataset
from plant_lab.helpers.excitation import grid_from_lines, schroeder_multisine
from plant_lab.helpers.simulation import simulate_plant
from plant_lab.models.plants import PlantBank, RigidPlant, TwoMassPlant
from utils.errors import IdentificationError

logger = logging.getLogger(__name__)

Plant = Union[TwoMassPlant, RigidPlant]

SETTLE_TOL = 1e-10


def settling_periods(plant: Plant, period_length: int, tol: float = SETTLE_TOL) -> int:
    """
    Periodos de precarga para que el transitorio del polo más lento caiga por debajo de `tol`.
    Los polos en z = 1 (posiciones) no afectan a las velocidades y se ignoran.
    """
    ad, _, _, _ = plant.discrete_model()
    radii = np.abs(np.linalg.eigvals(ad))
    radii = radii[radii < 1.0 - 1e-12]
    if radii.size == 0 or np.max(radii) == 0.0:
        return 0
    decay_per_period = period_length * np.log(np.max(radii))
    return int(np.ceil(np.log(tol) / decay_per_period))


def estimate_frf(torque, velocity, period_length: int, periods: int, lines: Sequence[int],
                 ts: float) -> np.ndarray:
    """
    Estima la FRF en los bins excitados promediando DFT(salida)/DFT(entrada) por periodo.
    El primer periodo se descarta como transitorio; no se aplica ventana.

    Args:
        torque (array-like): Entrada registrada
        velocity (array-like): Salida registrada
        period_length (int): Muestras por periodo
        periods (int): Número de periodos del registro (≥ 2)
        lines (Sequence[int]): Bins excitados
        ts (float): Periodo de muestreo (para mensajes y la rejilla asociada)

    Returns:
        np.ndarray: Respuesta compleja en cada línea excitada

    Raises:
        IdentificationError: Periodos insuficientes, longitud incorrecta o espectro nulo de entrada
    """
    torque = np.asarray(torque, dtype=float).reshape(-1)
    velocity = np.asarray(velocity, dtype=float).reshape(-1)
    lines = np.asarray(lines, dtype=int).reshape(-1)

    if periods < 2:
        raise IdentificationError("Se necesitan al menos 2 periodos (el primero se descarta)")
    if torque.size != periods * period_length or velocity.size != torque.size:
        logger.error(f"Longitud de registro {torque.size}/{velocity.size} ≠ {periods}×{period_length}")
        raise IdentificationError(
            f"La longitud del registro debe ser periods × period_length = {periods * period_length}"
        )

    u_periods = torque.reshape(periods, period_length)[1:]
    y_periods = velocity.reshape(periods, period_length)[1:]
    u_spectrum = np.fft.fft(u_periods, axis=1)[:, lines]
    y_spectrum = np.fft.fft(y_periods, axis=1)[:, lines]

    u_scale = np.max(np.abs(np.fft.fft(u_periods, axis=1)))
    if u_scale == 0 or np.any(np.abs(u_spectrum) <= 1e-12 * u_scale):
        bad = lines[np.any(np.abs(u_spectrum) <= 1e-12 * max(u_scale, 1e-300), axis=0)]
        logger.error(f"Espectro de entrada nulo en los bins {bad.tolist()}")
        raise IdentificationError(f"Espectro de entrada nulo en las líneas excitadas {bad.tolist()}")

    response = np.mean(y_spectrum / u_spectrum, axis=0)
    logger.debug(f"FRF estimada en {lines.size} líneas con {periods - 1} periodos útiles (ts={ts})")
    return response


def identify_bank(bank: PlantBank, period_length: int, periods: int, lines: Sequence[int],
                  excitation_rms: float = 1.0, noise_db: Optional[float] = None,
                  rng: Optional[np.random.Generator] = None) -> FrfDataset:
    """
    Identifica cada planta del banco con un multiseno de Schroeder simulado.

    Args:
        bank (PlantBank): Banco de plantas
        period_length (int): Muestras por periodo
        periods (int): Periodos registrados; antes se simulan los periodos de precarga
            necesarios para que el transitorio se extinga
        lines (Sequence[int]): Bins excitados
        excitation_rms (float): Valor RMS del par de excitación
        noise_db (float, optional): Ruido blanco de medida relativo al RMS de la salida (p. ej. -40)
        rng (np.random.Generator, optional): Generador para el ruido (obligatorio si noise_db)

    Returns:
        FrfDataset: Dataset identificado sobre la rejilla de líneas excitadas
    """
    if noise_db is not None and rng is None:
        raise IdentificationError("Se requiere un generador con semilla cuando hay ruido")

    ts = bank.plants[0].ts
    excitation = schroeder_multisine(period_length, lines, excitation_rms, ts, periods)
    logger.info(
        f"Excitación: {len(excitation.lines)} líneas, {periods}×{period_length} muestras, "
        f"factor de cresta {excitation.crest_factor:.2f}"
    )

    configurations = []
    for label, plant in zip(bank.labels, bank.plants):
        settle = settling_periods(plant, period_length)
        preload = np.tile(excitation.samples[:period_length], settle)
        velocity = simulate_plant(plant, np.concatenate([preload, excitation.samples])).link_vel
        velocity = velocity[preload.size:]
        if noise_db is not None:
            noise_std = 10.0 ** (noise_db / 20.0) * float(np.sqrt(np.mean(velocity ** 2)))
            velocity = velocity + rng.normal(0.0, noise_std, velocity.size)
        response = estimate_frf(excitation.samples, velocity, period_length, periods, lines, ts)
        configurations.append(FrfConfiguration(label, response))
        logger.info(f"Configuración '{label}' identificada ({settle} periodos de precarga)")

    return FrfDataset(grid_from_lines(lines, period_length, ts), configurations)
