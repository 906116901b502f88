import math

import numpy as np
import pytest

from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset
from plant_lab.helpers.frequency_response import bank_dataset, plant_frf
from plant_lab.helpers.table_bank import JOINT_INERTIA_RANGES, joint_constants, make_table1_bank
from plant_lab.models.plants import PlantBank, RigidPlant, TwoMassPlant
from synth_core.models.controller import ControllerParams

TS = 0.001


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_grid():
    return FrequencyGrid([0.01, 0.1, 1.0], TS)


@pytest.fixture
def two_mass_plant():
    return TwoMassPlant(0.5, 0.01, 0.5, 0.01, 200.0, TS)


@pytest.fixture
def rigid_plant():
    return RigidPlant(0.3, 0.05, TS)


@pytest.fixture
def joint2_bank():
    return make_table1_bank(2, 3, TS)


@pytest.fixture
def design_grid():
    """Rejilla de diseño reducida (0.1 Hz a Nyquist) para síntesis rápidas."""
    return FrequencyGrid.logspace_hz(0.1, 500.0, 60, TS)


@pytest.fixture
def joint2_dataset(joint2_bank, design_grid):
    return bank_dataset(joint2_bank, design_grid)


@pytest.fixture
def rigid_dataset(rigid_plant, design_grid):
    return FrfDataset(design_grid, [FrfConfiguration("rigid", plant_frf(rigid_plant, design_grid))])


def random_controller(rng, qn=3, qd=3, radius=0.8):
    """Controlador aleatorio con D de raíces reales dentro del disco de radio `radius`."""
    roots = rng.uniform(-radius, radius, qd)
    t = np.polynomial.polynomial.polyfromroots(roots)
    h = rng.normal(0.0, 0.05, qn + 1)
    return ControllerParams(h, t)


def unit_circle(points=512):
    return np.linspace(math.pi / points, math.pi, points)


def random_bank(rng, n_configs=3, ts=TS):
    """Banco aleatorio: articulación 1..5, resonancia 8-40 Hz, amortiguamiento 1-10 %."""
    joint = int(rng.integers(1, 6))
    template = joint_constants(joint, rng.uniform(8.0, 40.0), rng.uniform(0.01, 0.1), ts)
    j_low, j_high = JOINT_INERTIA_RANGES[joint]
    inertias = np.sort(np.exp(rng.uniform(math.log(j_low), math.log(j_high), n_configs)))
    return PlantBank.from_inertias(template, inertias)
