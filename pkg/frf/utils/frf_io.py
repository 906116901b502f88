"""
Lectura, escritura y combinación de archivos FRF.
Formatos: JSON {ts_seconds, omega, configurations: [{label, re, im}]} y CSV
(columnas omega, re_<label>, im_<label>; línea inicial opcional "# ts_seconds=...").
"""
import os
import json
import logging
from typing import Optional

import numpy as np
import pandas as pd

from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset, DEFAULT_CHANNEL
from utils.errors import FrfParseError, FrfValidationError, GridMismatchError

logger = logging.getLogger(__name__)


def _vector(values, what: str, path: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != 1:
        logger.error(f"'{what}' no es una lista plana de números en {path}")
        raise FrfParseError(f"'{what}' debe ser una lista plana de números en {path} (forma {array.shape})")
    return array


def _read_json(path: str) -> FrfDataset:
    try:
        with open(path, "r", encoding="utf-8") as file:
            payload = json.load(file)
    except (json.JSONDecodeError, UnicodeDecodeError, OSError) as e:
        logger.error(f"JSON ilegible o mal formado en {path}: {e}")
        raise FrfParseError(f"JSON ilegible o mal formado en {path}: {e}")

    try:
        ts = float(payload["ts_seconds"])
        omega = _vector(payload["omega"], "omega", path)
        configurations = []
        for raw in payload["configurations"]:
            label = str(raw["label"])
            re_part = _vector(raw["re"], f"re de '{label}'", path)
            im_part = _vector(raw["im"], f"im de '{label}'", path)
            if re_part.shape != im_part.shape:
                logger.error(f"re/im de distinto tamaño en '{label}' ({path})")
                raise FrfParseError(f"re/im de distinto tamaño en '{label}' ({path})")
            configurations.append(FrfConfiguration(label, re_part + 1j * im_part))
        channel = str(payload.get("channel", DEFAULT_CHANNEL))
    except FrfParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        logger.error(f"Archivo FRF sin el esquema esperado ({path}): {e}")
        raise FrfParseError(f"Archivo FRF sin el esquema esperado ({path}): {e}")

    return FrfDataset(FrequencyGrid(omega, ts), configurations, channel)


def _read_csv(path: str, ts: Optional[float]) -> FrfDataset:
    try:
        with open(path, "r", encoding="utf-8") as file:
            first_line = file.readline().strip()
    except (UnicodeDecodeError, OSError) as e:
        logger.error(f"CSV ilegible en {path}: {e}")
        raise FrfParseError(f"CSV ilegible en {path}: {e}")
    if first_line.startswith("#") and "ts_seconds=" in first_line:
        try:
            ts = float(first_line.split("ts_seconds=", 1)[1].split()[0])
        except (ValueError, IndexError):
            logger.error(f"Cabecera ts_seconds inválida en {path}: {first_line!r}")
            raise FrfParseError(f"Cabecera ts_seconds inválida en {path}")
    if ts is None:
        logger.error(f"El CSV {path} no declara ts_seconds")
        raise FrfParseError(f"El CSV {path} no declara ts_seconds y no se indicó ts")

    try:
        df = pd.read_csv(path, comment="#", dtype=float, encoding="utf-8")
    except (ValueError, UnicodeDecodeError, OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.error(f"CSV mal formado en {path}: {e}")
        raise FrfParseError(f"CSV mal formado en {path}: {e}")

    if "omega" not in df.columns:
        logger.error(f"El CSV {path} no tiene columna 'omega'")
        raise FrfParseError(f"El CSV {path} no tiene columna 'omega'")
    labels = [column[3:] for column in df.columns if column.startswith("re_")]
    configurations = []
    for label in labels:
        if f"im_{label}" not in df.columns:
            logger.error(f"Falta la columna im_{label} en {path}")
            raise FrfParseError(f"Falta la columna im_{label} en {path}")
        configurations.append(
            FrfConfiguration(label, df[f"re_{label}"].to_numpy() + 1j * df[f"im_{label}"].to_numpy())
        )
    return FrfDataset(FrequencyGrid(df["omega"].to_numpy(), ts), configurations)


def load_frf(path: str, ts: Optional[float] = None) -> FrfDataset:
    """
    Carga y valida un archivo FRF (JSON o CSV según la extensión).

    Args:
        path (str): Ruta del archivo
        ts (float, optional): Periodo de muestreo para CSV sin cabecera

    Returns:
        FrfDataset: Dataset validado

    Raises:
        FrfParseError: Si el archivo está mal formado
        FrfValidationError: Si viola algún invariante (rejilla, longitudes, valores nulos/NaN)
    """
    if not os.path.exists(path):
        logger.error(f"No existe el archivo FRF: {path}")
        raise FrfParseError(f"No existe el archivo FRF: {path}")

    if path.lower().endswith(".csv"):
        dataset = _read_csv(path, ts)
    else:
        dataset = _read_json(path)
    logger.info(f"FRF cargada: {path} ({len(dataset)} configuraciones, {len(dataset.grid)} puntos)")
    return dataset


def save_frf(dataset: FrfDataset, path: str) -> str:
    """
    Guarda el dataset en JSON o CSV. Los flotantes se escriben con repr (≤ 17 cifras),
    de modo que load_frf(save_frf(d)) reproduce los valores bit a bit.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if path.lower().endswith(".csv"):
        columns = {"omega": dataset.grid.omega}
        for config in dataset.configurations:
            columns[f"re_{config.label}"] = config.response.real
            columns[f"im_{config.label}"] = config.response.imag
        with open(path, "w", encoding="utf-8", newline="") as file:
            file.write(f"# ts_seconds={dataset.grid.ts!r}\n")
            pd.DataFrame(columns).to_csv(file, index=False, float_format="%.17g")
    else:
        payload = {
            "ts_seconds": dataset.grid.ts,
            "channel": dataset.channel,
            "omega": dataset.grid.omega.tolist(),
            "configurations": [
                {"label": c.label, "re": c.response.real.tolist(), "im": c.response.imag.tolist()}
                for c in dataset.configurations
            ],
        }
        with open(path, "w", encoding="utf-8") as file:
            json.dump(payload, file, indent=2, sort_keys=True)
    logger.debug(f"FRF guardada en {path}")
    return path


def _unique_label(label: str, taken: set) -> str:
    if label not in taken:
        return label
    suffix = 2
    while f"{label}_{suffix}" in taken:
        suffix += 1
    return f"{label}_{suffix}"


def merge_datasets(a: FrfDataset, b: FrfDataset) -> FrfDataset:
    """
    Une las configuraciones de dos datasets con la misma rejilla.
    Las etiquetas repetidas reciben un sufijo _2, _3, ...

    Raises:
        GridMismatchError: Si las rejillas o los periodos de muestreo difieren
    """
    if not a.grid.matches(b.grid):
        logger.error("No se pueden combinar datasets con rejillas distintas")
        raise GridMismatchError("Las rejillas (ω o ts) de los datasets no coinciden")

    taken = set(a.labels)
    merged = list(a.configurations)
    for config in b.configurations:
        label = _unique_label(config.label, taken)
        taken.add(label)
        merged.append(FrfConfiguration(label, config.response))
    channel = a.channel if a.channel == b.channel else f"{a.channel}|{b.channel}"
    return FrfDataset(a.grid, merged, channel)
