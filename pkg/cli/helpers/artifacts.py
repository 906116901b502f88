"""
Lectura y escritura de artefactos JSON/CSV del pipeline.
Los JSON se escriben con claves ordenadas, sangría 2 y flotantes con repr (17 cifras).
"""
import os
import json
import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

KIND_RESULT = "result"
KIND_CERTIFICATE = "certificate"
KIND_METRICS = "metrics"
KIND_FRF = "frf"


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(payload: Dict[str, Any], path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        json.dump(_plain(payload), file, indent=2, sort_keys=True)
        file.write("\n")
    logger.debug(f"Artefacto escrito: {path}")
    return path


def read_json(path: str, error=ConfigError) -> Dict[str, Any]:
    """
    Lee un artefacto JSON.

    Raises:
        error: Si el archivo no existe o no es JSON válido (ConfigError por defecto)
    """
    if not os.path.exists(path):
        logger.error(f"No existe el artefacto: {path}")
        raise error(f"No existe el artefacto: {path}")
    try:
        with open(path, "r", encoding="utf-8") as file:
            payload = json.load(file)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        logger.error(f"Artefacto ilegible {path}: {e}")
        raise error(f"Artefacto ilegible {path}: {e}")
    if not isinstance(payload, dict):
        raise error(f"El artefacto {path} no es un objeto JSON")
    return payload


def write_csv(frame: pd.DataFrame, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def artifact_kind(payload: Dict[str, Any]) -> str:
    """Tipo de artefacto según sus claves."""
    if "controller" in payload and "objective_trace" in payload:
        return KIND_RESULT
    if "passed" in payload and "configs" in payload:
        return KIND_CERTIFICATE
    if "runs" in payload:
        return KIND_METRICS
    if "omega" in payload and "configurations" in payload:
        return KIND_FRF
    raise ConfigError("Artefacto de tipo desconocido")
