import os
import math
import logging
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional

from dotenv import load_dotenv, dotenv_values

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Cargar variables de entorno
load_dotenv()


class Config:
    """
    Clase de configuración centralizada para la aplicación.
    Los valores por defecto se pueden sobrescribir con variables de entorno o un archivo .env.
    """

    # Solver cónico usado por cvxpy
    SOLVER = os.getenv("DOB_SOLVER", "CLARABEL")

    # Logging
    LOG_DIR = os.getenv("DOB_LOG_DIR", "logs")
    LOG_FILE = os.getenv("DOB_LOG_FILE", "app.log")
    LOG_LEVEL = os.getenv("DOB_LOG_LEVEL", "INFO")

    # Directorio de resultados
    OUTPUT_DIR = os.getenv("DOB_OUTPUT_DIR", "results")

    @classmethod
    def validate_config(cls) -> bool:
        """Valida que las configuraciones esenciales sean utilizables."""
        problems = []

        try:
            import cvxpy as cp
            if cls.SOLVER.upper() not in cp.installed_solvers():
                problems.append(f"DOB_SOLVER={cls.SOLVER} (no instalado)")
        except ImportError:
            problems.append("cvxpy (no instalado)")

        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            problems.append(f"DOB_LOG_LEVEL={cls.LOG_LEVEL}")

        if problems:
            logger.warning(f"Configuraciones con problemas: {', '.join(problems)}")
            return False
        return True


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


@dataclass
class RunConfig:
    """
    Configuración de una corrida completa del pipeline
    (identificar → sintetizar → verificar → simular → reportar).

    Se lee de un archivo de texto CLAVE=VALOR; las claves desconocidas son error.
    """

    mode: str = "synthetic"
    joint: int = 2
    n_configs: int = 3
    ts: float = 0.001
    frf_files: List[str] = field(default_factory=list)
    record_files: List[str] = field(default_factory=list)
    record_labels: List[str] = field(default_factory=list)
    identify_method: str = "simulate"
    period_length: int = 16384
    periods: int = 4
    n_lines: int = 400
    f_min_hz: float = 0.05
    excitation_rms: float = 1.0
    noise_db: Optional[float] = None
    seed: Optional[int] = None
    sigma: float = 0.5
    tau: float = 1.0 / (2.0 * math.pi * 40.0)
    n: int = 2
    alpha: float = 10.0
    qn: int = 6
    qd: int = 6
    tol_obj: float = 1e-4
    max_iter: int = 50
    zeta_init_hz: float = 0.1
    solver: str = Config.SOLVER
    scenarios: List[str] = field(default_factory=lambda: ["step", "chirp", "impact", "inertia_sweep"])
    duration: float = 30.0
    baseline_cutoff_hz: float = 2.0
    output_dir: str = Config.OUTPUT_DIR

    _LIST_KEYS = ("frf_files", "record_files", "record_labels", "scenarios")
    _INT_KEYS = ("joint", "n_configs", "period_length", "periods", "n_lines", "seed",
                 "n", "qn", "qd", "max_iter")
    _TEXT_KEYS = ("mode", "identify_method", "solver", "output_dir")
    _SCENARIOS = ("step", "chirp", "impact", "inertia_sweep")

    @classmethod
    def from_mapping(cls, values: Dict[str, Optional[str]]) -> "RunConfig":
        """
        Construye la configuración a partir de un diccionario de textos.

        Raises:
            ConfigError: Si hay claves desconocidas o valores fuera de rango
        """
        known = {f.name: f for f in fields(cls)}
        unknown = [key for key in values if key.lower() not in known]
        if unknown:
            logger.error(f"Claves desconocidas en la configuración: {unknown}")
            raise ConfigError(f"Claves desconocidas en la configuración: {', '.join(sorted(unknown))}")

        kwargs = {}
        for raw_key, raw_value in values.items():
            key = raw_key.lower()
            value = (raw_value or "").strip()
            if key in cls._LIST_KEYS:
                kwargs[key] = _split_list(value)
                continue
            if value == "":
                if key in ("noise_db", "seed"):
                    kwargs[key] = None
                continue
            try:
                if key in cls._INT_KEYS:
                    kwargs[key] = int(value)
                elif key in cls._TEXT_KEYS:
                    kwargs[key] = value
                else:
                    kwargs[key] = float(value)
            except ValueError:
                logger.error(f"Valor inválido para {key}: {value!r}")
                raise ConfigError(f"Valor inválido para {key}: {value!r}")

        config = cls(**kwargs)
        config.validate()
        return config

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        """
        Lee un archivo CLAVE=VALOR (formato .env).

        Args:
            path (str): Ruta del archivo de configuración

        Returns:
            RunConfig: Configuración validada
        """
        if not os.path.exists(path):
            logger.error(f"No existe el archivo de configuración: {path}")
            raise ConfigError(f"No existe el archivo de configuración: {path}")
        values = dotenv_values(path)
        logger.info(f"Configuración cargada desde {path} ({len(values)} claves)")
        return cls.from_mapping(values)

    def validate(self) -> None:
        """Verifica los invariantes de la configuración."""
        problems = []
        if self.mode not in ("synthetic", "data"):
            problems.append(f"mode={self.mode}")
        if self.identify_method not in ("simulate", "exact"):
            problems.append(f"identify_method={self.identify_method}")
        if not 1 <= self.joint <= 7:
            problems.append(f"joint={self.joint}")
        if self.n_configs < 2:
            problems.append(f"n_configs={self.n_configs}")
        if self.ts <= 0:
            problems.append(f"ts={self.ts}")
        if self.periods < 2:
            problems.append(f"periods={self.periods}")
        if self.period_length < 4 or self.n_lines < 1:
            problems.append("period_length/n_lines")
        if not 0 < self.sigma <= 1:
            problems.append(f"sigma={self.sigma}")
        if self.tau <= 0 or self.n < 1 or self.alpha <= 0:
            problems.append("tau/n/alpha")
        if self.qn < 0 or self.qd < self.qn:
            problems.append(f"qn={self.qn}, qd={self.qd}")
        if self.tol_obj <= 0 or self.max_iter < 1:
            problems.append("tol_obj/max_iter")
        if self.duration <= 0:
            problems.append(f"duration={self.duration}")
        if self.baseline_cutoff_hz <= 0:
            problems.append(f"baseline_cutoff_hz={self.baseline_cutoff_hz}")
        bad_scenarios = [s for s in self.scenarios if s not in self._SCENARIOS]
        if bad_scenarios:
            problems.append(f"scenarios={bad_scenarios}")
        if self.noise_db is not None and self.seed is None:
            problems.append("seed es obligatorio cuando se define noise_db")
        if self.mode == "data" and not (self.frf_files or self.record_files):
            problems.append("mode=data requiere frf_files o record_files")
        if self.record_labels and len(self.record_labels) != len(self.record_files):
            problems.append("record_labels y record_files deben tener la misma longitud")

        if problems:
            logger.error(f"Configuración inválida: {problems}")
            raise ConfigError(f"Configuración inválida: {'; '.join(problems)}")
