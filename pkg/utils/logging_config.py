import logging
import logging.handlers
import os

from config import Config


def setup_logging(level: str = None, log_dir: str = None) -> None:
    """
    Configura el logger raíz con salida a archivo rotativo y a consola.

    Args:
        level (str, optional): Nivel para la consola ("DEBUG", "INFO", ...).
            Por defecto Config.LOG_LEVEL.
        log_dir (str, optional): Directorio de logs. Por defecto Config.LOG_DIR.
    """
    log_dir = log_dir or Config.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    logger = logging.getLogger()
    logger.setLevel(logging.DEBUG)

    formatter = logging.Formatter(
        fmt="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )

    file_handler = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, Config.LOG_FILE),
        maxBytes=5_000_000,
        backupCount=5,
        encoding="utf-8"
    )
    file_handler.setFormatter(formatter)
    file_handler.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO))

    if not logger.handlers:
        logger.addHandler(file_handler)
        logger.addHandler(console_handler)
    else:
        # Ya configurado: solo ajustar el nivel de consola
        for handler in logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(
                handler, logging.handlers.RotatingFileHandler
            ):
                handler.setLevel(console_handler.level)

    # cvxpy y sus solvers son muy verbosos en DEBUG
    logging.getLogger("cvxpy").setLevel(logging.WARNING)
