"""
Jerarquía de errores del proyecto.
Cada error lleva el código de salida que usa la línea de comandos.
"""


class DobError(Exception):
    """Error base; `exit_code` es el código de salida del proceso."""

    exit_code = 1


class FrfParseError(DobError):
    exit_code = 2


class FrfValidationError(FrfParseError, ValueError):
    """Archivo legible cuyo contenido viola un invariante (rejilla, longitudes, valores)."""

    exit_code = 2


class GridMismatchError(DobError, ValueError):
    exit_code = 2


class ConfigError(DobError, ValueError):
    exit_code = 2


class NyquistViolationError(DobError, ValueError):
    """Resonancia de la planta por encima de la frecuencia de Nyquist."""


class ExcitationError(DobError, ValueError):
    pass


class IdentificationError(DobError, ValueError):
    pass


class SingularDenominatorError(DobError, ZeroDivisionError):
    pass


class ClosedLoopSingularityError(DobError, ZeroDivisionError):
    pass


class ImproperFilterError(DobError, ValueError):
    pass


class ShortRecordError(DobError, ValueError):
    pass


class InfeasibleProgramError(DobError):
    """El primer subproblema convexo no es factible."""

    exit_code = 3

    def __init__(self, message: str, violated_blocks=None):
        super().__init__(message)
        self.violated_blocks = list(violated_blocks or [])


class WindingError(DobError):
    """La curva pasa por el origen o la rejilla es demasiado gruesa para contar vueltas."""

    exit_code = 4


class CertificationError(DobError):
    exit_code = 4


class DivergenceError(DobError):
    exit_code = 5
