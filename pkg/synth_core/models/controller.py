"""
Parametrización del observador de perturbaciones (DOB) sobre la ganancia de lazo
L = G·N/D, con N(z,h) = Σ h_k z^k y D(z,t) = Σ t_k z^k (potencias ascendentes).
"""
import math
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

logger = logging.getLogger(__name__)


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ControllerParams:
    """
    Coeficientes reales del factor de lazo K = N/D.

    Attributes:
        h (np.ndarray): Numerador [h_0..h_qn]
        t (np.ndarray): Denominador [t_0..t_qd]
    """

    h: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        h, t = _frozen(self.h), _frozen(self.t)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "t", t)
        if h.size == 0 or t.size == 0:
            raise ValueError("h y t no pueden estar vacíos")
        if t.size < h.size:
            raise ValueError(f"Se requiere qd ≥ qn (qn={h.size - 1}, qd={t.size - 1})")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(t))):
            raise ValueError("Coeficientes no finitos")
        if not np.any(t != 0.0):
            raise ValueError("El denominador t es idénticamente cero")

    @property
    def qn(self) -> int:
        return self.h.size - 1

    @property
    def qd(self) -> int:
        return self.t.size - 1

    @classmethod
    def zero(cls, qn: int, qd: int) -> "ControllerParams":
        """Controlador nulo N = 0, D = z^qd."""
        t = np.zeros(qd + 1)
        t[-1] = 1.0
        return cls(np.zeros(qn + 1), t)

    def normalized(self) -> "ControllerParams":
        """Escala h y t por el mismo factor para que max|t_k| = 1 (K no cambia)."""
        scale = float(np.max(np.abs(self.t)))
        return ControllerParams(self.h / scale, self.t / scale)

    def to_dict(self) -> Dict[str, Any]:
        return {"qn": self.qn, "qd": self.qd, "h": self.h.tolist(), "t": self.t.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ControllerParams":
        params = cls(payload["h"], payload["t"])
        if "qn" in payload and (int(payload["qn"]), int(payload["qd"])) != (params.qn, params.qd):
            raise ValueError("Los órdenes declarados no coinciden con los coeficientes")
        return params


@dataclass(frozen=True)
class WeightSpec:
    """
    Constantes de diseño del programa.

    Attributes:
        sigma (float): Margen de módulo 0 < σ ≤ 1
        tau (float): Constante de tiempo de W₃ en segundos
        n (int): Orden del filtro de W₃
        alpha (float): Peso de M en el objetivo ζ + αM
    """

    sigma: float = 0.5
    tau: float = 1.0 / (2.0 * math.pi * 40.0)
    n: int = 2
    alpha: float = 10.0

    def __post_init__(self):
        if not 0 < self.sigma <= 1:
            raise ValueError(f"sigma debe estar en (0, 1]: {self.sigma}")
        if self.tau <= 0 or self.alpha < 0 or int(self.n) != self.n or self.n < 1:
            raise ValueError("tau > 0, n entero ≥ 1 y alpha ≥ 0")

    @property
    def zeta_max(self) -> float:
        """Cota superior τ^{-n} de ζ."""
        return self.tau ** (-self.n)


@dataclass(frozen=True)
class PerformanceVars:
    """ζ (rad/s, ancho de banda de S) y nivel M de W₃."""

    zeta: float
    m_var: float

    def validate(self, spec: WeightSpec) -> None:
        if not 0 < self.zeta < spec.zeta_max:
            raise ValueError(f"ζ fuera de (0, τ^-n): {self.zeta}")
        if not 0 < self.m_var <= 1:
            raise ValueError(f"M fuera de (0, 1]: {self.m_var}")


@dataclass(frozen=True, eq=False)
class QFilter:
    """
    Filtro Q racional en potencias ascendentes de z y el modelo nominal usado.

    Attributes:
        num (np.ndarray): Numerador de Q
        den (np.ndarray): Denominador de Q
        gn_num (np.ndarray): Numerador de G_n
        gn_den (np.ndarray): Denominador de G_n
    """

    num: np.ndarray
    den: np.ndarray
    gn_num: np.ndarray
    gn_den: np.ndarray
    ts: Optional[float] = None

    def __post_init__(self):
        for name in ("num", "den", "gn_num", "gn_den"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "q_num": self.num.tolist(),
            "q_den": self.den.tolist(),
            "gn_num": self.gn_num.tolist(),
            "gn_den": self.gn_den.tolist(),
        }
