"""
Tipos del programa cónico convexificado: formas afines sobre el vector de decisión
x = [h_0..h_qn, t_0..t_qd, ζ, M, g₁, g₂], bloques hermíticos 2×2, restricciones lineales,
informes de solución y resultado de la síntesis.

g₁ = γ₁·ζ_c² y g₂ = γ₂·M_c² son las variables auxiliares escaladas por el punto de
linealización; γ₁ y γ₂ se recuperan al exportar.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from synth_core.helpers.polynomials import eval_poly
from synth_core.models.controller import ControllerParams, WeightSpec

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class VariableLayout:
    """Posición de cada variable de decisión dentro de x."""

    qn: int
    qd: int

    @property
    def h(self) -> slice:
        return slice(0, self.qn + 1)

    @property
    def t(self) -> slice:
        return slice(self.qn + 1, self.qn + self.qd + 2)

    @property
    def zeta(self) -> int:
        return self.qn + self.qd + 2

    @property
    def m(self) -> int:
        return self.zeta + 1

    @property
    def g1(self) -> int:
        return self.zeta + 2

    @property
    def g2(self) -> int:
        return self.zeta + 3

    @property
    def size(self) -> int:
        return self.zeta + 4

    def pack(self, h, t, zeta: float = 0.0, m_var: float = 0.0, g1: float = 0.0,
             g2: float = 0.0) -> np.ndarray:
        x = np.zeros(self.size)
        x[self.h] = h
        x[self.t] = t
        x[[self.zeta, self.m, self.g1, self.g2]] = [zeta, m_var, g1, g2]
        return x

    def unit(self, index: int) -> np.ndarray:
        e = np.zeros(self.size)
        e[index] = 1.0
        return e


@dataclass(frozen=True, eq=False)
class AffineExpr:
    """Expresión real coef·x + const."""

    coef: np.ndarray
    const: float = 0.0

    def evaluate(self, x) -> float:
        return float(self.coef @ np.asarray(x, dtype=float) + self.const)

    def scaled(self, factor: float) -> "AffineExpr":
        return AffineExpr(self.coef * factor, self.const * factor)


@dataclass(frozen=True, eq=False)
class ComplexAffine:
    """Expresión compleja coef·x + const (x real)."""

    coef: np.ndarray
    const: complex = 0.0

    def evaluate(self, x) -> complex:
        return complex(self.coef @ np.asarray(x, dtype=float) + self.const)

    def scaled(self, factor) -> "ComplexAffine":
        return ComplexAffine(self.coef * factor, self.const * factor)


@dataclass(frozen=True, eq=False)
class HermitianBlock:
    """
    Restricción [[a, b], [b*, c]] ⪰ 0 con a, c reales afines y b complejo afín.

    Attributes:
        kind (str): margin | sensitivity | comp_sensitivity | aux_zeta | aux_m
        a (AffineExpr): Entrada (1,1)
        b (ComplexAffine): Entrada (1,2)
        c (AffineExpr): Entrada (2,2)
        config (str, optional): Configuración (None en bloques globales)
        omega_index (int, optional): Índice de frecuencia (None en bloques globales)
    """

    kind: str
    a: AffineExpr
    b: ComplexAffine
    c: AffineExpr
    config: Optional[str] = None
    omega_index: Optional[int] = None

    def min_eigenvalue(self, x) -> float:
        a, b, c = self.a.evaluate(x), self.b.evaluate(x), self.c.evaluate(x)
        return 0.5 * (a + c) - float(np.hypot(0.5 * (a - c), abs(b)))

    def residual(self, x) -> float:
        return max(0.0, -self.min_eigenvalue(x))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "config": self.config,
            "omega_index": self.omega_index,
            "a": {"coef": self.a.coef.tolist(), "const": self.a.const},
            "b": {"coef_re": self.b.coef.real.tolist(), "coef_im": self.b.coef.imag.tolist(),
                  "const_re": complex(self.b.const).real, "const_im": complex(self.b.const).imag},
            "c": {"coef": self.c.coef.tolist(), "const": self.c.const},
        }


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """Restricción expr ≥ 0."""

    kind: str
    expr: AffineExpr
    config: Optional[str] = None
    omega_index: Optional[int] = None

    def residual(self, x) -> float:
        return max(0.0, -self.expr.evaluate(x))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "config": self.config, "omega_index": self.omega_index,
                "coef": self.expr.coef.tolist(), "const": self.expr.const}


@dataclass(frozen=True, eq=False)
class LinearizationPoint:
    """
    Punto de linealización de una iteración: controlador previo (h_c, t_c), ζ_c y M_c.
    """

    hc: np.ndarray
    tc: np.ndarray
    zeta_c: float
    m_c: float

    def __post_init__(self):
        object.__setattr__(self, "hc", np.array(self.hc, dtype=float).reshape(-1))
        object.__setattr__(self, "tc", np.array(self.tc, dtype=float).reshape(-1))
        if self.zeta_c <= 0:
            raise ValueError(f"ζ_c debe ser positivo: {self.zeta_c}")
        if not 0 < self.m_c <= 1:
            raise ValueError(f"M_c debe estar en (0, 1]: {self.m_c}")

    @property
    def params(self) -> ControllerParams:
        return ControllerParams(self.hc, self.tc)

    def check_denominator(self, omega, tol: float = 1e-300) -> None:
        """Raises ValueError si D(e^{jω}, t_c) se anula en la rejilla."""
        if np.any(np.abs(eval_poly(self.tc, omega)) < tol):
            raise ValueError("D_c se anula en la rejilla")

    def to_dict(self) -> Dict[str, Any]:
        return {"hc": self.hc.tolist(), "tc": self.tc.tolist(), "zeta_c": self.zeta_c, "m_c": self.m_c}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "LinearizationPoint":
        return cls(payload["hc"], payload["tc"], float(payload["zeta_c"]), float(payload["m_c"]))


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """
    Programa convexo de una iteración: maximizar objective·x sujeto a bloques y restricciones.
    """

    layout: VariableLayout
    objective: np.ndarray
    blocks: Tuple[HermitianBlock, ...]
    linear: Tuple[LinearConstraint, ...]
    lin: LinearizationPoint
    spec: WeightSpec

    def count(self, kind: str) -> int:
        return (sum(1 for block in self.blocks if block.kind == kind)
                + sum(1 for constraint in self.linear if constraint.kind == kind))

    @property
    def kinds(self) -> List[str]:
        return sorted({block.kind for block in self.blocks} | {c.kind for c in self.linear})

    def residuals(self, x) -> Dict[str, float]:
        """Máximo residuo por tipo de restricción en el punto x."""
        residuals = {kind: 0.0 for kind in self.kinds}
        for block in self.blocks:
            residuals[block.kind] = max(residuals[block.kind], block.residual(x))
        for constraint in self.linear:
            residuals[constraint.kind] = max(residuals[constraint.kind], constraint.residual(x))
        return residuals

    def violated(self, x, tol: float = 0.0) -> List[Dict[str, Any]]:
        """Lista de restricciones violadas en x, con su ubicación."""
        found = []
        for item in list(self.blocks) + list(self.linear):
            value = item.residual(x)
            if value > tol:
                found.append({"kind": item.kind, "config": item.config,
                              "omega_index": item.omega_index, "residual": value})
        return found

    def dump(self, path: str) -> str:
        """Volcado JSON del programa para depuración."""
        payload = {
            "qn": self.layout.qn,
            "qd": self.layout.qd,
            "objective": self.objective.tolist(),
            "linearization": self.lin.to_dict(),
            "blocks": [block.to_dict() for block in self.blocks],
            "linear": [constraint.to_dict() for constraint in self.linear],
        }
        with open(path, "w", encoding="utf-8") as file:
            json.dump(payload, file, indent=2, sort_keys=True)
        logger.debug(f"Programa volcado en {path}")
        return path


@dataclass(frozen=True, eq=False)
class Candidate:
    """Valores de decisión devueltos por el solver (γ sin escalar)."""

    params: ControllerParams
    zeta: float
    m_var: float
    gamma1: float
    gamma2: float

    @property
    def objective_terms(self) -> Tuple[float, float]:
        return self.zeta, self.m_var


@dataclass(frozen=True)
class SolveReport:
    """
    Resultado de una llamada al solver.

    Attributes:
        status (str): optimal | infeasible | numerical-failure
        objective (float): ζ + αM (nan si no hay solución)
        iterations (int): Iteraciones internas del solver
        residuals (Dict[str, float]): Máximo residuo por tipo de restricción
        solver (str): Nombre del solver usado
    """

    status: str
    objective: float = float("nan")
    iterations: int = 0
    residuals: Dict[str, float] = field(default_factory=dict)
    solver: str = ""
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


@dataclass(frozen=True)
class SynthesisOptions:
    """Opciones del lazo de programación convexa secuencial."""

    tol_obj: float = 1e-4
    max_iter: int = 50
    zeta_init_hz: float = 0.1
    solver: Optional[str] = None
    backend: str = "soc"
    monotone_tol: float = 1e-6


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    """
    Controlador convergido con traza del objetivo y datos para certificar.

    Attributes:
        params (ControllerParams): (h, t) normalizados, max|t| = 1
        zeta (float): ζ alcanzado en rad/s
        m_var (float): M alcanzado
        gamma1 (float): γ₁ de la última iteración aceptada
        gamma2 (float): γ₂ de la última iteración aceptada
        objective_trace (List[float]): ζ + αM por iteración
        converged (bool): False si se agotó max_iter o hubo fallo del solver a mitad
        lin_history (Tuple[LinearizationPoint, ...]): Puntos de linealización usados
        residuals (Dict[str, float]): Residuos del último solve aceptado
        replay (Dict[str, Any]): Verificación de las restricciones originales en la rejilla
        spec (WeightSpec): Pesos usados
        ts (float): Periodo de muestreo
        certificate (Dict[str, Any], optional): Certificado de estabilidad adjunto
    """

    params: ControllerParams
    zeta: float
    m_var: float
    gamma1: float
    gamma2: float
    objective_trace: List[float]
    converged: bool
    lin_history: Tuple[LinearizationPoint, ...]
    residuals: Dict[str, float]
    replay: Dict[str, Any]
    spec: WeightSpec
    ts: float
    certificate: Optional[Dict[str, Any]] = None
    status: str = "converged"

    @property
    def iterations(self) -> int:
        return len(self.objective_trace)

    @property
    def objective(self) -> float:
        return self.zeta + self.spec.alpha * self.m_var

    def to_dict(self) -> Dict[str, Any]:
        return {
            "controller": dict(self.params.to_dict(), ts=self.ts),
            "zeta": self.zeta,
            "zeta_hz": self.zeta / (2.0 * np.pi),
            "m": self.m_var,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "objective": self.objective,
            "objective_trace": list(self.objective_trace),
            "converged": self.converged,
            "status": self.status,
            "residuals": dict(self.residuals),
            "replay": self.replay,
            "weights": {"sigma": self.spec.sigma, "tau": self.spec.tau, "n": self.spec.n,
                        "alpha": self.spec.alpha},
            "lin_history": [lin.to_dict() for lin in self.lin_history],
            "certificate": self.certificate,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SynthesisResult":
        controller = payload["controller"]
        weights = payload["weights"]
        return cls(
            params=ControllerParams.from_dict(controller),
            zeta=float(payload["zeta"]),
            m_var=float(payload["m"]),
            gamma1=float(payload["gamma1"]),
            gamma2=float(payload["gamma2"]),
            objective_trace=[float(v) for v in payload["objective_trace"]],
            converged=bool(payload["converged"]),
            lin_history=tuple(LinearizationPoint.from_dict(p) for p in payload.get("lin_history", [])),
            residuals={k: float(v) for k, v in payload.get("residuals", {}).items()},
            replay=payload.get("replay", {}),
            spec=WeightSpec(float(weights["sigma"]), float(weights["tau"]), int(weights["n"]),
                            float(weights["alpha"])),
            ts=float(controller["ts"]),
            certificate=payload.get("certificate"),
            status=payload.get("status", "converged"),
        )
