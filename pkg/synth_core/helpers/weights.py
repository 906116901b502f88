"""
Funciones de ponderación del programa: W₁ (margen de módulo), W₂ (ancho de banda de S)
y W₃ (filtro paso bajo de orden n sobre T). W₂ y W₃ se evalúan en frecuencia física.
"""
import numpy as np

from synth_core.models.controller import WeightSpec


def _omega_phys(omega, ts: float) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("W₂ es singular en ω = 0; la rejilla debe excluir DC")
    return omega / ts


def weight_w1(spec: WeightSpec) -> float:
    return spec.sigma


def weight_w2(zeta, omega, ts: float):
    """W₂ = ζ/(j·ω_phys). `zeta` puede ser un número o un objeto con atributo `zeta`."""
    zeta = getattr(zeta, "zeta", zeta)
    return zeta / (1j * _omega_phys(omega, ts))


def w3_shape(omega, spec: WeightSpec, ts: float):
    """(τ·j·ω_phys + 1)^n, la parte de W₃ que no depende de M."""
    omega_phys = np.asarray(omega, dtype=float) / ts
    return (spec.tau * 1j * omega_phys + 1.0) ** spec.n


def weight_w3(m_var: float, omega, spec: WeightSpec, ts: float):
    """W₃ = M·(τ·j·ω_phys + 1)^n."""
    return m_var * w3_shape(omega, spec, ts)
