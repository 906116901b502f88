"""
Bloques convexos en un punto (ω, configuración).

La linealización interna de |P|², con P = D + G·N y P_c = D_c + G·N_c, es
Φ = 2·Re(P_c*·P) − |P_c|² ≤ |P|². Cada bloque se escala por 1/|P_c| en la fila de Φ
(congruencia, el conjunto factible no cambia). Las auxiliares se usan escaladas:
g₁ = γ₁ζ_c² y g₂ = γ₂M_c².
"""
from typing import Optional, Tuple

import numpy as np

from convexify.models.conic_program import (
    AffineExpr, ComplexAffine, HermitianBlock, LinearConstraint, LinearizationPoint, VariableLayout,
)
from synth_core.helpers.polynomials import eval_poly, powers
from synth_core.helpers.weights import w3_shape
from synth_core.models.controller import WeightSpec

EPS_WIND = 1e-9


def _numerator_row(layout: VariableLayout, G: complex, omega: float) -> np.ndarray:
    """Fila compleja tal que row·x = G·N(e^{jω}, h)."""
    row = np.zeros(layout.size, dtype=complex)
    row[layout.h] = G * powers(layout.qn, omega)[0]
    return row


def _denominator_row(layout: VariableLayout, omega: float) -> np.ndarray:
    """Fila compleja tal que row·x = D(e^{jω}, t)."""
    row = np.zeros(layout.size, dtype=complex)
    row[layout.t] = powers(layout.qd, omega)[0]
    return row


def linearized_p(G: complex, lin: LinearizationPoint, omega: float) -> complex:
    """P_c = D_c + G·N_c."""
    return eval_poly(lin.tc, omega) + G * eval_poly(lin.hc, omega)


def phi_affine(G: complex, layout: VariableLayout, lin: LinearizationPoint, omega: float) -> AffineExpr:
    """
    Φ = 2·Re(P_c*·P) − |P_c|² como forma afín real sobre x.

    Args:
        G (complex): Respuesta de la planta en ω
        layout (VariableLayout): Posición de h y t en x
        lin (LinearizationPoint): Punto de linealización
        omega (float): Frecuencia en rad/muestra

    Returns:
        AffineExpr: Φ(x)
    """
    p_c = linearized_p(G, lin, omega)
    p_row = _numerator_row(layout, G, omega) + _denominator_row(layout, omega)
    return AffineExpr(2.0 * np.real(np.conj(p_c) * p_row), -abs(p_c) ** 2)


def _constant(layout: VariableLayout, value: float) -> AffineExpr:
    return AffineExpr(np.zeros(layout.size), value)


def margin_block(G: complex, layout: VariableLayout, lin: LinearizationPoint, sigma: float,
                 omega: float, config: Optional[str] = None,
                 omega_index: Optional[int] = None) -> HermitianBlock:
    """[[Φ, σD], [σD*, 1]] ⪰ 0, suficiente para |σ·S| ≤ 1."""
    scale = 1.0 / abs(linearized_p(G, lin, omega))
    phi = phi_affine(G, layout, lin, omega)
    return HermitianBlock(
        "margin",
        phi.scaled(scale ** 2),
        ComplexAffine(sigma * scale * _denominator_row(layout, omega)),
        _constant(layout, 1.0),
        config, omega_index,
    )


def zeta_aux_block(layout: VariableLayout, lin: LinearizationPoint) -> HermitianBlock:
    """[[2 − g₁, ζ/ζ_c], [ζ/ζ_c, 1]] ⪰ 0, equivalente a γ₁ ≤ 2ζ_c^{-2} − ζ_c^{-4}ζ²."""
    return HermitianBlock(
        "aux_zeta",
        AffineExpr(-layout.unit(layout.g1), 2.0),
        ComplexAffine(layout.unit(layout.zeta) / lin.zeta_c + 0j),
        _constant(layout, 1.0),
    )


def m_aux_block(layout: VariableLayout, lin: LinearizationPoint) -> HermitianBlock:
    """[[2 − g₂, M/M_c], [M/M_c, 1]] ⪰ 0, equivalente a γ₂ ≤ 2M_c^{-2} − M_c^{-4}M²."""
    return HermitianBlock(
        "aux_m",
        AffineExpr(-layout.unit(layout.g2), 2.0),
        ComplexAffine(layout.unit(layout.m) / lin.m_c + 0j),
        _constant(layout, 1.0),
    )


def sensitivity_blocks(G: complex, layout: VariableLayout, lin: LinearizationPoint, omega: float,
                       ts: float, config: Optional[str] = None,
                       omega_index: Optional[int] = None) -> Tuple[HermitianBlock, HermitianBlock]:
    """
    Bloque de sensibilidad [[Φ, D], [D*, ω_phys²γ₁]] ⪰ 0 y su acoplamiento global γ₁–ζ.
    Juntos garantizan |W₂S| ≤ 1 en ω.

    Returns:
        Tuple[HermitianBlock, HermitianBlock]: (bloque en ω, bloque auxiliar global)
    """
    omega_phys = omega / ts
    scale = 1.0 / abs(linearized_p(G, lin, omega))
    phi = phi_affine(G, layout, lin, omega)
    block = HermitianBlock(
        "sensitivity",
        phi.scaled(scale ** 2),
        ComplexAffine(_denominator_row(layout, omega) * (scale * lin.zeta_c / omega_phys)),
        AffineExpr(layout.unit(layout.g1)),
        config, omega_index,
    )
    return block, zeta_aux_block(layout, lin)


def comp_sensitivity_blocks(G: complex, layout: VariableLayout, lin: LinearizationPoint,
                            spec: WeightSpec, omega: float, ts: float, config: Optional[str] = None,
                            omega_index: Optional[int] = None) -> Tuple[HermitianBlock, HermitianBlock]:
    """
    Bloque [[Φ, Y], [Y*, γ₂]] ⪰ 0 con Y = (τ·jω_phys + 1)^n·G·N y su acoplamiento γ₂–M.
    Juntos garantizan |W₃T| ≤ 1 en ω.
    """
    scale = 1.0 / abs(linearized_p(G, lin, omega))
    phi = phi_affine(G, layout, lin, omega)
    y_row = complex(w3_shape(omega, spec, ts)) * _numerator_row(layout, G, omega)
    block = HermitianBlock(
        "comp_sensitivity",
        phi.scaled(scale ** 2),
        ComplexAffine(y_row * (scale * lin.m_c)),
        AffineExpr(layout.unit(layout.g2)),
        config, omega_index,
    )
    return block, m_aux_block(layout, lin)


def winding_guards(G: complex, layout: VariableLayout, lin: LinearizationPoint, omega: float,
                   config: Optional[str] = None,
                   omega_index: Optional[int] = None) -> Tuple[LinearConstraint, LinearConstraint]:
    """
    2·Re(P_c*P) ≥ ε|P_c|² y 2·Re(D_c*D) ≥ ε|D_c|² (ε = 1e-9), normalizadas.
    Mantienen wno(P) = wno(P_c) y wno(D) = wno(D_c).
    """
    p_c = linearized_p(G, lin, omega)
    d_c = eval_poly(lin.tc, omega)
    p_row = _numerator_row(layout, G, omega) + _denominator_row(layout, omega)
    d_row = _denominator_row(layout, omega)
    guard_p = AffineExpr(2.0 * np.real(np.conj(p_c) * p_row) / abs(p_c) ** 2, -EPS_WIND)
    guard_d = AffineExpr(2.0 * np.real(np.conj(d_c) * d_row) / abs(d_c) ** 2, -EPS_WIND)
    return (LinearConstraint("winding_p", guard_p, config, omega_index),
            LinearConstraint("winding_d", guard_d, config, omega_index))
