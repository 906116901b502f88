"""
Ensamblado del programa convexo completo de una iteración.
"""
import logging
from typing import List, Tuple

import numpy as np

from convexify.helpers.blocks import (
    comp_sensitivity_blocks, margin_block, sensitivity_blocks, winding_guards,
)
from convexify.models.conic_program import (
    AffineExpr, ConicProgram, HermitianBlock, LinearConstraint, LinearizationPoint, VariableLayout,
)
from frf.models.frf_dataset import FrfDataset
from synth_core.models.controller import WeightSpec

logger = logging.getLogger(__name__)

EPS_POS = 1e-9


def _bounds(layout: VariableLayout, spec: WeightSpec, lin: LinearizationPoint) -> List[LinearConstraint]:
    """0 < ζ < τ^{-n}, 0 < M ≤ 1, γ₁, γ₂ > 0 (estrictas con margen relativo 1e-9)."""
    e = layout.unit
    return [
        LinearConstraint("bounds", AffineExpr(e(layout.zeta), -EPS_POS * lin.zeta_c)),
        LinearConstraint("bounds", AffineExpr(-e(layout.zeta), spec.zeta_max * (1.0 - EPS_POS))),
        LinearConstraint("bounds", AffineExpr(e(layout.m), -EPS_POS * lin.m_c)),
        LinearConstraint("bounds", AffineExpr(-e(layout.m), 1.0)),
        LinearConstraint("bounds", AffineExpr(e(layout.g1), -EPS_POS)),
        LinearConstraint("bounds", AffineExpr(e(layout.g2), -EPS_POS)),
    ]


def assemble(dataset: FrfDataset, spec: WeightSpec, lin: LinearizationPoint,
             orders: Tuple[int, int]) -> ConicProgram:
    """
    Instancia todos los bloques para cada (ω, configuración) más los dos bloques auxiliares.

    Args:
        dataset (FrfDataset): FRFs de la articulación
        spec (WeightSpec): Pesos de diseño
        lin (LinearizationPoint): Punto de linealización (órdenes iguales a `orders`)
        orders (Tuple[int, int]): (qn, qd)

    Returns:
        ConicProgram: Programa que maximiza ζ + αM
    """
    qn, qd = orders
    if lin.hc.size != qn + 1 or lin.tc.size != qd + 1:
        raise ValueError("Los órdenes del punto de linealización no coinciden con (qn, qd)")
    layout = VariableLayout(qn, qd)
    grid = dataset.grid
    lin.check_denominator(grid.omega)

    blocks: List[HermitianBlock] = []
    linear: List[LinearConstraint] = []
    aux_blocks = None
    for config in dataset.configurations:
        for index, (omega, G) in enumerate(zip(grid.omega, config.response)):
            omega, G = float(omega), complex(G)
            blocks.append(margin_block(G, layout, lin, spec.sigma, omega, config.label, index))
            sens, aux_zeta = sensitivity_blocks(G, layout, lin, omega, grid.ts, config.label, index)
            comp, aux_m = comp_sensitivity_blocks(G, layout, lin, spec, omega, grid.ts, config.label, index)
            blocks.extend([sens, comp])
            linear.extend(winding_guards(G, layout, lin, omega, config.label, index))
            if aux_blocks is None:
                aux_blocks = (aux_zeta, aux_m)
    blocks.extend(aux_blocks)
    linear.extend(_bounds(layout, spec, lin))

    objective = layout.unit(layout.zeta) + spec.alpha * layout.unit(layout.m)
    program = ConicProgram(layout, objective, tuple(blocks), tuple(linear), lin, spec)
    logger.debug(
        f"Programa ensamblado: {len(blocks)} bloques 2×2, {len(linear)} restricciones lineales, "
        f"{layout.size} variables"
    )
    return program
