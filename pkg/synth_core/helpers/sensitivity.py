"""
Ganancia de lazo y funciones de sensibilidad del DOB reparametrizado.
"""
import logging

import numpy as np

from synth_core.helpers.polynomials import eval_poly
from utils.errors import ClosedLoopSingularityError, SingularDenominatorError

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-300


def loop_gain(G, h, t, omega):
    """
    L = G·N(e^{jω},h)/D(e^{jω},t).

    Raises:
        SingularDenominatorError: Si |D| < 1e-300 en algún ω
    """
    d = eval_poly(t, omega)
    if np.any(np.abs(d) < SINGULAR_TOL):
        logger.error("Denominador D singular en la rejilla")
        raise SingularDenominatorError("D(e^{jω}, t) es singular en la rejilla")
    return np.asarray(G) * eval_poly(h, omega) / d


def closed_loop_denominator(G, h, t, omega):
    """P = D + G·N."""
    return eval_poly(t, omega) + np.asarray(G) * eval_poly(h, omega)


def sensitivities(G, h, t, omega):
    """
    S y T sobre el denominador común P = D + G·N.

    T = G·N/P y S = 1 − T, de modo que S + T = 1 tal cual se calcula.

    Returns:
        Tuple: (S, T)

    Raises:
        ClosedLoopSingularityError: Si |P| < 1e-300 en algún ω
    """
    gn = np.asarray(G) * eval_poly(h, omega)
    p = eval_poly(t, omega) + gn
    if np.any(np.abs(p) < SINGULAR_TOL):
        logger.error("Denominador de lazo cerrado D + GN singular")
        raise ClosedLoopSingularityError("D + G·N es singular en la rejilla")
    t_value = gn / p
    return 1.0 - t_value, t_value
