"""
Evaluación de polinomios en la circunferencia unidad, z = e^{jω}.
Los coeficientes van en potencias ascendentes: c[k] multiplica z^k.
"""
import numpy as np
from numpy.polynomial import polynomial as P


def eval_poly(coeffs, omega):
    """
    Σ coeffs[k]·e^{jωk} por recurrencia de Horner.

    Args:
        coeffs (array-like): Coeficientes reales, no vacío
        omega (float | np.ndarray): Frecuencia(s) en rad/muestra

    Returns:
        complex | np.ndarray: Valor del polinomio en z = e^{jω}
    """
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.size == 0:
        raise ValueError("El polinomio necesita al menos un coeficiente")
    z = np.exp(1j * np.asarray(omega, dtype=float))
    acc = np.full_like(z, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc if acc.ndim else complex(acc)


def powers(order: int, omega) -> np.ndarray:
    """Matriz (n_omega, order+1) de potencias z^k; eval_poly(c, ω) = powers(...) @ c."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    return np.exp(1j * np.outer(omega, np.arange(order + 1)))


def eval_rational(num, den, omega):
    """num(z)/den(z) en z = e^{jω}."""
    return eval_poly(num, omega) / eval_poly(den, omega)


def degree(coeffs, tol: float = 0.0) -> int:
    """Grado efectivo (−1 para el polinomio nulo)."""
    trimmed = P.polytrim(np.asarray(coeffs, dtype=float), tol)
    if trimmed.size == 1 and trimmed[0] == 0.0:
        return -1
    return trimmed.size - 1
