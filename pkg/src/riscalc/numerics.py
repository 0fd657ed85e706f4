"""Special functions used by the analytic expressions.

Thin, validated wrappers around :mod:`scipy.special`. All functions accept
scalars or array-likes and return ``float`` for scalar input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, ValidationError

__all__ = [
    "Tolerance",
    "ln_gamma",
    "reg_lower_inc_gamma",
    "gaussian_q",
    "bessel_k",
]


@dataclass(frozen=True)
class Tolerance:
    """Stopping rule for iterative procedures."""

    abs_tol: float = 1e-6
    rel_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValidationError(f"rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError(f"max_iter must be a positive integer, got {self.max_iter}")


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def ln_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("ln_gamma requires x > 0")
    return _out(special.gammaln(x))


def reg_lower_inc_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``.

    Parameters
    ----------
    a : float or array_like
        Shape, strictly positive (non-integer values allowed).
    x : float or array_like
        Upper integration limit, nonnegative. ``inf`` maps to 1.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("reg_lower_inc_gamma requires a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("reg_lower_inc_gamma requires x >= 0")
    return _out(np.clip(special.gammainc(a, x), 0.0, 1.0))


def gaussian_q(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt(2)) / 2``."""
    x = np.asarray(x, dtype=float)
    return _out(0.5 * special.erfc(x / np.sqrt(2.0)))


def bessel_k(nu, x):
    """Modified Bessel function of the second kind ``K_nu(x)``, real order, ``x > 0``."""
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("bessel_k requires x > 0")
    # K is even in its order; folding keeps the symmetry exact
    return _out(special.kv(np.abs(nu), x))
