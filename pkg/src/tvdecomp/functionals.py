"""Scalar kernels and discrete energies.

All kernels are vectorized over numpy arrays and accept Python scalars.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CoefficientPair, Grid, forward_diff

SGN_TOL = 1e-6


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, x, tol=SGN_TOL):
        return self.lo - tol <= x <= self.hi + tol

    def distance(self, x):
        return max(self.lo - x, x - self.hi, 0.0)


def _check_eps(eps):
    if np.any(np.asarray(eps) < 0) or np.any(np.isnan(eps)):
        raise ValueError(f"regularization eps must be >= 0, got {eps!r}")


def f_eps(eps, y):
    """sqrt(eps^2 + y^2); eps = 0 gives |y|."""
    _check_eps(eps)
    return np.hypot(eps, y)


def f_eps_prime(eps, y):
    """Derivative y / sqrt(eps^2 + y^2), always in [-1, 1].

    At eps = 0 this is sign(y) and undefined at y = 0, where the
    subdifferential is the whole interval :func:`sgn_interval` (0).
    """
    _check_eps(eps)
    y = np.asarray(y, dtype=float)
    if np.any((np.asarray(eps) == 0) & (y == 0)):
        raise ValueError("f_eps_prime(0, 0) is set-valued; use sgn_interval(0)")
    out = y / np.hypot(eps, y)
    # hypot can round a hair below |y|
    out = np.clip(out, -1.0, 1.0)
    return out[()] if out.ndim == 0 else out


def f_eps_second(eps, y):
    """eps^2 / (eps^2 + y^2)^{3/2}, for eps > 0."""
    r = np.hypot(eps, y)
    return (eps / r) ** 2 / r


def sgn_interval(xi) -> Interval:
    if xi > 0:
        return Interval(1.0, 1.0)
    if xi < 0:
        return Interval(-1.0, -1.0)
    return Interval(-1.0, 1.0)


def soft_threshold(a, b, r):
    """Dead-zone inverse ([r - a]^+ - [r + a]^-) / b of r -> a Sgn(r) + b r."""
    if np.any(np.asarray(b) <= 0):
        raise ValueError(f"soft_threshold needs b > 0, got {b!r}")
    if np.any(np.asarray(a) < 0):
        raise ValueError(f"soft_threshold needs a >= 0, got {a!r}")
    r = np.asarray(r, dtype=float)
    out = (np.maximum(r - a, 0.0) + np.minimum(r + a, 0.0)) / b
    return out[()] if out.ndim == 0 else out


def rho_apply(a, b, r, s, tol=0.0):
    """a*s + b*r for a selection s of Sgn(r)."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    lo = np.where(r > 0, 1.0, -1.0)
    hi = np.where(r < 0, -1.0, 1.0)
    if np.any((s < lo - tol) | (s > hi + tol)):
        raise ValueError("selection s is not in Sgn(r)")
    out = a * s + b * r
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class EnergyBreakdown:
    v_alpha: float
    w_beta: float
    total: float
    epsilon: float


def singular_energy(eps, g, coeffs: CoefficientPair, grid: Grid) -> float:
    return float(np.sum(coeffs.alpha_cells * f_eps(eps, g)) * grid.h_x)


def quadratic_energy(g, coeffs: CoefficientPair, grid: Grid) -> float:
    return float(0.5 * np.sum(coeffs.beta_cells * g * g) * grid.h_x)


def energy_from_gradient(eps, g, coeffs: CoefficientPair, grid: Grid) -> EnergyBreakdown:
    v = singular_energy(eps, g, coeffs, grid)
    w = quadratic_energy(g, coeffs, grid)
    return EnergyBreakdown(v, w, v + w, float(eps))


def eval_energy(eps, theta, coeffs: CoefficientPair, grid: Grid) -> EnergyBreakdown:
    """Midpoint-per-cell quadrature of the regularized energy.

    ``eps = 0`` gives the weighted total variation plus the weighted
    Dirichlet energy, valid on grid functions since they are piecewise
    linear.
    """
    _check_eps(eps)
    return energy_from_gradient(eps, forward_diff(theta, grid), coeffs, grid)
