"""Resolvent (I + dPhi)^{-1} h of the weighted regularized TV energy.

For eps > 0 the smooth resolvent is the unique minimizer of

    E(theta) = 1/2 |theta - h|_w^2 + sum_i h_x (alpha_i f_eps(D theta_i)
               + 1/2 beta_i (D theta_i)^2)

found by damped Newton with the exact tridiagonal Hessian.  The eps = 0
resolvent is reached by geometric eps-continuation with warm starts.

The Newton state keeps the cell gradient ``g`` next to the nodal values.
At eps ~ 1e-8 the slope (f_eps)'(g) has sensitivity 1/eps, so recomputing
``g`` by differencing O(1) nodal values would leave a residual floor far
above the requested tolerance; updating ``g`` by the differenced Newton
step instead keeps its absolute error proportional to the step size.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConvergenceError
from .functionals import f_eps, f_eps_prime, f_eps_second
from .grid import CoefficientPair, Grid, forward_diff, neg_divergence, nodal, weighted_norm

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
BACKTRACK = 0.5
MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class EpsSchedule:
    eps0: float = 1.0
    ratio: float = 0.25
    eps_min: float = 1e-8
    newton_tol: float = 1e-10
    max_newton: int = 100

    def __post_init__(self):
        if not self.eps0 > self.eps_min > 0:
            raise ValueError(f"need eps0 > eps_min > 0, got {self.eps0}, {self.eps_min}")
        if not 0 < self.ratio < 1:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio}")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if int(self.max_newton) != self.max_newton or self.max_newton < 1:
            raise ValueError("max_newton must be a positive integer")

    def levels(self) -> list[float]:
        """eps0, eps0*ratio, ... down to (and ending exactly at) eps_min."""
        out = []
        eps = self.eps0
        while eps > self.eps_min * (1 + 1e-12):
            out.append(eps)
            eps *= self.ratio
        out.append(self.eps_min)
        return out


@dataclass(frozen=True)
class EpsRecord:
    eps: float
    energy: float
    increment: float
    newton_iterations: int
    residual: float
    # 1/2 |theta|_w^2 + sum beta (D theta)^2 h_x  versus  1/2 |h|_w^2
    apriori_lhs: float
    apriori_rhs: float


@dataclass(frozen=True, eq=False)
class ResolventSolution:
    theta: np.ndarray
    varpi: np.ndarray
    flux: np.ndarray
    theta_star: np.ndarray
    eps_trace: tuple[EpsRecord, ...]
    final_eps: float
    h: np.ndarray
    dtheta: np.ndarray
    residual: float
    warnings: tuple[str, ...] = field(default=())

    @property
    def converged(self):
        return not self.warnings


# ---------------------------------------------------------------- kernels


def _flux(eps, g, coeffs):
    return coeffs.alpha_cells * f_eps_prime(eps, g) + coeffs.beta_cells * g


def _residual(eps, theta, g, h, coeffs, grid):
    return neg_divergence(_flux(eps, g, coeffs), grid) + theta - h


def _energy(eps, theta, g, h, coeffs, grid):
    d = theta - h
    fid = 0.5 * float(np.dot(grid.node_weights, d * d))
    reg = float(np.sum(coeffs.alpha_cells * f_eps(eps, g) + 0.5 * coeffs.beta_cells * g * g))
    return fid + reg * grid.h_x


def _hessian_banded(eps, g, coeffs, grid):
    """Upper banded form of W J = D^T diag(h_x c) D + W, c = alpha f'' + beta."""
    c = coeffs.alpha_cells * f_eps_second(eps, g) + coeffs.beta_cells
    k = c / grid.h_x
    diag = np.array(grid.node_weights, dtype=float)
    diag[:-1] += k
    diag[1:] += k
    ab = np.zeros((2, grid.n + 1))
    ab[0, 1:] = -k
    ab[1] = diag
    return ab


def energy_gradient(eps, theta, h, coeffs: CoefficientPair, grid: Grid) -> np.ndarray:
    """R(theta) = A(alpha f'(D theta) + beta D theta) + theta - h.

    This is the gradient of E in the node-weighted inner product, so
    R = 0 exactly at the minimizer.
    """
    if not eps > 0:
        raise ValueError(f"energy_gradient needs eps > 0, got {eps}")
    theta = nodal(theta, grid)
    h = nodal(h, grid)
    return _residual(eps, theta, forward_diff(theta, grid), h, coeffs, grid)


def smooth_energy(eps, theta, h, coeffs: CoefficientPair, grid: Grid) -> float:
    """E(theta) = Phi^eps(theta) + 1/2 |theta - h|_w^2."""
    theta = nodal(theta, grid)
    return _energy(eps, theta, forward_diff(theta, grid), nodal(h, grid), coeffs, grid)


def newton_jacobian(eps, theta, coeffs: CoefficientPair, grid: Grid) -> np.ndarray:
    """Dense J = A diag(alpha f''(D theta) + beta) D + I (for checks)."""
    ab = _hessian_banded(eps, forward_diff(nodal(theta, grid), grid), coeffs, grid)
    m = np.diag(ab[1]) + np.diag(ab[0, 1:], 1) + np.diag(ab[0, 1:], -1)
    return m / grid.node_weights[:, None]


# ---------------------------------------------------------------- solvers


def _newton(eps, h, coeffs, grid, theta, g, tol, max_iter):
    """Damped Newton from (theta, g); returns (theta, g, iterations, |R|_w)."""
    w = grid.node_weights
    target = tol * (1.0 + weighted_norm(h, grid))
    E = _energy(eps, theta, g, h, coeffs, grid)
    R = _residual(eps, theta, g, h, coeffs, grid)
    rnorm = math.sqrt(float(np.dot(w, R * R)))
    it = 0
    while rnorm > target:
        if it >= max_iter:
            raise ConvergenceError(
                f"Newton stalled at eps={eps:.3g} after {it} iterations "
                f"(residual {rnorm:.3e} > {target:.3e})",
                residual=rnorm, eps=eps, iterations=it,
            )
        it += 1
        delta = solveh_banded(_hessian_banded(eps, g, coeffs, grid), -w * R, check_finite=False)
        dg = np.diff(delta) / grid.h_x
        slope = float(np.dot(w * R, delta))
        # energy differences below this are rounding noise
        noise = 1e-14 * (abs(E) + 1.0)
        t = 1.0
        for _ in range(MAX_BACKTRACKS):
            th_t = theta + t * delta
            g_t = g + t * dg
            E_t = _energy(eps, th_t, g_t, h, coeffs, grid)
            if E_t <= E + ARMIJO_C * t * slope:
                break
            if abs(E_t - E) <= noise:
                R_t = _residual(eps, th_t, g_t, h, coeffs, grid)
                if math.sqrt(float(np.dot(w, R_t * R_t))) < rnorm:
                    break
            t *= BACKTRACK
        theta, g, E = th_t, g_t, E_t
        R = _residual(eps, theta, g, h, coeffs, grid)
        rnorm = math.sqrt(float(np.dot(w, R * R)))
    return theta, g, it, rnorm


def solve_smooth(eps, h, coeffs: CoefficientPair, grid: Grid, tol=1e-10, max_iter=100,
                 theta0=None) -> np.ndarray:
    """theta^eps = (A^eps + I)^{-1} h with |R|_w <= tol (1 + |h|_w)."""
    if not eps > 0:
        raise ValueError(f"solve_smooth needs eps > 0, got {eps}")
    h = np.array(nodal(h, grid), dtype=float)
    theta = h.copy() if theta0 is None else np.array(nodal(theta0, grid), dtype=float)
    theta, _, _, _ = _newton(eps, h, coeffs, grid, theta, forward_diff(theta, grid), tol, max_iter)
    return theta


def apriori_terms(theta, g, h, coeffs, grid):
    lhs = 0.5 * weighted_norm(theta, grid) ** 2 + float(np.sum(coeffs.beta_cells * g * g)) * grid.h_x
    rhs = 0.5 * weighted_norm(h, grid) ** 2
    return lhs, rhs


def _eventually_decreasing(values, tail=3):
    v = list(values)[-tail:]
    return all(b <= a for a, b in zip(v, v[1:]))


def solve_resolvent(h, coeffs: CoefficientPair, grid: Grid, schedule: EpsSchedule | None = None,
                    theta0=None) -> ResolventSolution:
    """(dPhi + I)^{-1} h by eps-continuation down to ``schedule.eps_min``.

    The Sgn selection is read off at the final eps as (f_eps)'(D theta),
    which always lies in [-1, 1] (sign(D theta) on cells with alpha = 0).
    """
    s = schedule or EpsSchedule()
    h = np.array(nodal(h, grid), dtype=float)
    theta = h.copy() if theta0 is None else np.array(nodal(theta0, grid), dtype=float)
    g = forward_diff(theta, grid)
    trace = []
    prev = theta.copy()
    rnorm = float("nan")
    for eps in s.levels():
        theta, g, its, rnorm = _newton(eps, h, coeffs, grid, theta, g, s.newton_tol, s.max_newton)
        inc = weighted_norm(theta - prev, grid)
        prev = theta.copy()
        energy = grid.h_x * float(np.sum(coeffs.alpha_cells * f_eps(eps, g)
                                         + 0.5 * coeffs.beta_cells * g * g))
        lhs, rhs = apriori_terms(theta, g, h, coeffs, grid)
        trace.append(EpsRecord(eps, energy, inc, its, rnorm, lhs, rhs))
        log.debug("eps=%.3g newton=%d residual=%.2e increment=%.2e", eps, its, rnorm, inc)

    warnings = []
    incs = [r.increment for r in trace[1:]]
    if len(incs) >= 3 and not _eventually_decreasing(incs):
        warnings.append("eps-continuation increments are not decreasing over the last levels")
    return extract_solution(h, theta, g, coeffs, grid, s.eps_min, tuple(trace), tuple(warnings))


def extract_solution(h, theta, g, coeffs, grid, eps, trace=(), warnings=()) -> ResolventSolution:
    """Assemble a :class:`ResolventSolution` from a converged state."""
    theta = np.array(theta, dtype=float)
    varpi = np.clip(f_eps_prime(eps, g), -1.0, 1.0)
    # where alpha vanishes the selection never enters the flux; take the
    # exact sign so steep-but-small gradients are not read as flat
    free = coeffs.alpha_cells == 0
    varpi[free] = np.sign(g[free])
    dtheta = forward_diff(theta, grid)
    flux = coeffs.alpha_cells * varpi + coeffs.beta_cells * dtheta
    resid = neg_divergence(flux, grid) + theta - h
    return ResolventSolution(
        theta=theta,
        varpi=varpi,
        flux=flux,
        theta_star=h - theta,
        eps_trace=tuple(trace),
        final_eps=float(eps),
        h=np.array(h, dtype=float),
        dtheta=dtheta,
        residual=weighted_norm(resid, grid),
        warnings=tuple(warnings),
    )


def brute_force_oracle(h, coeffs: CoefficientPair, grid: Grid, iterations=1_000_000,
                       gap_tol=1e-8) -> np.ndarray:
    """Independent minimizer of the eps = 0 discrete resolvent energy."""
    from .oracle import minimize_tv_energy

    return minimize_tv_energy(h, coeffs, grid, iterations=iterations, gap_tol=gap_tol)
