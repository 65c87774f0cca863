"""Staggered 1D grid on (-L, L) with a summation-by-parts pair.

States live at the ``n + 1`` nodes, gradients, fluxes and coefficients at
the ``n`` cell midpoints.  :func:`neg_divergence` is the exact adjoint of
:func:`forward_diff` under the pairing

    sum_i q_i (D phi)_i h_x  =  sum_j A(q)_j phi_j w_j

with trapezoid node weights ``w`` and zero ghost flux outside the domain,
which is how the zero-Neumann / vanishing-flux boundary condition enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import AdmissibilityError, LocationError
from .families import parse_function

Location = Literal["nodes", "cells"]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    L: float
    n: int
    h_x: float
    nodes: np.ndarray
    cell_mids: np.ndarray
    node_weights: np.ndarray

    @property
    def n_nodes(self):
        return self.n + 1

    def refine(self):
        """Grid with every cell halved; old nodes are every other new node."""
        return build_grid(self.L, 2 * self.n)

    def __repr__(self):
        return f"Grid(L={self.L}, n={self.n})"


def build_grid(L: float, n: int) -> Grid:
    if not (isinstance(L, (int, float)) and math.isfinite(L)) or L <= 0:
        raise ValueError(f"half-length L must be finite and positive, got {L!r}")
    if int(n) != n or n < 2:
        raise ValueError(f"cell count n must be an integer >= 2, got {n!r}")
    L, n = float(L), int(n)
    h_x = 2.0 * L / n
    # -L + i*h_x accumulates no error and hits both endpoints exactly
    nodes = -L + h_x * np.arange(n + 1)
    nodes[-1] = L
    if n % 2 == 0:
        nodes[n // 2] = 0.0
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    w = np.full(n + 1, h_x)
    w[0] = w[-1] = 0.5 * h_x
    return Grid(L, n, h_x, _frozen(nodes), _frozen(mids), _frozen(w))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A value array tagged with where it lives on a grid."""

    location: Location
    values: np.ndarray

    def __post_init__(self):
        if self.location not in ("nodes", "cells"):
            raise LocationError(f"unknown location {self.location!r}")
        v = _frozen(self.values)
        if v.ndim != 1:
            raise LocationError("grid functions are one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)

    def check(self, grid: Grid):
        expected = grid.n + 1 if self.location == "nodes" else grid.n
        if self.values.size != expected:
            raise LocationError(
                f"{self.location} function of length {self.values.size} on a grid with n={grid.n}"
            )
        return self


def _values(f, grid: Grid, location: Location) -> np.ndarray:
    if isinstance(f, GridFunction):
        if f.location != location:
            raise LocationError(f"expected a function on {location}, got one on {f.location}")
        f.check(grid)
        return np.asarray(f.values)
    a = np.asarray(f, dtype=float)
    expected = grid.n + 1 if location == "nodes" else grid.n
    if a.shape != (expected,):
        raise LocationError(
            f"expected {expected} values on {location} (n={grid.n}), got shape {a.shape}"
        )
    return a


def nodal(f, grid: Grid) -> np.ndarray:
    """Validate ``f`` as a nodal function and return its values."""
    return _values(f, grid, "nodes")


def cellwise(f, grid: Grid) -> np.ndarray:
    """Validate ``f`` as a cell function and return its values."""
    return _values(f, grid, "cells")


def forward_diff(theta, grid: Grid) -> np.ndarray:
    """(D theta)_i = (theta_{i+1} - theta_i) / h_x on cells."""
    t = nodal(theta, grid)
    return np.diff(t) / grid.h_x


def neg_divergence(q, grid: Grid) -> np.ndarray:
    """Discrete -d/dx of a cell flux, with zero ghost flux at both ends."""
    q = cellwise(q, grid)
    hx = grid.h_x
    out = np.empty(grid.n + 1)
    out[1:-1] = -(q[1:] - q[:-1]) / hx
    out[0] = -q[0] / (0.5 * hx)
    out[-1] = q[-1] / (0.5 * hx)
    return out


def weighted_inner(u, v, grid: Grid) -> float:
    return float(np.dot(grid.node_weights * nodal(u, grid), nodal(v, grid)))


def weighted_norm(u, grid: Grid) -> float:
    u = nodal(u, grid)
    return math.sqrt(float(np.dot(grid.node_weights, u * u)))


def weighted_mean(u, grid: Grid) -> float:
    return float(np.dot(grid.node_weights, nodal(u, grid))) / (2.0 * grid.L)


@dataclass(frozen=True, eq=False)
class CoefficientPair:
    alpha_cells: np.ndarray
    beta_cells: np.ndarray
    alpha_nodes: np.ndarray
    beta_nodes: np.ndarray
    dbeta_cells: np.ndarray
    # the chain rule for the second derivative also needs alpha'
    dalpha_cells: np.ndarray

    @property
    def min_beta(self):
        return float(self.beta_cells.min())

    def scaled(self, tau: float) -> "CoefficientPair":
        """Coefficients of tau * Phi (both parts scale linearly)."""
        t = float(tau)
        return CoefficientPair(
            *(_frozen(t * a) for a in (
                self.alpha_cells, self.beta_cells, self.alpha_nodes,
                self.beta_nodes, self.dbeta_cells, self.dalpha_cells,
            ))
        )


def check_admissible(alpha, beta, where="") -> None:
    amin, bmin = float(np.min(alpha)), float(np.min(beta))
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise AdmissibilityError(f"non-finite coefficient values{where}")
    if amin < 0:
        raise AdmissibilityError(
            f"assumption ass01 violated: min(alpha) = {amin:g} < 0{where}"
        )
    if bmin <= 0:
        raise AdmissibilityError(
            f"assumption ass01 violated: min(beta) = {bmin:g} must be > 0{where}"
        )


def make_coefficients(grid: Grid, alpha_cells, beta_cells, alpha_nodes=None,
                      beta_nodes=None, dbeta_cells=None, dalpha_cells=None) -> CoefficientPair:
    """Coefficient pair from raw arrays; missing nodal values and
    derivatives are filled by averaging/differencing."""
    a = cellwise(alpha_cells, grid)
    b = cellwise(beta_cells, grid)
    check_admissible(a, b)

    def to_nodes(c):
        out = np.empty(grid.n + 1)
        out[1:-1] = 0.5 * (c[1:] + c[:-1])
        out[0], out[-1] = c[0], c[-1]
        return out

    def slope(c):
        cn = to_nodes(c)
        return np.diff(cn) / grid.h_x

    an = to_nodes(a) if alpha_nodes is None else nodal(alpha_nodes, grid)
    bn = to_nodes(b) if beta_nodes is None else nodal(beta_nodes, grid)
    db = slope(b) if dbeta_cells is None else cellwise(dbeta_cells, grid)
    da = slope(a) if dalpha_cells is None else cellwise(dalpha_cells, grid)
    return CoefficientPair(*(_frozen(v) for v in (a, b, an, bn, db, da)))


def sample_coefficients(alpha_spec, beta_spec, grid: Grid) -> CoefficientPair:
    """Sample named families: values at cells and nodes, derivatives at cells."""
    fa = parse_function(alpha_spec)
    fb = parse_function(beta_spec)
    xc, xn = grid.cell_mids, grid.nodes
    a_c, b_c = fa(xc), fb(xc)
    a_n, b_n = fa(xn), fb(xn)
    check_admissible(np.concatenate([a_c, a_n]), np.concatenate([b_c, b_n]), " on the grid")
    return CoefficientPair(
        *(_frozen(v) for v in (a_c, b_c, a_n, b_n, fb.derivative(xc), fa.derivative(xc)))
    )


def sample_function(spec, grid: Grid) -> np.ndarray:
    """Nodal samples of a function spec (used for data h)."""
    return parse_function(spec)(grid.nodes)
