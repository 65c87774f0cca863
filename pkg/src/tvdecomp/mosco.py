"""Finite-sample witnesses that Phi^eps -> Phi in the sense of Mosco."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .functionals import energy_from_gradient, f_eps
from .grid import CoefficientPair, Grid, forward_diff, nodal, weighted_norm
from .resolvent import EpsSchedule, _newton, apriori_terms, solve_resolvent


def m2_gap(eps, theta, coeffs: CoefficientPair, grid: Grid):
    """(Phi^eps(theta) - Phi(theta), eps * sum alpha h_x).

    The gap is summed cellwise as alpha h_x eps * (eps / (f_eps(g) + |g|)),
    algebraically equal to the energy difference but free of cancellation,
    so 0 <= gap <= bound holds in floating point as well.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    g = np.abs(forward_diff(theta, grid))
    weight = coeffs.alpha_cells * grid.h_x * eps
    bound = float(np.sum(weight))
    if eps == 0:
        return 0.0, bound
    denom = f_eps(eps, g) + g
    ratio = np.minimum(eps / denom, 1.0)
    gap = float(np.sum(weight * ratio))
    if not 0.0 <= gap <= bound:
        raise AssertionError(f"M2 bound violated: gap {gap!r} not in [0, {bound!r}]")
    return gap, bound


@dataclass
class MoscoStudy:
    eps_values: list[float]
    gaps: list[float]
    bounds: list[float]
    solution_increments: list[float]
    energy_trace: list[float]
    phi_values: list[float] = field(default_factory=list)
    apriori_ok: list[bool] = field(default_factory=list)
    limit_energy: float = float("nan")
    warnings: list[str] = field(default_factory=list)

    def energy_increments(self):
        e = self.energy_trace
        return [abs(b - a) for a, b in zip(e, e[1:])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["eps", "gap", "bound", "increment", "energy", "phi"])
        for row in zip(self.eps_values, self.gaps, self.bounds, self.solution_increments,
                       self.energy_trace, self.phi_values):
            wr.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _monotone_tail(values, tail=3):
    v = list(values)[-tail:]
    return all(b <= a for a, b in zip(v, v[1:]))


def graph_convergence_study(h, coeffs: CoefficientPair, grid: Grid, eps_list, tol=1e-10,
                            max_newton=100, limit=None) -> MoscoStudy:
    """Warm-started resolvents theta^eps along ``eps_list``.

    ``limit`` is the eps = 0 resolvent used for the energy limit; by default
    it is computed with the standard continuation schedule.  The gap
    Phi^eps(theta^eps) - Phi(theta^eps) is recorded with its bound.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or min(eps_list) <= 0:
        raise ValueError("eps_list must be positive and strictly decreasing")
    h = np.array(nodal(h, grid), dtype=float)
    theta = h.copy()
    g = forward_diff(theta, grid)
    prev = theta.copy()
    study = MoscoStudy([], [], [], [], [])
    for eps in eps_list:
        theta, g, _, _ = _newton(eps, h, coeffs, grid, theta, g, tol, max_newton)
        study.eps_values.append(eps)
        study.solution_increments.append(weighted_norm(theta - prev, grid))
        prev = theta.copy()
        study.energy_trace.append(energy_from_gradient(eps, g, coeffs, grid).total)
        study.phi_values.append(energy_from_gradient(0.0, g, coeffs, grid).total)
        gap, bound = m2_gap(eps, theta, coeffs, grid)
        study.gaps.append(gap)
        study.bounds.append(bound)
        lhs, rhs = apriori_terms(theta, g, h, coeffs, grid)
        study.apriori_ok.append(lhs <= rhs * (1 + 1e-10))
    if limit is None:
        limit = solve_resolvent(h, coeffs, grid, EpsSchedule(newton_tol=tol, max_newton=max_newton))
    study.limit_energy = energy_from_gradient(0.0, limit.dtheta, coeffs, grid).total
    incs = study.solution_increments[1:]
    if len(incs) >= 3 and not _monotone_tail(incs):
        study.warnings.append("solution increments not monotone over the last three levels")
    if len(study.energy_trace) >= 4 and not _monotone_tail(study.energy_increments()):
        study.warnings.append("energy increments not monotone over the last three levels")
    return study


@dataclass
class M1Witness:
    eps_values: list[float]
    phi_values: list[float]
    phi_limit: float
    tail_min: float
    tol: float

    @property
    def holds(self):
        return self.tail_min >= self.phi_limit - self.tol

    def rows(self):
        return list(zip(self.eps_values, self.phi_values))


def m1_refinement_witness(h, coeffs: CoefficientPair, grid: Grid, eps_list, tol=1e-6, tail=3,
                          study: MoscoStudy | None = None) -> M1Witness:
    """Tabulate Phi(theta^eps_k) and compare the tail minimum with Phi(theta^0)."""
    study = study or graph_convergence_study(h, coeffs, grid, eps_list)
    phis = list(study.phi_values)
    w = M1Witness(list(study.eps_values), phis, study.limit_energy, min(phis[-tail:]), tol)
    if not w.holds:
        raise AssertionError(
            f"lower-bound witness failed: tail min {w.tail_min!r} < {w.phi_limit!r} - {tol}"
        )
    return w
