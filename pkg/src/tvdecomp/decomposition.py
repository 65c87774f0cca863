"""Discrete certification of dPhi = dV_alpha + dW_beta on a resolvent.

Every check works on a :class:`ResolventSolution` and returns plain
numbers; :func:`full_report` bundles them into a PASS/FAIL report.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import SGN_TOL, singular_energy, quadratic_energy, soft_threshold
from .grid import CoefficientPair, Grid, forward_diff, neg_divergence, nodal, weighted_inner, weighted_norm
from .resolvent import ResolventSolution

FUNCTIONALS = ("Phi", "V_alpha", "W_beta")

DEFAULT_TOLERANCES = {
    "sgn": 1e-6,
    "chain_rule": 1e-6,
    "el": 1e-8,
    "subgrad": 1e-6,
    "split": 1e-12,
    "h2_formula": 1e-3,
}


def tol_grad(grid: Grid) -> float:
    """Below this |D theta| a cell counts as flat."""
    return 1e-8 / grid.h_x


def split_components(sol: ResolventSolution, coeffs: CoefficientPair, grid: Grid):
    """(u*, w*) = (A(alpha varpi), A(beta D theta)), the dV and dW parts."""
    u_star = neg_divergence(coeffs.alpha_cells * sol.varpi, grid)
    w_star = neg_divergence(coeffs.beta_cells * forward_diff(sol.theta, grid), grid)
    return u_star, w_star


def split_identity_residual(sol, coeffs, grid) -> float:
    u, w = split_components(sol, coeffs, grid)
    return float(np.max(np.abs(neg_divergence(sol.flux, grid) - u - w)))


def check_sgn_inclusion(sol: ResolventSolution, tol=SGN_TOL, grid: Grid | None = None,
                        flat=None) -> float:
    """Largest distance of varpi_i from Sgn(D theta_i) beyond ``tol``.

    Cells with |D theta| <= ``flat`` only need varpi in [-1 - tol, 1 + tol];
    ``flat`` defaults to 1e-8 / h_x.
    """
    g = sol.dtheta
    if flat is None:
        if grid is None:
            raise ValueError("pass the grid or an explicit flatness threshold")
        flat = tol_grad(grid)
    v = np.asarray(sol.varpi)
    viol = np.where(
        g > flat,
        np.abs(v - 1.0),
        np.where(g < -flat, np.abs(v + 1.0), np.maximum(np.abs(v) - 1.0, 0.0)),
    )
    return float(np.max(viol)) if viol.size else 0.0


def check_chain_rule(sol: ResolventSolution, coeffs: CoefficientPair, tol=None) -> float:
    """max_i |D theta_i - soft_threshold(alpha_i, beta_i, flux_i)|."""
    rec = soft_threshold(coeffs.alpha_cells, coeffs.beta_cells, sol.flux)
    return float(np.max(np.abs(sol.dtheta - rec)))


def second_difference(theta, grid: Grid) -> np.ndarray:
    """Centered second difference at the interior nodes 1..n-1."""
    g = forward_diff(theta, grid)
    return np.diff(g) / grid.h_x


def h2_closed_form(flux, coeffs: CoefficientPair, grid: Grid, include_dalpha=True) -> np.ndarray:
    """Chain-rule value of theta'' at the interior nodes from the flux.

    With F the flux and S = [F - alpha]^+ - [F + alpha]^- this is
    (chi_{F > alpha} (F' - alpha') + chi_{F < -alpha} (F' + alpha') - beta' S / beta) / beta.
    ``include_dalpha=False`` drops the alpha' terms, which is only correct
    for constant alpha.
    """
    F_n = 0.5 * (flux[1:] + flux[:-1])
    dF = np.diff(flux) / grid.h_x
    a = 0.5 * (coeffs.alpha_cells[1:] + coeffs.alpha_cells[:-1])
    b = 0.5 * (coeffs.beta_cells[1:] + coeffs.beta_cells[:-1])
    db = 0.5 * (coeffs.dbeta_cells[1:] + coeffs.dbeta_cells[:-1])
    da = 0.5 * (coeffs.dalpha_cells[1:] + coeffs.dalpha_cells[:-1])
    if not include_dalpha:
        da = np.zeros_like(da)
    up = F_n > a
    down = F_n < -a
    S = np.maximum(F_n - a, 0.0) + np.minimum(F_n + a, 0.0)
    lin = np.where(up, dF - da, 0.0) + np.where(down, dF + da, 0.0)
    return lin / b - db * S / (b * b)


def free_boundary_mask(flux, coeffs: CoefficientPair, grid: Grid) -> np.ndarray:
    """Interior nodes within h_x of a cell where |flux| - alpha changes sign."""
    s = np.abs(flux) - coeffs.alpha_cells
    active = s > 0
    # a sign change between cells i and i+1 marks both as free-boundary cells
    fb_cell = np.zeros(grid.n, dtype=bool)
    change = active[1:] != active[:-1]
    fb_cell[1:] |= change
    fb_cell[:-1] |= change
    # cells sitting on the threshold itself are ambiguous too
    fb_cell |= np.abs(s) <= 1e-9 * (1.0 + np.abs(coeffs.alpha_cells))
    # interior node j touches cells j-1, j; within h_x also reaches j-2, j+1
    near = np.zeros(grid.n + 1, dtype=bool)
    for shift in (-1, 0, 1, 2):
        idx = np.nonzero(fb_cell)[0] + shift
        near[idx[(idx >= 0) & (idx <= grid.n)]] = True
    return near[1:-1]


def check_h2(sol: ResolventSolution, coeffs: CoefficientPair, grid: Grid, include_dalpha=True):
    """(weighted L2 norm of theta'', max deviation from the closed form)."""
    if grid.n < 4:
        raise ValueError("check_h2 needs n >= 4")
    d2 = second_difference(sol.theta, grid)
    norm = float(np.sqrt(np.sum(grid.h_x * d2 * d2)))
    closed = h2_closed_form(sol.flux, coeffs, grid, include_dalpha=include_dalpha)
    keep = ~free_boundary_mask(sol.flux, coeffs, grid)
    dev = float(np.max(np.abs(d2 - closed)[keep])) if np.any(keep) else 0.0
    return norm, dev


def functional_value(name, theta, coeffs: CoefficientPair, grid: Grid) -> float:
    g = forward_diff(theta, grid)
    if name == "Phi":
        return singular_energy(0.0, g, coeffs, grid) + quadratic_energy(g, coeffs, grid)
    if name == "V_alpha":
        return singular_energy(0.0, g, coeffs, grid)
    if name == "W_beta":
        return quadratic_energy(g, coeffs, grid)
    raise ValueError(f"unknown functional {name!r}; expected one of {FUNCTIONALS}")


def probe_directions(grid: Grid, trials: int, rng: np.random.Generator):
    """Half smoothed Gaussian fields, half single-node spikes, each with a
    log-uniform amplitude in [1e-3, 1]."""
    out = []
    n1 = grid.n + 1
    width = max(1.0, n1 / 16)
    k = np.arange(-int(3 * width), int(3 * width) + 1)
    kernel = np.exp(-0.5 * (k / width) ** 2)
    kernel /= kernel.sum()
    for t in range(trials):
        amp = 10.0 ** rng.uniform(-3.0, 0.0)
        if t % 2 == 0:
            d = np.convolve(rng.standard_normal(n1 + 2 * k.size), kernel, mode="same")[k.size:-k.size]
        else:
            d = np.zeros(n1)
            d[rng.integers(0, n1)] = rng.choice([-1.0, 1.0])
        scale = np.max(np.abs(d))
        out.append(amp * d / (scale if scale > 0 else 1.0))
    return out


def check_subgradient(functional, theta, xi, coeffs: CoefficientPair, grid: Grid, trials=100,
                      rng=None, directions=None) -> float:
    """min over test points z of F(z) - F(theta) - <xi, z - theta>_w.

    Nonnegative (up to rounding) means xi passed as a subgradient of F at
    theta on every probe.
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")
    theta = nodal(theta, grid)
    xi = nodal(xi, grid)
    if directions is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        directions = probe_directions(grid, trials, rng)
    F0 = functional_value(functional, theta, coeffs, grid)
    slack = np.inf
    for d in directions:
        z = theta + d
        val = functional_value(functional, z, coeffs, grid) - F0 - weighted_inner(xi, d, grid)
        slack = min(slack, val)
    return float(slack)


@dataclass
class DecompositionReport:
    sgn_violation: float
    chain_rule_residual: float
    el_residual: float
    boundary_flux: tuple[float, float]
    h2_discrete: float
    h2_formula_residual: float
    subgrad_slack_phi: float
    subgrad_slack_v: float
    subgrad_slack_w: float
    split_identity_residual: float
    h_norm: float
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["boundary_flux"] = list(self.boundary_flux)
        d["status"] = "PASS" if self.passed else "FAIL"
        return d


def full_report(sol: ResolventSolution, coeffs: CoefficientPair, grid: Grid, tolerances=None,
                trials=100, rng=None) -> DecompositionReport:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    rng = rng if rng is not None else np.random.default_rng(0)
    u_star, w_star = split_components(sol, coeffs, grid)
    el = weighted_norm(neg_divergence(sol.flux, grid) + sol.theta - sol.h, grid)
    h_norm = weighted_norm(sol.h, grid)
    if grid.n >= 4:
        h2_norm, h2_dev = check_h2(sol, coeffs, grid)
    else:
        h2_norm, h2_dev = float("nan"), 0.0
    dirs = probe_directions(grid, trials, rng)
    slack_phi = check_subgradient("Phi", sol.theta, sol.theta_star, coeffs, grid, directions=dirs)
    slack_v = check_subgradient("V_alpha", sol.theta, u_star, coeffs, grid, directions=dirs)
    slack_w = check_subgradient("W_beta", sol.theta, w_star, coeffs, grid, directions=dirs)
    rep = DecompositionReport(
        sgn_violation=check_sgn_inclusion(sol, tol["sgn"], grid),
        chain_rule_residual=check_chain_rule(sol, coeffs),
        el_residual=el,
        boundary_flux=(abs(float(sol.flux[0])), abs(float(sol.flux[-1]))),
        h2_discrete=h2_norm,
        h2_formula_residual=h2_dev,
        subgrad_slack_phi=slack_phi,
        subgrad_slack_v=slack_v,
        subgrad_slack_w=slack_w,
        split_identity_residual=float(np.max(np.abs(neg_divergence(sol.flux, grid) - u_star - w_star))),
        h_norm=h_norm,
        tolerances=tol,
    )
    # machine precision for the split, scaled by the size of the divergence
    split_scale = max(1.0, float(np.max(np.abs(u_star))) + float(np.max(np.abs(w_star))))
    rep.checks = {
        "sgn": rep.sgn_violation <= tol["sgn"],
        "chain_rule": rep.chain_rule_residual <= tol["chain_rule"],
        "el": rep.el_residual <= tol["el"] * (1.0 + h_norm),
        "subgrad_phi": rep.subgrad_slack_phi >= -tol["subgrad"],
        "subgrad_v": rep.subgrad_slack_v >= -tol["subgrad"],
        "subgrad_w": rep.subgrad_slack_w >= -tol["subgrad"],
        "split": rep.split_identity_residual <= tol["split"] * split_scale,
    }
    return rep
