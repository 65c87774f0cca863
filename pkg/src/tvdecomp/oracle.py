"""Brute-force minimizer of the eps = 0 resolvent energy at desk scale.

Shares nothing with the Newton path: projected subgradient descent in the
nodal variables, then exact coordinate minimization in the variables
(theta_0, g_0, ..., g_{n-1}) with theta_j = theta_0 + h_x sum_{i<j} g_i.
In those variables the nonsmooth part sum alpha_i h_x |g_i| is separable,
so cyclic exact minimization converges to the global minimizer.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .grid import CoefficientPair, Grid, nodal

MAX_N = 17
MAX_SWEEPS = 2_000_000


@njit(cache=True)
def _subgradient_phase(h, alpha, beta, w, hx, iterations):
    n = alpha.size
    theta = h.copy()
    mass = 0.0
    total_w = 0.0
    for j in range(n + 1):
        mass += w[j] * h[j]
        total_w += w[j]
    lip = 1.0
    for i in range(n):
        lip = max(lip, 1.0 + 4.0 * beta[i] / (hx * hx))
    t0 = 1.0 / lip
    q = np.empty(n)
    for k in range(iterations):
        for i in range(n):
            gi = (theta[i + 1] - theta[i]) / hx
            s = 0.0
            if gi > 0:
                s = 1.0
            elif gi < 0:
                s = -1.0
            q[i] = alpha[i] * s + beta[i] * gi
        t = t0 / np.sqrt(1.0 + k / 100.0)
        m = 0.0
        for j in range(n + 1):
            if j == 0:
                a = -q[0] / (0.5 * hx)
            elif j == n:
                a = q[n - 1] / (0.5 * hx)
            else:
                a = -(q[j] - q[j - 1]) / hx
            theta[j] -= t * (a + theta[j] - h[j])
            m += w[j] * theta[j]
        # project back onto the mass hyperplane sum w theta = sum w h
        shift = (mass - m) / total_w
        for j in range(n + 1):
            theta[j] += shift
    return theta


@njit(cache=True)
def _coordinate_phase(h, alpha, beta, w, hx, theta, gap_tol, max_sweeps):
    n = alpha.size
    g = np.empty(n)
    for i in range(n):
        g[i] = (theta[i + 1] - theta[i]) / hx
    r = theta - h
    # suffix weights: W_i = sum_{j > i} w_j
    wsuf = np.zeros(n)
    acc = 0.0
    for i in range(n - 1, -1, -1):
        acc += w[i + 1]
        wsuf[i] = acc
    total_w = acc + w[0]
    gap = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        gap = 0.0
        # constant shift
        s = 0.0
        for j in range(n + 1):
            s += w[j] * r[j]
        c = -s / total_w
        for j in range(n + 1):
            r[j] += c
        gap = max(gap, abs(c))
        for i in range(n):
            b = 0.0
            for j in range(i + 1, n + 1):
                b += w[j] * r[j]
            a = hx * hx * wsuf[i] + hx * beta[i]
            b = hx * b + hx * beta[i] * g[i]
            z = g[i] - b / a
            lam = hx * alpha[i] / a
            if z > lam:
                u = z - lam
            elif z < -lam:
                u = z + lam
            else:
                u = 0.0
            step = u - g[i]
            if step != 0.0:
                g[i] = u
                d = hx * step
                for j in range(i + 1, n + 1):
                    r[j] += d
                gap = max(gap, abs(d))
        if gap < gap_tol:
            break
    return r + h, gap, sweeps


def minimize_tv_energy(h, coeffs: CoefficientPair, grid: Grid, iterations=1_000_000,
                       gap_tol=1e-8, return_info=False):
    """Minimize 1/2|theta - h|_w^2 + sum h_x (alpha|D theta| + beta/2 (D theta)^2).

    The optimality gap is the largest nodal displacement any single exact
    coordinate move still makes; sweeps run until it drops below
    ``gap_tol``.
    """
    if grid.n > MAX_N:
        raise ValueError(f"brute-force oracle is limited to n <= {MAX_N}, got n={grid.n}")
    h = np.ascontiguousarray(nodal(h, grid), dtype=float)
    alpha = np.ascontiguousarray(coeffs.alpha_cells, dtype=float)
    beta = np.ascontiguousarray(coeffs.beta_cells, dtype=float)
    w = np.ascontiguousarray(grid.node_weights, dtype=float)
    theta = _subgradient_phase(h, alpha, beta, w, grid.h_x, int(iterations))
    theta, gap, sweeps = _coordinate_phase(h, alpha, beta, w, grid.h_x, theta, gap_tol, MAX_SWEEPS)
    if return_info:
        return theta, {"gap": gap, "sweeps": sweeps}
    return theta
