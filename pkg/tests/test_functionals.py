import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tvdecomp import (
    build_grid,
    eval_energy,
    f_eps,
    f_eps_prime,
    rho_apply,
    sample_coefficients,
    sgn_interval,
    soft_threshold,
)
from tvdecomp.functionals import Interval

reals = st.floats(-1e6, 1e6, allow_nan=False)
eps_values = st.floats(0.0, 1e3)


@pytest.mark.parametrize("eps, y, expected", [(0, 3, 3), (1, 0, 1), (3, 4, 5)])
def test_f_eps_examples(eps, y, expected):
    assert f_eps(eps, y) == expected


def test_f_eps_rejects_negative_eps():
    with pytest.raises(ValueError):
        f_eps(-1e-3, 1.0)


@pytest.mark.parametrize("eps, y, expected", [(1, 0, 0), (3, 4, 0.8), (0, -2, -1)])
def test_f_eps_prime_examples(eps, y, expected):
    assert f_eps_prime(eps, y) == pytest.approx(expected, abs=1e-15)


def test_f_eps_prime_set_valued_case():
    with pytest.raises(ValueError, match="sgn_interval"):
        f_eps_prime(0, 0.0)


def test_sgn_interval():
    assert sgn_interval(0.0) == Interval(-1.0, 1.0)
    assert sgn_interval(2.5) == Interval(1.0, 1.0)
    assert sgn_interval(-0.1) == Interval(-1.0, -1.0)
    assert sgn_interval(0.0).contains(0.3)
    assert not sgn_interval(1.0).contains(0.9)
    assert sgn_interval(1.0).distance(0.5) == 0.5


def test_soft_threshold_examples():
    assert soft_threshold(1, 1, 0.5) == 0
    # ([3 - 1]^+ - [3 + 1]^-) / 2 = 2 / 2
    assert soft_threshold(1, 2, 3) == 1
    r = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(soft_threshold(0, 2, r), r / 2)
    with pytest.raises(ValueError):
        soft_threshold(1, 0, 1.0)


def test_rho_apply_examples():
    assert rho_apply(1, 1, 0, 0.3) == 0.3
    assert rho_apply(1, 2, 3, 1) == 7
    assert soft_threshold(1, 2, 7) == 3
    assert rho_apply(0, 1.5, -2.0, -1.0) == -3.0
    with pytest.raises(ValueError, match="Sgn"):
        rho_apply(1, 1, 2.0, 0.5)
    with pytest.raises(ValueError):
        rho_apply(1, 1, 0.0, 1.5)


@given(st.floats(0, 10), st.floats(1e-3, 10), reals, st.floats(-1, 1))
def test_inverse_pair(a, b, r, s):
    sel = 1.0 if r > 0 else -1.0 if r < 0 else s
    out = soft_threshold(a, b, rho_apply(a, b, r, sel))
    # a + b r rounds at the scale of a; subnormal r carries no relative precision
    assert abs(out - r) <= 1e-12 * (abs(r) + a / b) + 1e-300


@given(st.floats(0, 10), st.floats(1e-3, 10), reals, reals)
def test_soft_threshold_lipschitz_and_monotone(a, b, r1, r2):
    d = soft_threshold(a, b, r2) - soft_threshold(a, b, r1)
    assert abs(d) <= abs(r2 - r1) / b * (1 + 1e-12)
    if r2 >= r1:
        assert d >= 0


@given(eps_values, reals)
def test_f_eps_gap_bounds(eps, y):
    gap = f_eps(eps, y) - abs(y)
    assert 0 <= gap <= eps


@given(st.floats(1e-12, 1e3), reals)
def test_f_eps_prime_bounded_and_odd(eps, y):
    v = f_eps_prime(eps, y)
    assert -1 <= v <= 1
    assert f_eps_prime(eps, -y) == -v


@given(st.floats(1e-6, 10), reals, reals)
def test_f_eps_prime_monotone(eps, y1, y2):
    lo, hi = sorted((y1, y2))
    assert f_eps_prime(eps, lo) <= f_eps_prime(eps, hi)


def _setup(n=32):
    g = build_grid(1.0, n)
    one = {"family": "constant", "c": 1.0}
    return g, sample_coefficients(one, one, g)


def test_energy_of_constant_is_zero():
    g, c = _setup()
    for eps in (0.0, 0.3):
        e = eval_energy(eps, np.full(g.n + 1, 2.0), c, g)
        assert e.w_beta == 0 and e.total == e.v_alpha
        assert e.v_alpha == pytest.approx(eps * 2.0, abs=1e-15)


def test_energy_of_identity():
    g, c = _setup()
    e = eval_energy(0.0, g.nodes, c, g)
    assert (e.v_alpha, e.w_beta, e.total) == pytest.approx((2.0, 1.0, 3.0), rel=1e-14)
    e = eval_energy(0.1, g.nodes, c, g)
    assert e.v_alpha == pytest.approx(2 * math.sqrt(1.01), rel=1e-14)
    assert e.v_alpha - 2.0 <= 0.1 * 2.0
    assert e.epsilon == 0.1


def test_energy_monotone_in_eps(rng):
    g, c = _setup()
    theta = rng.standard_normal(g.n + 1)
    vals = [eval_energy(eps, theta, c, g).v_alpha for eps in (0, 1e-4, 1e-2, 1)]
    assert vals == sorted(vals)


def test_energy_is_convex_along_segments(rng):
    g = build_grid(1.0, 24)
    c = sample_coefficients({"family": "abs", "offset": 0.1}, {"family": "cosine", "amplitude": 0.5, "offset": 1}, g)
    for _ in range(200):
        t1, t2 = rng.standard_normal((2, g.n + 1))
        t = rng.uniform()
        mid = eval_energy(0, t * t1 + (1 - t) * t2, c, g).total
        ends = t * eval_energy(0, t1, c, g).total + (1 - t) * eval_energy(0, t2, c, g).total
        assert mid <= ends + 1e-12 * (1 + abs(ends))
