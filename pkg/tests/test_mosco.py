import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvdecomp import build_grid, eval_energy, sample_coefficients
from tvdecomp.mosco import graph_convergence_study, m1_refinement_witness, m2_gap

ONE = {"family": "constant", "c": 1.0}
EPS_LIST = [10.0 ** -k for k in range(9)]


def step_data(grid):
    return sample_step(grid.nodes)


def sample_step(x):
    return np.where(x < 0, -1.0, 1.0) + 0.3 * x


def test_m2_gap_single_jump():
    g = build_grid(1.0, 2)  # h_x = 1, cells (-1, 0) and (0, 1)
    c = sample_coefficients(ONE, ONE, g)
    theta = np.array([0.0, 0.0, 1.0])
    gap, bound = m2_gap(0.1, theta, c, g)
    # cell 0: f_eps(0) - 0 = 0.1; cell 1: sqrt(1.01) - 1
    assert gap == pytest.approx(0.1 + np.sqrt(1.01) - 1.0, rel=1e-14)
    assert bound == pytest.approx(0.2)


def test_m2_gap_matches_energy_difference(rng):
    g = build_grid(1.0, 40)
    c = sample_coefficients({"family": "cosine", "amplitude": 0.3, "offset": 0.5}, ONE, g)
    for eps in (1.0, 1e-2, 1e-4):
        theta = rng.standard_normal(41)
        gap, _ = m2_gap(eps, theta, c, g)
        total = eval_energy(eps, theta, c, g).total
        diff = total - eval_energy(0.0, theta, c, g).total
        # the subtraction loses digits at the scale of the total energy
        assert gap == pytest.approx(diff, rel=1e-9, abs=1e-14 * total)


def test_m2_gap_alpha_zero_and_eps_zero():
    g = build_grid(1.0, 10)
    c = sample_coefficients({"family": "constant", "c": 0.0}, ONE, g)
    assert m2_gap(0.5, np.arange(11.0), c, g) == (0.0, 0.0)
    c1 = sample_coefficients(ONE, ONE, g)
    assert m2_gap(0.0, np.arange(11.0), c1, g) == (0.0, pytest.approx(0.0))
    with pytest.raises(ValueError):
        m2_gap(-1.0, np.zeros(11), c1, g)


def test_m2_gap_constant_attains_bound():
    g = build_grid(1.0, 10)
    c = sample_coefficients(ONE, ONE, g)
    gap, bound = m2_gap(1e-3, np.full(11, 2.0), c, g)
    assert gap == bound == pytest.approx(2e-3)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1.0, 1e-2, 1e-4, 1e-6]))
def test_m2_bound_property(seed, eps):
    rng = np.random.default_rng(seed)
    g = build_grid(1.0, 32)
    c = sample_coefficients({"family": "abs", "scale": 1.0, "offset": rng.uniform(0, 1)}, ONE, g)
    theta = np.cumsum(rng.standard_normal(33)) * 10.0 ** rng.uniform(-10, 1)
    gap, bound = m2_gap(eps, theta, c, g)
    assert 0.0 <= gap <= bound


@pytest.fixture(scope="module")
def study():
    g = build_grid(1.0, 128)
    c = sample_coefficients(ONE, ONE, g)
    h = step_data(g)
    return g, c, h, graph_convergence_study(h, c, g, EPS_LIST)


def test_study_records(study):
    g, c, h, s = study
    assert s.eps_values == EPS_LIST
    assert len(s.gaps) == len(s.bounds) == len(s.solution_increments) == len(EPS_LIST)
    assert all(0 <= gap <= b for gap, b in zip(s.gaps, s.bounds))
    assert all(s.apriori_ok)
    assert not s.warnings
    assert s.gaps[-1] <= 1e-6
    assert abs(s.energy_trace[-1] - s.limit_energy) <= 1e-6
    # energies decrease toward the limit
    assert all(b <= a + 1e-12 for a, b in zip(s.energy_trace, s.energy_trace[1:]))
    lines = s.to_csv().splitlines()
    assert lines[0] == "eps,gap,bound,increment,energy,phi"
    assert len(lines) == len(EPS_LIST) + 1


def test_study_rejects_bad_list(study):
    g, c, h, _ = study
    with pytest.raises(ValueError):
        graph_convergence_study(h, c, g, [1.0, 1.0])
    with pytest.raises(ValueError):
        graph_convergence_study(h, c, g, [1.0, 0.0])


def test_m1_witness(study):
    g, c, h, s = study
    w = m1_refinement_witness(h, c, g, EPS_LIST, study=s)
    assert w.holds
    assert w.rows()[0][0] == 1.0
    assert w.tail_min >= w.phi_limit - 1e-6


def test_m1_witness_failure_raises(study):
    g, c, h, s = study
    import dataclasses
    fake = dataclasses.replace(s, limit_energy=s.limit_energy + 1.0)
    with pytest.raises(AssertionError, match="lower-bound"):
        m1_refinement_witness(h, c, g, EPS_LIST, study=fake)
