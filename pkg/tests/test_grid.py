import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvdecomp import GridFunction, build_grid, forward_diff, neg_divergence, sample_coefficients
from tvdecomp.errors import AdmissibilityError, LocationError
from tvdecomp.grid import make_coefficients


def test_build_grid_two_cells():
    g = build_grid(1, 2)
    np.testing.assert_array_equal(g.nodes, [-1, 0, 1])
    np.testing.assert_array_equal(g.cell_mids, [-0.5, 0.5])
    assert g.h_x == 1


def test_trapezoid_weights():
    g = build_grid(1, 4)
    np.testing.assert_allclose(g.node_weights, [0.25, 0.5, 0.5, 0.5, 0.25])
    assert g.node_weights.sum() == 2


def test_half_length_grid():
    g = build_grid(0.5, 100)
    assert g.h_x == pytest.approx(0.01, rel=1e-15)
    assert g.nodes[50] == 0


@pytest.mark.parametrize("L, n", [(float("nan"), 4), (float("inf"), 4), (-1.0, 4), (0.0, 4), (1.0, 1), (1.0, 2.5)])
def test_build_grid_rejects(L, n):
    with pytest.raises(ValueError):
        build_grid(L, n)


@given(st.floats(0.01, 100.0), st.integers(2, 500))
def test_grid_invariants(L, n):
    g = build_grid(L, n)
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[0] == -L and g.nodes[-1] == L
    assert abs(g.node_weights.sum() - 2 * L) <= (n + 1) * np.spacing(2 * L)
    np.testing.assert_array_equal(g.cell_mids, 0.5 * (g.nodes[:-1] + g.nodes[1:]))


@pytest.mark.parametrize("n", [2, 7, 64, 101])
def test_refinement_nests_nodes(n):
    g = build_grid(1.3, n)
    np.testing.assert_array_equal(g.refine().nodes[::2], g.nodes)


def test_grid_is_immutable():
    g = build_grid(1, 4)
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0


def test_forward_diff_examples():
    g = build_grid(1, 2)
    np.testing.assert_array_equal(forward_diff([0, 1, 0], g), [1, -1])
    g = build_grid(1, 16)
    np.testing.assert_allclose(forward_diff(np.full(17, 3.2), g), 0)
    np.testing.assert_allclose(forward_diff(g.nodes, g), 1, rtol=1e-14)


def test_neg_divergence_examples():
    g = build_grid(1, 2)
    np.testing.assert_array_equal(neg_divergence([1, 1], g), [-2, 0, 2])
    np.testing.assert_array_equal(neg_divergence(np.zeros(2), g), 0)


def test_location_mismatch():
    g = build_grid(1, 4)
    with pytest.raises(LocationError):
        forward_diff(np.zeros(4), g)
    with pytest.raises(LocationError):
        neg_divergence(np.zeros(5), g)
    with pytest.raises(LocationError):
        forward_diff(GridFunction("cells", np.zeros(4)), g)
    np.testing.assert_array_equal(forward_diff(GridFunction("nodes", np.arange(5.0)), g), 2.0)


def test_grid_function_rejects_nonfinite():
    with pytest.raises(ValueError):
        GridFunction("nodes", [0.0, np.nan])


def test_summation_by_parts_exact(rng):
    for _ in range(100):
        n = int(rng.integers(2, 65))
        g = build_grid(float(rng.uniform(0.1, 5)), n)
        q = rng.standard_normal(n)
        phi = rng.standard_normal(n + 1)
        lhs = np.sum(q * forward_diff(phi, g) * g.h_x)
        rhs = np.sum(neg_divergence(q, g) * phi * g.node_weights)
        scale = np.linalg.norm(q) * np.linalg.norm(phi)
        assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=50)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=64))
def test_divergence_has_zero_total_flux(q):
    g = build_grid(1.0, len(q))
    a = neg_divergence(np.array(q), g)
    assert abs(np.dot(a, g.node_weights)) <= 1e-12 * (1 + np.abs(q).sum())


def test_sample_constant_coefficients():
    g = build_grid(1, 8)
    c = sample_coefficients({"family": "constant", "c": 1}, {"family": "constant", "c": 1}, g)
    for arr in (c.alpha_cells, c.beta_cells, c.alpha_nodes, c.beta_nodes):
        np.testing.assert_array_equal(arr, 1.0)
    np.testing.assert_array_equal(c.dbeta_cells, 0.0)


def test_sample_abs_is_symmetric_and_positive():
    g = build_grid(1, 10)
    c = sample_coefficients({"family": "abs"}, {"family": "constant", "c": 1}, g)
    assert np.all(c.alpha_cells > 0)
    np.testing.assert_allclose(c.alpha_cells, c.alpha_cells[::-1], atol=1e-15)


def test_zero_beta_is_inadmissible():
    g = build_grid(1, 8)
    with pytest.raises(AdmissibilityError, match="ass01"):
        sample_coefficients({"family": "constant", "c": 1}, {"family": "constant", "c": 0}, g)


def test_negative_alpha_is_inadmissible():
    g = build_grid(1, 8)
    with pytest.raises(AdmissibilityError, match="alpha"):
        sample_coefficients({"family": "linear", "a": 1.0}, {"family": "constant", "c": 1}, g)


def test_summed_spec_and_derivatives():
    g = build_grid(1, 8)
    beta = [{"family": "constant", "c": 1.0}, {"family": "abs", "scale": 0.5}]
    alpha = {"family": "cosine", "k": 1, "amplitude": 0.4, "offset": 0.5}
    c = sample_coefficients(alpha, beta, g)
    x = g.cell_mids
    np.testing.assert_allclose(c.beta_cells, 1 + 0.5 * np.abs(x))
    np.testing.assert_allclose(c.dbeta_cells, 0.5 * np.sign(x))
    np.testing.assert_allclose(c.dalpha_cells, -0.4 * np.pi * np.sin(np.pi * x))


def test_make_coefficients_from_arrays():
    g = build_grid(1, 4)
    c = make_coefficients(g, [0, 1, 1, 0], [1, 2, 3, 4])
    np.testing.assert_allclose(c.beta_nodes, [1, 1.5, 2.5, 3.5, 4])
    with pytest.raises(AdmissibilityError):
        make_coefficients(g, [0, 1, 1, 0], [1, 0, 3, 4])
