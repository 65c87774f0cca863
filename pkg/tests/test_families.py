import numpy as np
import pytest

from tvdecomp.families import parse_function


@pytest.mark.parametrize("spec", [
    {"family": "linear", "a": 2.0, "b": -1.0},
    {"family": "abs", "scale": 0.7, "offset": 0.2, "center": 0.1},
    {"family": "cosine", "k": 1.5, "amplitude": 2.0, "offset": 0.3, "phase": 0.4},
    {"family": "hat", "center": 0.2, "width": 0.5, "height": 1.3},
    {"family": "piecewise_linear", "points": [[-1, 0], [-0.2, 1], [0.3, -1], [1, 2]]},
])
def test_derivative_matches_central_difference(spec):
    f = parse_function(spec)
    # stay off kinks
    x = np.linspace(-0.93, 0.97, 41) + 1e-3
    step = 1e-6
    fd = (f(x + step) - f(x - step)) / (2 * step)
    np.testing.assert_allclose(f.derivative(x), fd, atol=1e-6)


def test_hat_vanishes_outside_support():
    f = parse_function({"family": "hat", "center": 0.0, "width": 0.5, "height": 2.0})
    np.testing.assert_array_equal(f(np.array([-1.0, -0.5, 0.5, 0.9])), 0.0)
    assert f(np.array([0.0]))[0] == 2.0


def test_sum_of_specs():
    f = parse_function([{"family": "constant", "c": 1.0}, {"family": "linear", "a": 3.0}])
    np.testing.assert_allclose(f(np.array([0.0, 1.0])), [1.0, 4.0])
    assert f.to_dict()[1]["family"] == "linear"


@pytest.mark.parametrize("spec, msg", [
    ({"family": "gauss"}, "unknown family"),
    ({"c": 1.0}, "family"),
    ({"family": "constant", "gamma": 1.0}, "unknown parameter"),
    ({"family": "hat", "width": 0.0}, "width"),
    ({"family": "piecewise_linear", "points": [[0, 1]]}, "two breakpoints"),
    ([], "empty"),
])
def test_bad_specs(spec, msg):
    with pytest.raises(ValueError, match=msg):
        parse_function(spec)
