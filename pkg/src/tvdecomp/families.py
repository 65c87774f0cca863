"""Named analytic function families for coefficients and data.

A spec is a mapping ``{"family": name, **params}`` or a list of such
mappings, which is read as their pointwise sum.  Every family knows its
own derivative, needed for the second-derivative formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple[tuple[str, Any], ...]
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self.deriv(np.asarray(x, dtype=float))

    def to_dict(self):
        return {"family": self.name, **dict(self.params)}


def _constant(c=0.0):
    c = float(c)
    return (lambda x: np.full_like(x, c)), (lambda x: np.zeros_like(x))


def _linear(a=1.0, b=0.0):
    a, b = float(a), float(b)
    return (lambda x: a * x + b), (lambda x: np.full_like(x, a))


def _abs(scale=1.0, offset=0.0, center=0.0):
    s, o, c = float(scale), float(offset), float(center)
    return (lambda x: o + s * np.abs(x - c)), (lambda x: s * np.sign(x - c))


def _cosine(k=1.0, amplitude=1.0, offset=0.0, phase=0.0):
    k, a, o, p = float(k), float(amplitude), float(offset), float(phase)
    w = np.pi * k
    return (
        (lambda x: o + a * np.cos(w * x + p)),
        (lambda x: -a * w * np.sin(w * x + p)),
    )


def _hat(center=0.0, width=1.0, height=1.0):
    c, wd, ht = float(center), float(width), float(height)
    if wd <= 0:
        raise ValueError("hat width must be positive")

    def value(x):
        return ht * np.maximum(0.0, 1.0 - np.abs(x - c) / wd)

    def deriv(x):
        inside = np.abs(x - c) < wd
        return np.where(inside, -ht * np.sign(x - c) / wd, 0.0)

    return value, deriv


def _piecewise_linear(points=()):
    pts = sorted((float(p[0]), float(p[1])) for p in points)
    if len(pts) < 2:
        raise ValueError("piecewise_linear needs at least two breakpoints")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(np.diff(xs) <= 0):
        raise ValueError("piecewise_linear breakpoints must have distinct x")
    slopes = np.diff(ys) / np.diff(xs)

    def deriv(x):
        # constant extrapolation outside the breakpoints
        idx = np.searchsorted(xs, x, side="right") - 1
        out = np.zeros_like(x)
        ok = (idx >= 0) & (idx < len(slopes))
        out[ok] = slopes[idx[ok]]
        return out

    return (lambda x: np.interp(x, xs, ys)), deriv


FAMILIES: dict[str, Callable[..., tuple]] = {
    "constant": _constant,
    "linear": _linear,
    "abs": _abs,
    "cosine": _cosine,
    "hat": _hat,
    "piecewise_linear": _piecewise_linear,
}

_PARAMS = {
    "constant": {"c"},
    "linear": {"a", "b"},
    "abs": {"scale", "offset", "center"},
    "cosine": {"k", "amplitude", "offset", "phase"},
    "hat": {"center", "width", "height"},
    "piecewise_linear": {"points"},
}


def make_family(spec: Mapping[str, Any]) -> Family:
    """Build one family from ``{"family": name, **params}``."""
    if not isinstance(spec, Mapping) or "family" not in spec:
        raise ValueError(f"function spec needs a 'family' key: {spec!r}")
    name = spec["family"]
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    params = {k: v for k, v in spec.items() if k != "family"}
    unknown = set(params) - _PARAMS[name]
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)} for family {name!r}")
    value, deriv = FAMILIES[name](**params)
    frozen = tuple(
        (k, [list(p) for p in v] if k == "points" else v) for k, v in sorted(params.items())
    )
    return Family(name, frozen, value, deriv)


@dataclass(frozen=True)
class SumFamily:
    terms: tuple[Family, ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return sum((t(x) for t in self.terms), np.zeros_like(x))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return sum((t.derivative(x) for t in self.terms), np.zeros_like(x))

    def to_dict(self):
        return [t.to_dict() for t in self.terms]


def parse_function(spec: Mapping[str, Any] | Sequence[Mapping[str, Any]] | Family | SumFamily):
    """Accept a family, a single spec mapping, or a list of specs (summed)."""
    if isinstance(spec, (Family, SumFamily)):
        return spec
    if isinstance(spec, Mapping):
        return make_family(spec)
    if isinstance(spec, Sequence) and not isinstance(spec, str):
        if not spec:
            raise ValueError("empty list of function specs")
        return SumFamily(tuple(make_family(s) for s in spec))
    raise ValueError(f"cannot interpret function spec {spec!r}")
