"""Experiment configs: YAML documents validated into :class:`ExperimentConfig`.

Validation collects every problem before raising, so a broken config is
reported in one pass.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .errors import AdmissibilityError, ConfigError
from .families import parse_function
from .grid import build_grid, sample_coefficients
from .resolvent import EpsSchedule

COMMANDS = ("solve", "verify", "mosco", "refine", "flow")

DEFAULT_MOSCO_EPS = [10.0 ** -k for k in range(0, 9)]

_SECTIONS = {
    "command": None,
    "domain": {"L", "n"},
    "coefficients": {"alpha", "beta"},
    "data": {"h"},
    "schedule": {"eps0", "ratio", "eps_min", "newton_tol", "max_newton"},
    "tolerances": None,
    "flow": {"tau", "steps", "dump_states"},
    "mosco": {"eps_list", "probes"},
    "refine": {"levels"},
    "batch": {"count", "min_beta"},
    "output_dir": None,
    "seed": None,
}

KNOWN_TOLERANCES = {
    "sgn", "chain_rule", "el", "subgrad", "split", "h2_formula",
    "h2_variation", "boundary_slack", "m1", "dissipation", "mass",
}


@dataclass
class ExperimentConfig:
    command: str
    L: float
    n: int
    alpha_spec: Any
    beta_spec: Any
    h_spec: Any
    schedule: EpsSchedule = field(default_factory=EpsSchedule)
    tolerances: dict = field(default_factory=dict)
    tau: float | None = None
    steps: int | None = None
    dump_states: bool = False
    eps_list: list = field(default_factory=lambda: list(DEFAULT_MOSCO_EPS))
    refine_levels: int = 3
    batch_count: int = 0
    batch_min_beta: float = 0.1
    output_dir: str = "out"
    seed: int = 0
    raw: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Normalized echo of the config, for reports."""
        return {
            "command": self.command,
            "domain": {"L": self.L, "n": self.n},
            "coefficients": {"alpha": self.alpha_spec, "beta": self.beta_spec},
            "data": {"h": self.h_spec},
            "schedule": {
                "eps0": self.schedule.eps0, "ratio": self.schedule.ratio,
                "eps_min": self.schedule.eps_min, "newton_tol": self.schedule.newton_tol,
                "max_newton": self.schedule.max_newton,
            },
            "tolerances": dict(self.tolerances),
            "flow": {"tau": self.tau, "steps": self.steps, "dump_states": self.dump_states},
            "mosco": {"eps_list": list(self.eps_list)},
            "refine": {"levels": self.refine_levels},
            "batch": {"count": self.batch_count, "min_beta": self.batch_min_beta},
            "output_dir": self.output_dir,
            "seed": self.seed,
        }


def _num(value, name, errors, kind=float):
    # YAML 1.1 reads "1e-8" as a string
    try:
        if isinstance(value, bool):
            raise TypeError
        out = kind(float(value)) if kind is int else float(value)
        if kind is int and out != float(value):
            raise ValueError
        return out
    except (TypeError, ValueError):
        errors.append(f"{name}: expected a number, got {value!r}")
        return None


def _numeric_strings(obj):
    if isinstance(obj, dict):
        return {k: _numeric_strings(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_numeric_strings(v) for v in obj]
    if isinstance(obj, str):
        try:
            return float(obj)
        except ValueError:
            return obj
    return obj


def parse_config(text: str, command: str | None = None) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"not valid YAML: {exc}"]) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(["config must be a mapping at the top level"])
    return validate_config(doc, command)


def validate_config(doc: dict, command: str | None = None) -> ExperimentConfig:
    errors: list[str] = []
    raw = copy.deepcopy(doc)

    for key in doc:
        if key not in _SECTIONS:
            errors.append(f"unknown key {key!r}")
    for sec, allowed in _SECTIONS.items():
        if allowed and sec in doc:
            if not isinstance(doc[sec], dict):
                errors.append(f"section {sec!r} must be a mapping")
                continue
            for key in doc[sec]:
                if key not in allowed:
                    errors.append(f"unknown key {key!r} in section {sec!r}")

    cmd = doc.get("command")
    if command is not None:
        if cmd is not None and cmd != command:
            errors.append(f"config command {cmd!r} does not match requested command {command!r}")
        cmd = command
    if cmd not in COMMANDS:
        errors.append(f"command must be one of {COMMANDS}, got {cmd!r}")

    def section(name):
        s = doc.get(name)
        return s if isinstance(s, dict) else {}

    batch = section("batch")
    batch_count = 0
    if batch:
        batch_count = _num(batch.get("count", 20), "batch.count", errors, int) or 0
        if batch_count < 1:
            errors.append("batch.count must be >= 1")
    batch_min_beta = _num(batch.get("min_beta", 0.1), "batch.min_beta", errors) if batch else 0.1
    if batch_min_beta is not None and batch_min_beta <= 0:
        errors.append("batch.min_beta must be > 0 (assumption ass01)")

    dom = section("domain")
    if "domain" not in doc:
        errors.append("missing required section 'domain'")
    L = _num(dom.get("L", 1.0), "domain.L", errors)
    n = _num(dom["n"], "domain.n", errors, int) if "n" in dom else None
    if "domain" in doc and "n" not in dom:
        errors.append("domain.n is required")
    grid = None
    if L is not None and n is not None:
        try:
            grid = build_grid(L, n)
        except ValueError as exc:
            errors.append(f"domain: {exc}")

    coef = section("coefficients")
    data = section("data")
    alpha_spec = coef.get("alpha")
    beta_spec = coef.get("beta")
    h_spec = data.get("h")
    if not batch:
        if "coefficients" not in doc:
            errors.append("missing required section 'coefficients'")
        for name, spec in (("coefficients.alpha", alpha_spec), ("coefficients.beta", beta_spec),
                           ("data.h", h_spec)):
            if spec is None:
                errors.append(f"{name} is required")
                continue
            try:
                parse_function(_numeric_strings(spec))
            except (ValueError, TypeError) as exc:
                errors.append(f"{name}: {exc}")
        if "data" not in doc:
            errors.append("missing required section 'data'")
        alpha_spec, beta_spec, h_spec = (
            _numeric_strings(s) for s in (alpha_spec, beta_spec, h_spec)
        )
        if grid is not None and alpha_spec is not None and beta_spec is not None:
            try:
                sample_coefficients(alpha_spec, beta_spec, grid)
            except AdmissibilityError as exc:
                errors.append(f"coefficients: {exc}")
            except (ValueError, TypeError):
                pass

    sched = section("schedule")
    schedule = None
    sched_vals = {}
    for key in ("eps0", "ratio", "eps_min", "newton_tol"):
        if key in sched:
            sched_vals[key] = _num(sched[key], f"schedule.{key}", errors)
    if "max_newton" in sched:
        sched_vals["max_newton"] = _num(sched["max_newton"], "schedule.max_newton", errors, int)
    if None not in sched_vals.values():
        try:
            schedule = EpsSchedule(**sched_vals)
        except ValueError as exc:
            errors.append(f"schedule: {exc}")

    tols = {}
    for key, val in section("tolerances").items():
        if key not in KNOWN_TOLERANCES:
            errors.append(f"unknown tolerance {key!r}")
            continue
        v = _num(val, f"tolerances.{key}", errors)
        if v is not None and v <= 0:
            errors.append(f"tolerances.{key} must be > 0")
        tols[key] = v

    tau = steps = None
    fl = section("flow")
    if cmd == "flow":
        if "flow" not in doc:
            errors.append("command 'flow' needs a 'flow' section with tau and steps")
        tau = _num(fl.get("tau"), "flow.tau", errors) if "tau" in fl else None
        steps = _num(fl.get("steps"), "flow.steps", errors, int) if "steps" in fl else None
        if tau is None or tau <= 0:
            errors.append("flow.tau must be a positive number")
        if steps is None or steps < 1:
            errors.append("flow.steps must be an integer >= 1")

    eps_list = list(DEFAULT_MOSCO_EPS)
    mo = section("mosco")
    if "eps_list" in mo:
        vals = [_num(v, "mosco.eps_list", errors) for v in mo["eps_list"] or []]
        if None not in vals:
            if not vals or min(vals) <= 0 or any(b >= a for a, b in zip(vals, vals[1:])):
                errors.append("mosco.eps_list must be positive and strictly decreasing")
            eps_list = vals

    levels = _num(section("refine").get("levels", 3), "refine.levels", errors, int) or 3
    if levels < 2:
        errors.append("refine.levels must be >= 2")

    seed = _num(doc.get("seed", 0), "seed", errors, int)

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        command=cmd, L=L, n=n, alpha_spec=alpha_spec, beta_spec=beta_spec, h_spec=h_spec,
        schedule=schedule, tolerances=tols, tau=tau, steps=steps,
        dump_states=bool(fl.get("dump_states", False)), eps_list=eps_list,
        refine_levels=levels, batch_count=batch_count,
        batch_min_beta=batch_min_beta, output_dir=str(doc.get("output_dir", "out")),
        seed=seed, raw=raw,
    )


# ------------------------------------------------------- random generation


def _nonneg_family(rng: np.random.Generator, L: float, floor: float = 0.0):
    """A random named family that is >= floor on [-L, L]."""
    kind = str(rng.choice(["constant", "linear", "abs", "cosine", "hat", "piecewise_linear"]))
    if kind == "constant":
        return {"family": "constant", "c": floor + float(rng.uniform(0.0, 1.5))}
    if kind == "linear":
        a = float(rng.uniform(-1.0, 1.0))
        return {"family": "linear", "a": a, "b": floor + abs(a) * L + float(rng.uniform(0.0, 0.5))}
    if kind == "abs":
        return {"family": "abs", "scale": float(rng.uniform(0.0, 1.0)),
                "offset": floor + float(rng.uniform(0.0, 0.5)),
                "center": float(rng.uniform(-0.5, 0.5) * L)}
    if kind == "cosine":
        amp = float(rng.uniform(0.0, 0.8))
        return {"family": "cosine", "k": float(rng.uniform(0.5, 3.0) / L), "amplitude": amp,
                "offset": floor + amp + float(rng.uniform(0.0, 0.5)),
                "phase": float(rng.uniform(0, 2 * np.pi))}
    if kind == "hat":
        spec = {"family": "hat", "center": float(rng.uniform(-L, L)),
                "width": float(rng.uniform(0.2, 1.0) * L), "height": float(rng.uniform(0.1, 1.5))}
        return [spec, {"family": "constant", "c": floor}] if floor > 0 else spec
    xs = np.sort(rng.uniform(-L, L, size=3))
    pts = [[-L, float(rng.uniform(floor, floor + 1.0))]]
    pts += [[float(x), float(rng.uniform(floor, floor + 1.0))] for x in xs]
    pts += [[L, float(rng.uniform(floor, floor + 1.0))]]
    return {"family": "piecewise_linear", "points": pts}


def _data_family(rng: np.random.Generator, L: float):
    terms = []
    for _ in range(int(rng.integers(1, 3))):
        kind = str(rng.choice(["cosine", "linear", "hat", "piecewise_linear"]))
        if kind == "cosine":
            terms.append({"family": "cosine", "k": float(rng.uniform(0.5, 4.0) / L),
                          "amplitude": float(rng.uniform(0.5, 3.0)),
                          "phase": float(rng.uniform(0, 2 * np.pi))})
        elif kind == "linear":
            terms.append({"family": "linear", "a": float(rng.uniform(-2, 2)),
                          "b": float(rng.uniform(-1, 1))})
        elif kind == "hat":
            terms.append({"family": "hat", "center": float(rng.uniform(-L, L)),
                          "width": float(rng.uniform(0.1, 0.8) * L),
                          "height": float(rng.uniform(-3, 3))})
        else:
            xs = np.sort(rng.uniform(-L, L, size=4))
            terms.append({"family": "piecewise_linear",
                          "points": [[float(x), float(rng.uniform(-2, 2))] for x in xs]})
    return terms


def random_problem(rng: np.random.Generator, L: float = 1.0, min_beta: float = 0.1) -> dict:
    """Random admissible (alpha, beta, h) specs drawn from the named families."""
    return {
        "alpha": _nonneg_family(rng, L),
        "beta": _nonneg_family(rng, L, floor=min_beta),
        "h": _data_family(rng, L),
    }
