"""Command-line batch driver.

    tvdecomp <command> --config <path> [--out <dir>] [--seed <int>]

Writes CSV data files and a ``report.json`` into the output directory.
Exit status is 0 iff every enabled check passes, 1 on a failed check or
solver breakdown, 2 on an invalid config.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, ExperimentConfig, parse_config, random_problem
from .decomposition import DEFAULT_TOLERANCES, full_report
from .errors import ConfigError, ConvergenceError
from .flow import run_flow
from .grid import build_grid, sample_coefficients, sample_function, weighted_norm
from .mosco import graph_convergence_study, m1_refinement_witness, m2_gap
from .resolvent import EpsSchedule, solve_resolvent

log = logging.getLogger("tvdecomp")

EXTRA_TOLERANCES = {
    "h2_variation": 0.1,
    "boundary_slack": 0.2,
    "m1": 1e-6,
    "dissipation": 1e-10,
    "mass": 1e-10,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _fmt(v):
    return repr(float(v))


def write_solution_csv(path: Path, grid, sol):
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "theta", "h", "theta_star", "mid", "dtheta", "varpi", "flux"])
        for j in range(grid.n + 1):
            row = [_fmt(grid.nodes[j]), _fmt(sol.theta[j]), _fmt(sol.h[j]), _fmt(sol.theta_star[j])]
            if j < grid.n:
                row += [_fmt(grid.cell_mids[j]), _fmt(sol.dtheta[j]), _fmt(sol.varpi[j]),
                        _fmt(sol.flux[j])]
            else:
                row += ["", "", "", ""]
            wr.writerow(row)


def _problem(cfg: ExperimentConfig, n=None):
    grid = build_grid(cfg.L, n or cfg.n)
    coeffs = sample_coefficients(cfg.alpha_spec, cfg.beta_spec, grid)
    h = sample_function(cfg.h_spec, grid)
    return grid, coeffs, h


def _trace_rows(sol):
    return [
        {"eps": r.eps, "energy": r.energy, "increment": r.increment,
         "newton_iterations": r.newton_iterations, "residual": r.residual,
         "apriori_lhs": r.apriori_lhs, "apriori_rhs": r.apriori_rhs}
        for r in sol.eps_trace
    ]


def _solution_summary(sol, grid):
    return {
        "el_residual": sol.residual,
        "h_norm": weighted_norm(sol.h, grid),
        "final_eps": sol.final_eps,
        "eps_trace": _trace_rows(sol),
        "apriori_ok": all(r.apriori_lhs <= r.apriori_rhs * (1 + 1e-10) for r in sol.eps_trace),
        "warnings": list(sol.warnings),
    }


def _tolerances(cfg):
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(EXTRA_TOLERANCES)
    tol.update(cfg.tolerances)
    return tol


def cmd_solve(cfg, out: Path, tol, rng):
    grid, coeffs, h = _problem(cfg)
    sol = solve_resolvent(h, coeffs, grid, cfg.schedule)
    write_solution_csv(out / "solution.csv", grid, sol)
    summary = _solution_summary(sol, grid)
    checks = {
        "el": sol.residual <= tol["el"] * (1 + summary["h_norm"]),
        "apriori": summary["apriori_ok"],
    }
    return {"solution": summary}, checks


def cmd_verify(cfg, out: Path, tol, rng):
    if cfg.batch_count:
        reports = []
        rows = []
        for k in range(cfg.batch_count):
            prob = random_problem(rng, cfg.L, cfg.batch_min_beta)
            grid = build_grid(cfg.L, cfg.n)
            coeffs = sample_coefficients(prob["alpha"], prob["beta"], grid)
            h = sample_function(prob["h"], grid)
            sol = solve_resolvent(h, coeffs, grid, cfg.schedule)
            rep = full_report(sol, coeffs, grid, tol, rng=rng)
            d = rep.to_dict()
            d["problem"] = prob
            d["apriori_ok"] = _solution_summary(sol, grid)["apriori_ok"]
            reports.append(d)
            rows.append([k, d["status"], rep.sgn_violation, rep.chain_rule_residual,
                         rep.el_residual, rep.subgrad_slack_phi, rep.subgrad_slack_v,
                         rep.subgrad_slack_w, rep.split_identity_residual])
        with (out / "verify.csv").open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["config", "status", "sgn_violation", "chain_rule_residual", "el_residual",
                         "subgrad_slack_phi", "subgrad_slack_v", "subgrad_slack_w",
                         "split_identity_residual"])
            for r in rows:
                wr.writerow([r[0], r[1]] + [_fmt(v) for v in r[2:]])
        write_json(out / "decomposition.json", {"reports": reports})
        checks = {f"config_{k}": d["status"] == "PASS" and d["apriori_ok"]
                  for k, d in enumerate(reports)}
        return {"batch": reports}, checks

    grid, coeffs, h = _problem(cfg)
    sol = solve_resolvent(h, coeffs, grid, cfg.schedule)
    write_solution_csv(out / "solution.csv", grid, sol)
    rep = full_report(sol, coeffs, grid, tol, rng=rng)
    write_json(out / "decomposition.json", rep.to_dict())
    summary = _solution_summary(sol, grid)
    checks = dict(rep.checks)
    checks["apriori"] = summary["apriori_ok"]
    return {"solution": summary, "decomposition": rep.to_dict()}, checks


def cmd_mosco(cfg, out: Path, tol, rng):
    grid, coeffs, h = _problem(cfg)
    study = graph_convergence_study(h, coeffs, grid, cfg.eps_list,
                                    tol=cfg.schedule.newton_tol, max_newton=cfg.schedule.max_newton)
    (out / "mosco.csv").write_text(study.to_csv())
    checks = {
        "m2_bounds": all(0 <= g <= b for g, b in zip(study.gaps, study.bounds)),
        "apriori": all(study.apriori_ok),
        "increments_monotone_tail": not study.warnings,
    }
    try:
        w = m1_refinement_witness(h, coeffs, grid, cfg.eps_list, tol=tol["m1"], study=study)
        m1 = {"tail_min": w.tail_min, "phi_limit": w.phi_limit, "holds": True}
    except AssertionError as exc:
        m1 = {"holds": False, "error": str(exc)}
    checks["m1_witness"] = m1["holds"]
    # probe the M2 bound on a few random nodal functions as well
    probes = []
    for _ in range(5):
        theta = rng.standard_normal(grid.n + 1).cumsum() * grid.h_x ** 0.5
        for eps in cfg.eps_list:
            gap, bound = m2_gap(eps, theta, coeffs, grid)
            probes.append(0 <= gap <= bound)
    checks["m2_probes"] = all(probes)
    result = {
        "eps_values": study.eps_values,
        "energy_increments": study.energy_increments(),
        "limit_energy": study.limit_energy,
        "final_energy_gap": abs(study.energy_trace[-1] - study.limit_energy),
        "m1": m1,
        "warnings": study.warnings,
    }
    return {"mosco": result}, checks


def cmd_refine(cfg, out: Path, tol, rng):
    ns = [cfg.n * 2 ** k for k in range(cfg.refine_levels)]
    sols = []
    for n in ns:
        grid, coeffs, h = _problem(cfg, n)
        sol = solve_resolvent(h, coeffs, grid, cfg.schedule)
        rep = full_report(sol, coeffs, grid, tol, trials=20, rng=rng)
        sols.append((grid, sol, rep))
    rows = []
    for k, (grid, sol, rep) in enumerate(sols):
        if k + 1 < len(sols):
            fine = sols[k + 1][1].theta[::2]
            err = weighted_norm(sol.theta - fine, grid)
        else:
            err = float("nan")
        rows.append({
            "n": grid.n, "h_x": grid.h_x, "diff_to_finer": err,
            "h2_discrete": rep.h2_discrete, "h2_formula_residual": rep.h2_formula_residual,
            "boundary_flux_left": rep.boundary_flux[0], "boundary_flux_right": rep.boundary_flux[1],
            "el_residual": rep.el_residual,
        })
    with (out / "refine.csv").open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(list(rows[0]))
        for r in rows:
            wr.writerow([r["n"]] + [_fmt(v) for k, v in r.items() if k != "n"])
    h2 = [r["h2_discrete"] for r in rows]
    checks = {
        "h2_variation": (max(h2) - min(h2)) <= tol["h2_variation"] * max(max(h2), 1e-300) or max(h2) == 0,
        "h2_formula": all(r["h2_formula_residual"] <= tol["h2_formula"] for r in rows),
        "boundary_flux": all(
            rows[k + 1][side] <= (1 + tol["boundary_slack"]) * rows[k][side] + 1e-14
            for k in range(len(rows) - 1)
            for side in ("boundary_flux_left", "boundary_flux_right")
        ),
        "el": all(r["el_residual"] <= tol["el"] * (1 + weighted_norm(s.h, g))
                  for r, (g, s, _) in zip(rows, sols)),
    }
    return {"refine": rows}, checks


def cmd_flow(cfg, out: Path, tol, rng):
    grid, coeffs, theta0 = _problem(cfg)
    traj = run_flow(theta0, cfg.tau, cfg.steps, coeffs, grid, cfg.schedule)
    (out / "flow.csv").write_text(traj.to_csv())
    if cfg.dump_states:
        with (out / "flow_states.csv").open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["step", "x", "theta"])
            for k, st in enumerate(traj.states):
                for x, v in zip(grid.nodes, st):
                    wr.writerow([k, _fmt(x), _fmt(v)])
    scale = float(np.dot(grid.node_weights, np.abs(theta0))) or 1.0
    drift = max(abs(m - traj.masses[0]) for m in traj.masses) / scale
    checks = {
        "dissipation": min(traj.dissipation_slacks) >= -tol["dissipation"],
        "mass": drift <= tol["mass"],
        "energy_nonincreasing": all(b <= a for a, b in zip(traj.energies, traj.energies[1:])),
    }
    result = {"steps_taken": len(traj.states) - 1, "steady": traj.steady, "mass_drift": drift,
              "min_dissipation_slack": min(traj.dissipation_slacks),
              "final_energy": traj.energies[-1]}
    return {"flow": result}, checks


HANDLERS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "mosco": cmd_mosco,
    "refine": cmd_refine,
    "flow": cmd_flow,
}


def run(cfg: ExperimentConfig, out_dir=None) -> int:
    """Dispatch one experiment; returns the process exit status."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.schedule is None:
        cfg.schedule = EpsSchedule()
    tol = _tolerances(cfg)
    rng = np.random.default_rng(cfg.seed)
    report = {
        "tvdecomp_version": __version__,
        "command": cfg.command,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "tolerances": tol,
    }
    try:
        result, checks = HANDLERS[cfg.command](cfg, out, tol, rng)
    except ConvergenceError as exc:
        report.update(status="FAIL", error=str(exc), last_residual=exc.residual,
                      failed_eps=exc.eps, iterations=exc.iterations, checks={"converged": False})
        write_json(out / "report.json", report)
        log.error("%s", exc)
        return 1
    report.update(result)
    report["checks"] = checks
    report["status"] = "PASS" if all(checks.values()) else "FAIL"
    write_json(out / "report.json", report)
    for name, ok in checks.items():
        log.info("%-28s %s", name, "PASS" if ok else "FAIL")
    return 0 if report["status"] == "PASS" else 1


def build_parser():
    p = argparse.ArgumentParser(prog="tvdecomp", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, default=None, help="seed (overrides config seed)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text, command=args.command)
    except OSError as exc:
        print(f"tvdecomp: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        for err in exc.errors:
            print(f"tvdecomp: config error: {err}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
