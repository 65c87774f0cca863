"""Resolvent solver and subdifferential-decomposition verifier for 1D
weighted, regularized total variation."""

from .grid import (
    CoefficientPair,
    Grid,
    GridFunction,
    build_grid,
    forward_diff,
    neg_divergence,
    sample_coefficients,
    weighted_norm,
)
from .functionals import (
    EnergyBreakdown,
    Interval,
    eval_energy,
    f_eps,
    f_eps_prime,
    rho_apply,
    sgn_interval,
    soft_threshold,
)
from .resolvent import (
    EpsSchedule,
    ResolventSolution,
    brute_force_oracle,
    energy_gradient,
    solve_resolvent,
    solve_smooth,
)
from .decomposition import DecompositionReport, full_report, split_components
from .mosco import MoscoStudy, graph_convergence_study, m1_refinement_witness, m2_gap
from .flow import FlowTrajectory, run_flow, step

__version__ = "0.1.0"
