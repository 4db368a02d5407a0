"""Swendsen-Wang dynamics on the complete graph: analysis, simulation, couplings, cutoff experiments."""

__version__ = "0.1.0"

from .analysis import (
    DriftProfile,
    ModelParams,
    beta_critical,
    cutoff_constant,
    drift_F,
    drift_F_prime,
    drift_F_second,
    drift_G,
    drift_profile,
    fixed_point_a,
    iterate_drift,
    majority_vector,
    solve_theta,
)

__all__ = [
    "DriftProfile",
    "ModelParams",
    "beta_critical",
    "cutoff_constant",
    "drift_F",
    "drift_F_prime",
    "drift_F_second",
    "drift_G",
    "drift_profile",
    "fixed_point_a",
    "iterate_drift",
    "majority_vector",
    "solve_theta",
    "__version__",
]
