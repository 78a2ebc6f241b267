"""Numerical laboratory for operational transition probabilities and
probability-rule rigidity in finite-dimensional and truncated-Fock quantum
models.

The package computes the transition probability between pure states by two
independent routes, realizes ensemble steering through purification, measures
the Jensen gap that a distorted probability rule opens between two steering
choices of the same marginal state, and certifies numerically that only the
undistorted (Born) rule closes that gap everywhere.
"""

__version__ = "0.1.0"

from .linalg import (
    BipartiteState,
    DensityMatrix,
    Effect,
    Povm,
    StateVector,
    haar_random_state,
    partial_trace_a,
    purify,
    tensor,
)
from .rules import PhiRule, check_admissibility, phi_eval, prob_ensemble, prob_pure
from .steering import (
    Ensemble,
    SteeringOutcome,
    barycenter,
    geometric_fock_ensemble,
    hjw_povm,
    steer,
    verify_marginal_invariance,
)
from .transition import (
    OptimizerConfig,
    TransitionResult,
    complementarity_check,
    tau_closed,
    tau_extremal_effect,
    tau_mixed,
    tau_optimized,
)
from .signaling import (
    ExperimentRecord,
    SteeringScenario,
    build_two_level_scenario,
    detectability,
    jensen_gap,
    run_steering_experiment,
)
from .rigidity import CertificationResult, RigidityReport, certify_identity, scan_gaps
from .fock import (
    CoherentSpec,
    coherent_vector,
    sigma_affinity_convergence,
    tau_coherent_analytic,
    truncation_convergence,
)

__all__ = [
    "BipartiteState",
    "CertificationResult",
    "CoherentSpec",
    "DensityMatrix",
    "Effect",
    "Ensemble",
    "ExperimentRecord",
    "OptimizerConfig",
    "PhiRule",
    "Povm",
    "RigidityReport",
    "StateVector",
    "SteeringOutcome",
    "SteeringScenario",
    "TransitionResult",
    "barycenter",
    "build_two_level_scenario",
    "certify_identity",
    "check_admissibility",
    "coherent_vector",
    "complementarity_check",
    "detectability",
    "geometric_fock_ensemble",
    "haar_random_state",
    "hjw_povm",
    "jensen_gap",
    "partial_trace_a",
    "phi_eval",
    "prob_ensemble",
    "prob_pure",
    "purify",
    "run_steering_experiment",
    "scan_gaps",
    "sigma_affinity_convergence",
    "steer",
    "tau_closed",
    "tau_coherent_analytic",
    "tau_extremal_effect",
    "tau_mixed",
    "tau_optimized",
    "tensor",
    "truncation_convergence",
    "verify_marginal_invariance",
]
