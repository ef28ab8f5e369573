"""Resilient state recovery for linear systems under sparse sensor attacks.

Decode window-start states from measurement windows where an adversary
corrupts a bounded-cardinality set of channels, certify when recovery is
exact or stable, design worst-case attacks, and run the Monte Carlo
experiments that map the success phase transition.
"""

__version__ = "0.1.0"

from .attack import (AttackDesign, AttackDesignError, SuccessVerdict, alpha_bound,
                     design_attack, nullspace_attack, sigma1, sigma1_detail,
                     verify_success)
from .bench import (ExperimentConfig, ScurveRow, SweepResult, SweepRow, run_cell,
                    run_scurve, run_sweep, write_scurve_csv, write_sweep_csv)
from .certify import (BoundReport, CspCertificate, RipCertificate, SupportRatio,
                      SurfaceCell, UniquenessCertificate, bound_csp_error,
                      bound_rip_error, bound_weighted_error, check_uniqueness,
                      csp_beta, l1_support_ratio, lemma_csp_from_rip, rip_delta,
                      weight_surface)
from .decode import (Estimate, WeightVector, is_successful_recovery, l1_decode,
                     make_weights, weighted_l1_decode, weighted_l1_norm)
from .lp import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, LpNumericalError,
                 LpProblem, LpSolution, solve_lp)
from .model import (AttackScenario, LtiSystem, ObservationWindow,
                    UnobservableWindowError, build_observability,
                    flatten_supports, random_system, simulate_window)
from .prior import (OMEGA_TRUSTED, OMEGA_UNTRUSTED, PriorQuality, SupportPrior,
                    choose_weight, compute_quality, simulate_prior)
from .util import as_row_array, complement_rows, derive_seed, nullspace

__all__ = [
    "AttackDesign", "AttackDesignError", "AttackScenario", "BoundReport",
    "CspCertificate", "EQ", "Estimate", "ExperimentConfig", "GE", "INFEASIBLE",
    "LE", "LpNumericalError", "LpProblem", "LpSolution", "LtiSystem",
    "OMEGA_TRUSTED", "OMEGA_UNTRUSTED", "OPTIMAL", "ObservationWindow",
    "PriorQuality", "RipCertificate", "ScurveRow", "SuccessVerdict",
    "SupportPrior", "SupportRatio", "SurfaceCell", "SweepResult", "SweepRow",
    "UNBOUNDED", "UniquenessCertificate", "UnobservableWindowError",
    "WeightVector", "alpha_bound", "as_row_array", "bound_csp_error",
    "bound_rip_error", "bound_weighted_error", "build_observability",
    "check_uniqueness", "choose_weight", "complement_rows", "compute_quality",
    "csp_beta", "derive_seed", "design_attack", "flatten_supports",
    "is_successful_recovery", "l1_decode", "l1_support_ratio",
    "lemma_csp_from_rip", "make_weights", "nullspace", "nullspace_attack",
    "random_system", "rip_delta", "run_cell", "run_scurve", "run_sweep",
    "sigma1", "sigma1_detail", "simulate_prior", "simulate_window", "solve_lp",
    "verify_success", "weight_surface", "weighted_l1_decode",
    "weighted_l1_norm", "write_scurve_csv", "write_sweep_csv",
]
