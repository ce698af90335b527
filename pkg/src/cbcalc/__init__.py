"""Numerics for continuous-state branching processes conditioned on extinction.

The package turns the extinction calculus of (sub)critical CB processes into
executable pieces: mechanism classification, the phi/varphi/u_t flow, scale
functions by numerical Laplace inversion, stationary and potential measures,
the conditional limit laws (quasi-stationary family, size-biased stationary
measure, near-extinction and fixed-extinction-time limits with their Levy
triplets), and a seeded Monte Carlo engine that validates the limit theorems
empirically.
"""

__version__ = "0.1.0"

from .extinction import (ExtinctionKernel, normalized_transition_transform,
                         rescaled_conditional_transform)
from .invlaplace import DeHoogInverter, InversionError
from .laws import (LawDomainError, LimitLaw, frullani_residual, limit_law,
                   mu_s_density, mu_s_lt, qsd_lt, size_bias_check,
                   vinf_exists, vinf_laplace_exponent, vinf_levy_density,
                   vinf_lt, vq_laplace_exponent, vq_levy_density, vq_lt,
                   ws_lt, ws_mean, yaglom_lt, yaglom_mean)
from .mechanism import (BranchingMechanism, ClosedForm, LevyMeasure,
                        MechanismClass, MechanismError, linear_plus_quadratic,
                        load_mechanism, mechanism_from_config, quadratic,
                        stable, stable_levy_measure)
from .montecarlo import (ConditionedSample, EstimatorGuardError, LampertiPath,
                         McEstimate, SimConfig, WeightedSample,
                         lamperti_terminal_ensemble, mc_fixed_time,
                         mc_near_extinction, mc_qprocess,
                         mc_reverse_from_extinction, sample_transition_exact,
                         sample_transition_positive, simulate_lamperti)
from .reference import OracleError, OracleFamily, lpq_family, oracle_eval, stable_family
from .scale import ScaleFunction, closed_form_scale, potential_mass

__all__ = [
    "__version__",
    "BranchingMechanism", "ClosedForm", "LevyMeasure", "MechanismClass",
    "MechanismError", "quadratic", "linear_plus_quadratic", "stable",
    "stable_levy_measure", "mechanism_from_config", "load_mechanism",
    "ExtinctionKernel", "normalized_transition_transform",
    "rescaled_conditional_transform",
    "DeHoogInverter", "InversionError",
    "ScaleFunction", "closed_form_scale", "potential_mass",
    "LimitLaw", "LawDomainError", "limit_law", "qsd_lt", "yaglom_lt",
    "yaglom_mean", "mu_s_density", "mu_s_lt", "ws_lt", "ws_mean",
    "vq_laplace_exponent", "vq_lt", "vq_levy_density", "vinf_exists",
    "vinf_laplace_exponent", "vinf_lt", "vinf_levy_density",
    "size_bias_check", "frullani_residual",
    "SimConfig", "McEstimate", "LampertiPath", "ConditionedSample",
    "WeightedSample", "EstimatorGuardError", "sample_transition_exact",
    "sample_transition_positive", "mc_near_extinction", "mc_fixed_time",
    "mc_qprocess", "mc_reverse_from_extinction", "simulate_lamperti",
    "lamperti_terminal_ensemble",
    "OracleFamily", "OracleError", "oracle_eval", "stable_family",
    "lpq_family",
]
