"""Retransmission-count distributions for bounded documents on failure-prone channels.

Computes P[N_b > n], the probability that a document bounded at b needs
more than n transmission attempts, three independent ways: Monte Carlo
simulation, exact quadrature of the conditional-geometric mixture, and
closed-form approximations (power-law body times incomplete-Gamma tail),
and cross-validates them.
"""

__version__ = "0.1.0"

from .asym import (
    ApproxParams,
    PrefactorMode,
    TransitionReport,
    exact_integer_ccdf,
    exp_tail_asymptote,
    exp_tail_general,
    log_body,
    log_upper_bound,
    power_law_limit,
    power_law_region_check,
    transition_point,
    uniform_approx,
)
from .dists import (
    BoundedDoc,
    CoupledModel,
    CouplingMode,
    CouplingReport,
    DerivedLaw,
    Exponential,
    Gamma,
    SlowVaryGammaDoc,
    SlowVaryLogPower,
    SlowVaryOne,
    Weibull,
    derive_doc_law,
    sample_bounded,
    validate_coupling,
)
from .mc import (
    CcdfCurve,
    CurvePoint,
    RandomStream,
    Source,
    Tally,
    empirical_ccdf,
    run_tally,
    sample_N,
    sample_N_naive,
    wilson_interval,
)
from .oracle import OracleResult, ccdf_exact, ccdf_exact_curve

__all__ = [
    "ApproxParams", "BoundedDoc", "CcdfCurve", "CoupledModel", "CouplingMode",
    "CouplingReport", "CurvePoint", "DerivedLaw", "Exponential", "Gamma",
    "OracleResult", "PrefactorMode", "RandomStream", "Source", "SlowVaryGammaDoc",
    "SlowVaryLogPower", "SlowVaryOne", "Tally", "TransitionReport", "Weibull",
    "ccdf_exact", "ccdf_exact_curve", "derive_doc_law", "empirical_ccdf",
    "exact_integer_ccdf", "exp_tail_asymptote", "exp_tail_general", "log_body",
    "log_upper_bound", "power_law_limit", "power_law_region_check", "run_tally",
    "sample_N", "sample_N_naive", "sample_bounded", "transition_point",
    "uniform_approx", "validate_coupling", "wilson_interval",
]
