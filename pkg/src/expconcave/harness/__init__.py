"""Experiment orchestration: risk curves, estimators and lemma verification."""
from ..records import VerifierRecord
from .curves import (
    CurveSetup,
    Learner,
    RegretRow,
    RiskReport,
    RiskRow,
    SlopeFitError,
    fit_slope,
    regret_curve,
    risk_curve,
)
from .estimators import (
    DegenerateFeaturesError,
    estimate_population_risk,
    estimate_rho,
    estimate_theta,
    reference_minimizer,
    theta_bootstrap,
)
from .verify import verify_all_lemmas

__all__ = [
    "CurveSetup",
    "DegenerateFeaturesError",
    "Learner",
    "RegretRow",
    "RiskReport",
    "RiskRow",
    "SlopeFitError",
    "VerifierRecord",
    "estimate_population_risk",
    "estimate_rho",
    "estimate_theta",
    "fit_slope",
    "reference_minimizer",
    "regret_curve",
    "risk_curve",
    "theta_bootstrap",
    "verify_all_lemmas",
]
