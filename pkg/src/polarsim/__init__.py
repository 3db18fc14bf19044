"""Networked Bayesian bandit agents with distance-discounted Jeffrey updating."""

__version__ = "0.1.0"

from .credal import (  # noqa: E402
    BanditConfig,
    DomainError,
    EvidenceReport,
    TrustKind,
    TrustPolicy,
    binomial_pmf,
    evidence_prior,
    jeffrey_update,
    strict_bayes_update,
    trust_weight,
)
from .engine import Outcome, Thresholds, TrialConfig, TrialResult, run_trial  # noqa: E402
from .sweep import ConfigError, OutcomeStats, SweepSpec, run_sweep  # noqa: E402

__all__ = [
    "BanditConfig",
    "ConfigError",
    "DomainError",
    "EvidenceReport",
    "Outcome",
    "OutcomeStats",
    "SweepSpec",
    "Thresholds",
    "TrialConfig",
    "TrialResult",
    "TrustKind",
    "TrustPolicy",
    "binomial_pmf",
    "evidence_prior",
    "jeffrey_update",
    "run_sweep",
    "run_trial",
    "strict_bayes_update",
    "trust_weight",
]
