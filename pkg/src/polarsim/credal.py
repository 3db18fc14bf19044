"""Belief-update mathematics for the two-armed bandit.

Every function here is pure. The compiled kernel in ``_kernel.pyx`` repeats
these formulas operation for operation, so any change to the arithmetic in
this module must be mirrored there (the differential tests will catch a
mismatch).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

ARM_A_RATE = 0.5

# exp() overflows just above this
_EXP_MAX = 709.0


class DomainError(ValueError):
    """Raised when an argument falls outside its mathematical domain."""


class TrustKind(enum.IntEnum):
    NONE = 0
    IGNORE_LINEAR = 1
    ANTI_LINEAR = 2
    LOGISTIC = 3
    EXPONENTIAL = 4
    BOUNDED_LOGISTIC = 5

    @classmethod
    def parse(cls, text: str) -> "TrustKind":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            allowed = ", ".join(k.name.lower() for k in cls)
            raise DomainError(f"unknown policy {text!r}; allowed: {allowed}") from None

    @property
    def is_linear(self) -> bool:
        return self in (TrustKind.IGNORE_LINEAR, TrustKind.ANTI_LINEAR)


@dataclass(frozen=True)
class BanditConfig:
    """Arm B's true rate, pulls per agent per round and population size."""

    p_b: float
    n_pulls: int
    k_agents: int

    def __post_init__(self):
        if not (0.5 < self.p_b < 1.0):
            raise DomainError(f"p_b must be in (0.5, 1.0), got {self.p_b!r}")
        if int(self.n_pulls) != self.n_pulls or not (1 <= self.n_pulls <= 1000):
            raise DomainError(f"n must be an integer in [1, 1000], got {self.n_pulls!r}")
        if int(self.k_agents) != self.k_agents or self.k_agents < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k_agents!r}")

    @property
    def epsilon(self) -> float:
        return self.p_b - ARM_A_RATE

    @property
    def p_good(self) -> float:
        return ARM_A_RATE + self.epsilon

    @property
    def p_bad(self) -> float:
        return ARM_A_RATE - self.epsilon


@dataclass(frozen=True)
class TrustPolicy:
    kind: TrustKind = TrustKind.IGNORE_LINEAR
    m: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TrustKind(self.kind))
        if not (math.isfinite(self.m) and self.m >= 0):
            raise DomainError(f"m must be a finite nonnegative number, got {self.m!r}")


@dataclass(frozen=True)
class EvidenceReport:
    """One agent's round result. ``pulls == 0`` means the source played arm A."""

    source: int
    pulls: int
    successes: int = field(default=0)

    def __post_init__(self):
        if self.pulls < 0 or not (0 <= self.successes <= self.pulls):
            raise DomainError(
                f"need 0 <= successes <= pulls, got successes={self.successes}, pulls={self.pulls}"
            )

    @property
    def informative(self) -> bool:
        return self.pulls > 0


def binomial_pmf(k: int, n: int, p: float) -> float:
    """C(n, k) p^k (1-p)^(n-k), accumulated in log space."""
    if n < 1 or k < 0 or k > n:
        raise DomainError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must be in (0, 1), got {p!r}")
    return math.exp(math.log(binomial_coefficient(n, k)) + k * math.log(p) + (n - k) * math.log1p(-p))


def binomial_coefficient(n: int, k: int) -> float:
    j = min(k, n - k)
    c = 1.0
    for i in range(1, j + 1):
        c = c * (n - j + i) / i
    return c


def log_likelihood_ratio(k: int, n: int, cfg: BanditConfig) -> float:
    """log of L_bad / L_good for k successes in n pulls."""
    return (n - 2 * k) * math.log(cfg.p_good / cfg.p_bad)


def likelihood_ratio(k: int, n: int, cfg: BanditConfig) -> float:
    lr = log_likelihood_ratio(k, n, cfg)
    if lr > _EXP_MAX:
        return math.inf
    return math.exp(lr)


def _check_report(report: EvidenceReport, cfg: BanditConfig) -> None:
    if report.pulls == 0:
        raise DomainError("arm-A reports carry no information and cannot be conditioned on")
    if report.pulls != cfg.n_pulls:
        raise DomainError(f"report has {report.pulls} pulls, config says {cfg.n_pulls}")


def bayes_from_ratio(prior: float, ratio: float) -> float:
    if prior <= 0.0:
        return 0.0
    if prior >= 1.0:
        return 1.0
    if ratio == 1.0:
        return prior
    return prior / (prior + (1.0 - prior) * ratio)


def strict_bayes_update(prior: float, report: EvidenceReport, cfg: BanditConfig) -> float:
    """Posterior credence that B is the better arm after conditioning on ``report``."""
    _check_report(report, cfg)
    return bayes_from_ratio(prior, likelihood_ratio(report.successes, report.pulls, cfg))


def evidence_prior(prior: float, report: EvidenceReport, cfg: BanditConfig) -> float:
    """Probability of the reported outcome under the updater's current credence."""
    _check_report(report, cfg)
    k, n = report.successes, report.pulls
    return mix_prior(prior, binomial_pmf(k, n, cfg.p_good), binomial_pmf(k, n, cfg.p_bad))


def mix_prior(prior: float, l_good: float, l_bad: float) -> float:
    return prior * l_good + (1.0 - prior) * l_bad


def trust_weight(policy: TrustPolicy, d: float, p_i_e: float) -> float:
    """Credence the updater assigns to a report from a source at belief distance ``d``."""
    return weight(int(policy.kind), policy.m, d, p_i_e)


def weight(kind: int, m: float, d: float, p_i_e: float) -> float:
    if kind == TrustKind.NONE:
        return 1.0
    if kind == TrustKind.IGNORE_LINEAR:
        dm = d * m
        # past the cutoff the weight is the evidence prior itself, bit for bit,
        # so the Jeffrey step is an exact no-op
        w = p_i_e if dm >= 1.0 else 1.0 - dm * (1.0 - p_i_e)
    elif kind == TrustKind.ANTI_LINEAR:
        dm = d * m
        w = p_i_e if dm == 1.0 else 1.0 - dm * (1.0 - p_i_e)
    elif kind == TrustKind.LOGISTIC:
        w = 1.0 / (1.0 + _safe_exp(m * (d - 0.5)))
    elif kind == TrustKind.EXPONENTIAL:
        w = math.exp(-m * d)
    elif kind == TrustKind.BOUNDED_LOGISTIC:
        w = (1.0 - p_i_e) / (1.0 + _safe_exp(m * (d - 0.5))) + p_i_e
    else:
        raise DomainError(f"unknown trust kind {kind!r}")
    if w < 0.0:
        return 0.0
    if w > 1.0:
        return 1.0
    return w


def _safe_exp(x: float) -> float:
    return math.inf if x > _EXP_MAX else math.exp(x)


def jeffrey_update(prior: float, report: EvidenceReport, cfg: BanditConfig, p_f_e: float) -> float:
    """Jeffrey conditionalization on ``report`` held with credence ``p_f_e``."""
    _check_report(report, cfg)
    if not (0.0 <= p_f_e <= 1.0):
        raise DomainError(f"p_f_e must be in [0, 1], got {p_f_e!r}")
    k, n = report.successes, report.pulls
    return jeffrey_from_parts(
        prior,
        p_f_e,
        binomial_pmf(k, n, cfg.p_good),
        binomial_pmf(k, n, cfg.p_bad),
        likelihood_ratio(k, n, cfg),
    )


def jeffrey_from_parts(prior: float, w: float, l_good: float, l_bad: float, ratio: float) -> float:
    post = bayes_from_ratio(prior, ratio)
    if w == 1.0:
        return post
    p_e = prior * l_good + (1.0 - prior) * l_bad
    if p_e >= 1.0 - 1e-12:
        return post
    post_not = (prior - prior * l_good) / (1.0 - p_e)
    # P(H|E) w + P(H|~E)(1-w), rewritten around the prior so w == P(E) returns
    # the prior exactly
    out = prior + (w - p_e) * (post - post_not)
    if out < 0.0:
        return 0.0
    if out > 1.0:
        return 1.0
    return out
