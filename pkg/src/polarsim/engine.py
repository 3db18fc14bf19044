"""Single-trial simulation on a complete network.

A round is: every agent picks an arm from its credence, B-players pull n
times, then every agent Jeffrey-updates on all informative reports against
the same start-of-round snapshot. ``run_trial`` loops rounds until
``classify`` fires or ``max_rounds`` is reached.

``run_trial`` uses the compiled kernel when it is importable and falls back to
the pure-Python loop in this module otherwise; both give bit-identical
results for the same config.
"""

from __future__ import annotations

import bisect
import enum
import functools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import credal
from .credal import BanditConfig, DomainError, EvidenceReport, TrustKind, TrustPolicy
from .rng import MASK64, Xoshiro256

# window length and tolerance of the stagnation test for non-linear policies
STAGNATION_WINDOW = 1000
STAGNATION_TOL = 1e-9

DEFAULT_MAX_ROUNDS = 10**6


class Outcome(enum.IntEnum):
    ONGOING = 0
    TRUE_CONSENSUS = 1
    FALSE_CONSENSUS = 2
    POLARIZED = 3
    UNDECIDED = 4


class EvidenceOrder(enum.IntEnum):
    FIXED = 0
    SHUFFLED = 1

    @classmethod
    def parse(cls, text: str) -> "EvidenceOrder":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise DomainError(f"evidence_order must be one of fixed, shuffled; got {text!r}") from None


@dataclass(frozen=True)
class Thresholds:
    high: float = 0.99
    low: float = 0.5
    anti_low: float = 0.01

    def __post_init__(self):
        if not (0.0 < self.anti_low < self.low < self.high < 1.0):
            raise DomainError(
                "thresholds must satisfy 0 < anti_low < low < high < 1, got "
                f"anti_low={self.anti_low}, low={self.low}, high={self.high}"
            )


@dataclass(frozen=True)
class TrialConfig:
    bandit: BanditConfig
    policy: TrustPolicy = field(default_factory=TrustPolicy)
    seed: int = 0
    max_rounds: int = DEFAULT_MAX_ROUNDS
    thresholds: Thresholds = field(default_factory=Thresholds)
    evidence_order: EvidenceOrder = EvidenceOrder.FIXED
    # overrides the random draw; used for worked examples and traces
    initial_credences: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if not (0 <= self.seed <= MASK64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.max_rounds < 1:
            raise DomainError(f"max_rounds must be >= 1, got {self.max_rounds!r}")
        object.__setattr__(self, "evidence_order", EvidenceOrder(self.evidence_order))
        if self.initial_credences is not None:
            init = tuple(float(c) for c in self.initial_credences)
            if len(init) != self.bandit.k_agents:
                raise DomainError(
                    f"initial_credences has {len(init)} entries, k is {self.bandit.k_agents}"
                )
            if not all(0.0 <= c <= 1.0 for c in init):
                raise DomainError("initial credences must lie in [0, 1]")
            object.__setattr__(self, "initial_credences", init)


@dataclass
class PopulationState:
    credences: list[float]
    round: int
    rng: Xoshiro256


@dataclass(frozen=True)
class TrialResult:
    outcome: Outcome
    rounds: int
    final_credences: tuple[float, ...]
    false_fraction: float


@functools.lru_cache(maxsize=256)
def likelihood_tables(bandit: BanditConfig):
    """Per-k tables (l_good, l_bad, ratio, cdf_good) for k = 0..n."""
    n = bandit.n_pulls
    l_good = [credal.binomial_pmf(k, n, bandit.p_good) for k in range(n + 1)]
    l_bad = [credal.binomial_pmf(k, n, bandit.p_bad) for k in range(n + 1)]
    ratio = [credal.likelihood_ratio(k, n, bandit) for k in range(n + 1)]
    cdf = []
    acc = 0.0
    for p in l_good:
        acc += p
        cdf.append(acc)
    return tuple(l_good), tuple(l_bad), tuple(ratio), tuple(cdf)


def init_population(cfg: TrialConfig) -> PopulationState:
    rng = Xoshiro256(cfg.seed)
    if cfg.initial_credences is not None:
        credences = list(cfg.initial_credences)
    else:
        credences = [rng.open_random() for _ in range(cfg.bandit.k_agents)]
    return PopulationState(credences, 0, rng)


def choose_actions(state: PopulationState) -> list[str]:
    return ["A" if c < 0.5 else "B" for c in state.credences]


def sample_successes(cdf: Sequence[float], rng: Xoshiro256) -> int:
    """Inverse-CDF binomial draw consuming exactly one uniform."""
    n = len(cdf) - 1
    return min(bisect.bisect_right(cdf, rng.random()), n)


def generate_evidence(actions: Sequence[str], bandit: BanditConfig, rng: Xoshiro256) -> list[EvidenceReport]:
    """Draw each B-player's successes in ascending agent order."""
    cdf = likelihood_tables(bandit)[3]
    n = bandit.n_pulls
    reports = []
    for i, a in enumerate(actions):
        if a == "B":
            reports.append(EvidenceReport(i, n, sample_successes(cdf, rng)))
        else:
            reports.append(EvidenceReport(i, 0, 0))
    return reports


def shuffled_order(k: int, rng: Xoshiro256) -> list[int]:
    order = list(range(k))
    for i in range(k - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def update_round(
    state: PopulationState,
    reports: Sequence[EvidenceReport],
    cfg: TrialConfig,
    order: Optional[Sequence[int]] = None,
) -> PopulationState:
    """Synchronous Jeffrey update of every agent on this round's reports.

    Each agent conditions on its own report first, then on the other sources
    in ``order`` (ascending index by default). Belief distance uses the
    start-of-round snapshot; the evidence prior uses the agent's running
    credence.
    """
    bandit = cfg.bandit
    l_good, l_bad, ratio, _ = likelihood_tables(bandit)
    kind, m = int(cfg.policy.kind), cfg.policy.m
    start = state.credences
    if order is None:
        order = range(len(start))
    informative = [r for r in (reports[j] for j in order) if r.pulls > 0]
    for r in informative:
        if r.pulls != bandit.n_pulls:
            raise DomainError(f"report from {r.source} has {r.pulls} pulls, expected {bandit.n_pulls}")

    new = []
    for i, ci in enumerate(start):
        cur = ci
        own = reports[i]
        if own.pulls > 0:
            k = own.successes
            p_e = credal.mix_prior(cur, l_good[k], l_bad[k])
            w = credal.weight(kind, m, 0.0, p_e)
            cur = credal.jeffrey_from_parts(cur, w, l_good[k], l_bad[k], ratio[k])
        for r in informative:
            j = r.source
            if j == i:
                continue
            k = r.successes
            d = abs(ci - start[j])
            p_e = credal.mix_prior(cur, l_good[k], l_bad[k])
            w = credal.weight(kind, m, d, p_e)
            cur = credal.jeffrey_from_parts(cur, w, l_good[k], l_bad[k], ratio[k])
        new.append(cur)
    return PopulationState(new, state.round + 1, state.rng)


class Stagnation:
    """Tracks how long credences have stayed within a tolerance of a reference."""

    def __init__(self, credences: Sequence[float], round_: int = 0):
        self.ref = list(credences)
        self.since = round_

    def observe(self, credences: Sequence[float], round_: int) -> int:
        """Record a new state; return the number of rounds it has been stagnant."""
        if any(abs(c - r) >= STAGNATION_TOL for c, r in zip(credences, self.ref)):
            self.ref = list(credences)
            self.since = round_
        return round_ - self.since


def classify(state: PopulationState, cfg: TrialConfig, stagnant_rounds: int = 0) -> Outcome:
    """Terminal outcome of ``state`` or ``Outcome.ONGOING``.

    ``stagnant_rounds`` only matters for the non-linear policies, which have no
    exact frozen state; pass the count from a :class:`Stagnation` tracker.
    """
    cs = state.credences
    th = cfg.thresholds
    if all(c > th.high for c in cs):
        return Outcome.TRUE_CONSENSUS
    if all(c < th.low for c in cs):
        return Outcome.FALSE_CONSENSUS
    kind, m = cfg.policy.kind, cfg.policy.m
    if kind == TrustKind.NONE:
        return Outcome.ONGOING
    if kind.is_linear:
        if m <= 1.0:
            return Outcome.ONGOING
        low_bound = th.low if kind == TrustKind.IGNORE_LINEAR else th.anti_low
        highs = [c for c in cs if c > th.high]
        if not highs:
            return Outcome.ONGOING
        n_low = 0
        for c in cs:
            if c > th.high:
                continue
            if kind == TrustKind.IGNORE_LINEAR:
                if not c <= low_bound:
                    return Outcome.ONGOING
            elif not c < low_bound:
                return Outcome.ONGOING
            for h in highs:
                if not m * abs(c - h) >= 1.0:
                    return Outcome.ONGOING
            n_low += 1
        return Outcome.POLARIZED if n_low else Outcome.ONGOING
    if stagnant_rounds >= STAGNATION_WINDOW:
        n_high = sum(1 for c in cs if c > th.high)
        n_low = sum(1 for c in cs if c < th.low)
        if n_high and n_low and n_high + n_low == len(cs):
            return Outcome.POLARIZED
    return Outcome.ONGOING


def false_fraction(credences: Sequence[float]) -> float:
    return sum(1 for c in credences if c < 0.5) / len(credences)


RoundHook = Callable[[int, Sequence[float], Sequence[str], Sequence[EvidenceReport]], None]


def run_trial_python(cfg: TrialConfig, on_round: Optional[RoundHook] = None) -> TrialResult:
    """Reference trial loop in pure Python.

    ``on_round(round, start_credences, actions, reports)`` is called once per
    executed round before the update is applied.
    """
    state = init_population(cfg)
    nonlinear = not (cfg.policy.kind.is_linear or cfg.policy.kind == TrustKind.NONE)
    tracker = Stagnation(state.credences) if nonlinear else None
    outcome = classify(state, cfg)
    k = cfg.bandit.k_agents
    while outcome == Outcome.ONGOING and state.round < cfg.max_rounds:
        actions = choose_actions(state)
        reports = generate_evidence(actions, cfg.bandit, state.rng)
        order = shuffled_order(k, state.rng) if cfg.evidence_order == EvidenceOrder.SHUFFLED else None
        if on_round is not None:
            on_round(state.round, state.credences, actions, reports)
        state = update_round(state, reports, cfg, order)
        stagnant = tracker.observe(state.credences, state.round) if tracker else 0
        outcome = classify(state, cfg, stagnant)
    if outcome == Outcome.ONGOING:
        outcome = Outcome.UNDECIDED
    return TrialResult(outcome, state.round, tuple(state.credences), false_fraction(state.credences))


def run_trial(cfg: TrialConfig, backend: Optional[str] = None) -> TrialResult:
    """Run one trial with the selected backend (``"native"`` or ``"python"``)."""
    from . import _backend

    return _backend.get(backend)(cfg)


def trial_from_params(
    k: int,
    p_b: float,
    n: int,
    m: float,
    policy: TrustKind | str = TrustKind.IGNORE_LINEAR,
    seed: int = 0,
    **kwargs,
) -> TrialConfig:
    """Convenience constructor for a TrialConfig from flat parameters."""
    if isinstance(policy, str):
        policy = TrustKind.parse(policy)
    return TrialConfig(BanditConfig(p_b, n, k), TrustPolicy(policy, m), seed, **kwargs)

