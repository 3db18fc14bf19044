"""Parameter sweeps: grid expansion, per-trial seeding, parallel execution and
aggregation into per-cell outcome statistics."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .credal import BanditConfig, DomainError, TrustKind, TrustPolicy
from .engine import (
    DEFAULT_MAX_ROUNDS,
    EvidenceOrder,
    Outcome,
    Thresholds,
    TrialConfig,
    run_trial,
)
from .rng import MASK64, trial_seed


class ConfigError(DomainError):
    """A sweep or run configuration value is missing, malformed or out of range."""

    def __init__(self, key: str, value, allowed: str):
        self.key, self.value, self.allowed = key, value, allowed
        super().__init__(f"{key} must be {allowed}, got {value!r}")


@dataclass(frozen=True)
class SweepSpec:
    k_values: tuple[int, ...] = (10,)
    p_b_values: tuple[float, ...] = (0.7,)
    n_values: tuple[int, ...] = (20,)
    m_values: tuple[float, ...] = (2.0,)
    policies: tuple[TrustKind, ...] = (TrustKind.IGNORE_LINEAR,)
    trials_per_cell: int = 1000
    base_seed: int = 0
    max_rounds: int = DEFAULT_MAX_ROUNDS
    thresholds: Thresholds = field(default_factory=Thresholds)
    evidence_order: EvidenceOrder = EvidenceOrder.FIXED
    # keys that were not given explicitly and fell back to defaults
    defaulted: tuple[str, ...] = ()

    def resolved(self) -> dict:
        """Plain-data view of the spec for manifests."""
        th = self.thresholds
        return {
            "k": list(self.k_values),
            "p_b": list(self.p_b_values),
            "n": list(self.n_values),
            "m": list(self.m_values),
            "policy": [p.name.lower() for p in self.policies],
            "trials": self.trials_per_cell,
            "base_seed": self.base_seed,
            "max_rounds": self.max_rounds,
            "high_threshold": th.high,
            "low_threshold": th.low,
            "anti_low_threshold": th.anti_low,
            "evidence_order": self.evidence_order.name.lower(),
        }


@dataclass(frozen=True)
class Cell:
    index: int
    k: int
    p_b: float
    n: int
    m: float
    policy: TrustKind


@dataclass(frozen=True)
class TrialRecord:
    cell_index: int
    trial_index: int
    seed: int
    outcome: Outcome
    rounds: int
    false_fraction: float


@dataclass(frozen=True)
class OutcomeStats:
    cell: Cell
    trials: int
    n_true: int
    n_false: int
    n_polarized: int
    n_undecided: int
    mean_rounds_to_consensus: Optional[float]
    se_rounds_to_consensus: Optional[float]
    mean_false_fraction: float
    se_false_fraction: float

    @property
    def freq_true(self) -> float:
        return self.n_true / self.trials

    @property
    def freq_false(self) -> float:
        return self.n_false / self.trials

    @property
    def freq_polarized(self) -> float:
        return self.n_polarized / self.trials

    @property
    def freq_undecided(self) -> float:
        return self.n_undecided / self.trials

    @property
    def n_consensus(self) -> int:
        return self.n_true + self.n_false

    def se(self, freq: float) -> float:
        return math.sqrt(freq * (1.0 - freq) / self.trials)

    @property
    def se_true(self) -> float:
        return self.se(self.freq_true)

    @property
    def se_false(self) -> float:
        return self.se(self.freq_false)

    @property
    def se_polarized(self) -> float:
        return self.se(self.freq_polarized)

    @property
    def se_undecided(self) -> float:
        return self.se(self.freq_undecided)


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[Cell]
    records: list[TrialRecord]
    stats: list[OutcomeStats]

    @property
    def trials_executed(self) -> int:
        return len(self.records)


def _check_list(name: str, values: Sequence, ok, allowed: str) -> None:
    if len(values) == 0:
        raise ConfigError(name, list(values), "a nonempty list")
    for v in values:
        if not ok(v):
            raise ConfigError(name, v, allowed)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate(spec: SweepSpec) -> None:
    _check_list("k", spec.k_values, lambda v: _is_int(v) and v >= 2, "an integer >= 2")
    _check_list("p_b", spec.p_b_values, lambda v: 0.5 < v < 1.0, "in (0.5, 1.0)")
    _check_list("n", spec.n_values, lambda v: _is_int(v) and 1 <= v <= 1000, "an integer in [1, 1000]")
    _check_list("m", spec.m_values, lambda v: math.isfinite(v) and v >= 0, "a finite number >= 0")
    _check_list("policy", spec.policies, lambda v: isinstance(v, TrustKind), "a trust policy kind")
    if not (_is_int(spec.trials_per_cell) and spec.trials_per_cell >= 1):
        raise ConfigError("trials", spec.trials_per_cell, "an integer >= 1")
    if not (_is_int(spec.base_seed) and 0 <= spec.base_seed <= MASK64):
        raise ConfigError("base_seed", spec.base_seed, "an integer in [0, 2^64 - 1]")
    if not (_is_int(spec.max_rounds) and spec.max_rounds >= 1):
        raise ConfigError("max_rounds", spec.max_rounds, "an integer >= 1")


def expand_grid(spec: SweepSpec) -> list[tuple[Cell, TrialConfig]]:
    """Cells in lexicographic order over (k, p_b, n, m, policy), each with a
    trial template whose seed is filled in per trial."""
    validate(spec)
    out = []
    grid = itertools.product(spec.k_values, spec.p_b_values, spec.n_values, spec.m_values, spec.policies)
    for index, (k, p_b, n, m, policy) in enumerate(grid):
        cell = Cell(index, k, p_b, n, m, policy)
        template = TrialConfig(
            BanditConfig(p_b, n, k),
            TrustPolicy(policy, m),
            seed=0,
            max_rounds=spec.max_rounds,
            thresholds=spec.thresholds,
            evidence_order=spec.evidence_order,
        )
        out.append((cell, template))
    return out


def _run_chunk(args) -> list[TrialRecord]:
    template, cell_index, base_seed, trial_indices, backend = args
    records = []
    for t in trial_indices:
        seed = trial_seed(base_seed, cell_index, t)
        res = run_trial(replace(template, seed=seed), backend)
        records.append(TrialRecord(cell_index, t, seed, res.outcome, res.rounds, res.false_fraction))
    return records


def aggregate(cell: Cell, records: Sequence[TrialRecord]) -> OutcomeStats:
    """Fold trial records (in trial order) into cell statistics."""
    T = len(records)
    counts = {o: 0 for o in Outcome}
    for r in records:
        counts[r.outcome] += 1
    cons = [r.rounds for r in records if r.outcome in (Outcome.TRUE_CONSENSUS, Outcome.FALSE_CONSENSUS)]
    mean_rounds, se_rounds = _mean_se(cons)
    mean_ff, se_ff = _mean_se([r.false_fraction for r in records])
    return OutcomeStats(
        cell,
        T,
        counts[Outcome.TRUE_CONSENSUS],
        counts[Outcome.FALSE_CONSENSUS],
        counts[Outcome.POLARIZED],
        counts[Outcome.UNDECIDED],
        mean_rounds,
        se_rounds,
        mean_ff,
        se_ff,
    )


def _mean_se(xs: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    if not xs:
        return None, None
    n = len(xs)
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var / n)


def run_cell(
    template: TrialConfig,
    trials_per_cell: int,
    seeds: Optional[Iterable[int]] = None,
    cell: Optional[Cell] = None,
    base_seed: int = 0,
    backend: Optional[str] = None,
) -> OutcomeStats:
    """Run one cell serially.

    ``seeds`` gives one seed per trial; when omitted, seeds are derived from
    ``base_seed`` and the cell index exactly as a sweep would.
    """
    if cell is None:
        b, p = template.bandit, template.policy
        cell = Cell(0, b.k_agents, b.p_b, b.n_pulls, p.m, p.kind)
    if seeds is None:
        seeds = [trial_seed(base_seed, cell.index, t) for t in range(trials_per_cell)]
    seeds = list(seeds)
    if len(seeds) != trials_per_cell:
        raise ConfigError("seeds", len(seeds), f"exactly {trials_per_cell} seeds")
    records = []
    for t, s in enumerate(seeds):
        res = run_trial(replace(template, seed=s), backend)
        records.append(TrialRecord(cell.index, t, s, res.outcome, res.rounds, res.false_fraction))
    return aggregate(cell, records)


def run_sweep(spec: SweepSpec, jobs: int = 1, backend: Optional[str] = None) -> SweepResult:
    """Run every cell of ``spec``; output is independent of ``jobs``."""
    cells = expand_grid(spec)
    T = spec.trials_per_cell
    jobs = max(1, int(jobs))
    total = len(cells) * T
    chunk = max(1, min(T, total // (jobs * 8) or 1))
    tasks = []
    for cell, template in cells:
        for lo in range(0, T, chunk):
            tasks.append((template, cell.index, spec.base_seed, range(lo, min(T, lo + chunk)), backend))

    if jobs == 1:
        chunks = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_chunk, tasks))

    records = sorted(
        (r for c in chunks for r in c), key=lambda r: (r.cell_index, r.trial_index)
    )
    if len(records) != total:
        raise RuntimeError(f"expected {total} trial records, got {len(records)}")
    by_cell: list[list[TrialRecord]] = [[] for _ in cells]
    for r in records:
        by_cell[r.cell_index].append(r)
    stats = [aggregate(cell, by_cell[cell.index]) for cell, _ in cells]
    return SweepResult(spec, [c for c, _ in cells], records, stats)


@dataclass(frozen=True)
class PairedStats:
    cell_a: Cell
    cell_b: Cell
    stats_a: OutcomeStats
    stats_b: OutcomeStats
    mean_false_a: float
    mean_false_b: float
    diff: float
    se_diff: float


def compare_policies(
    spec: SweepSpec,
    policy_a: TrustKind,
    policy_b: TrustKind,
    spec_b: Optional[SweepSpec] = None,
    jobs: int = 1,
    backend: Optional[str] = None,
) -> list[PairedStats]:
    """Paired per-cell comparison of mean false-belief fraction (a minus b).

    Both policies run on the same grid with the same per-trial seeds, so the
    difference uses the paired standard error. ``spec_b`` may supply a
    separate spec for policy b; its grid must match ``spec``.
    """
    spec_b = spec_b or spec
    grid_a = (spec.k_values, spec.p_b_values, spec.n_values, spec.m_values, spec.trials_per_cell, spec.base_seed)
    grid_b = (
        spec_b.k_values,
        spec_b.p_b_values,
        spec_b.n_values,
        spec_b.m_values,
        spec_b.trials_per_cell,
        spec_b.base_seed,
    )
    if grid_a != grid_b:
        raise ConfigError("grid", grid_b, f"identical to the first policy's grid {grid_a}")
    res_a = run_sweep(replace(spec, policies=(TrustKind(policy_a),)), jobs, backend)
    res_b = run_sweep(replace(spec_b, policies=(TrustKind(policy_b),)), jobs, backend)
    T = spec.trials_per_cell
    out = []
    for sa, sb in zip(res_a.stats, res_b.stats):
        ra = res_a.records[sa.cell.index * T:(sa.cell.index + 1) * T]
        rb = res_b.records[sb.cell.index * T:(sb.cell.index + 1) * T]
        diffs = [x.false_fraction - y.false_fraction for x, y in zip(ra, rb)]
        mean_d, se_d = _mean_se(diffs)
        out.append(
            PairedStats(
                sa.cell, sb.cell, sa, sb, sa.mean_false_fraction, sb.mean_false_fraction, mean_d, se_d
            )
        )
    return out


def default_jobs() -> int:
    return os.cpu_count() or 1
