"""Backend selection: compiled kernel if importable, else the Python loop."""

from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np

from .engine import (
    EvidenceOrder,
    Outcome,
    RoundHook,
    TrialConfig,
    TrialResult,
    false_fraction,
    likelihood_tables,
    run_trial_python,
)

log = logging.getLogger(__name__)

try:
    from ._kernel import run_kernel as _run_kernel
except ImportError:  # pragma: no cover - depends on build
    _run_kernel = None
    log.debug("compiled kernel unavailable; using the pure-Python trial loop")

NATIVE_AVAILABLE = _run_kernel is not None
DEFAULT = "native" if NATIVE_AVAILABLE else "python"


_tables_cache: dict = {}


def _arrays(cfg: TrialConfig):
    key = cfg.bandit
    arrs = _tables_cache.get(key)
    if arrs is None:
        arrs = tuple(np.asarray(t, dtype=np.float64) for t in likelihood_tables(cfg.bandit))
        if len(_tables_cache) > 256:
            _tables_cache.clear()
        _tables_cache[key] = arrs
    return arrs


def run_trial_native(cfg: TrialConfig, on_round: Optional[RoundHook] = None) -> TrialResult:
    if _run_kernel is None:
        raise RuntimeError("compiled kernel is not built; reinstall the package with a C compiler")
    l_good, l_bad, ratio, cdf = _arrays(cfg)
    th = cfg.thresholds
    code, rounds, final = _run_kernel(
        cfg.bandit.k_agents,
        cfg.bandit.n_pulls,
        l_good,
        l_bad,
        ratio,
        cdf,
        int(cfg.policy.kind),
        float(cfg.policy.m),
        cfg.seed,
        cfg.max_rounds,
        th.high,
        th.low,
        th.anti_low,
        cfg.evidence_order == EvidenceOrder.SHUFFLED,
        cfg.initial_credences,
        on_round,
    )
    return TrialResult(Outcome(code), rounds, tuple(final), false_fraction(final))


_BACKENDS: dict[str, Callable[..., TrialResult]] = {
    "python": run_trial_python,
    "native": run_trial_native,
}


def get(name: Optional[str] = None) -> Callable[..., TrialResult]:
    name = name or DEFAULT
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}") from None
