"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. List-valued keys take
comma-separated values::

    k = 6, 10, 20
    p_b = 0.55, 0.7
    n = 10, 50
    m = 0, 1, 2, 3
    policy = ignore_linear
    trials = 300
    base_seed = 12345
"""

from __future__ import annotations

import logging
import math

from .credal import DomainError, TrustKind
from .engine import DEFAULT_MAX_ROUNDS, EvidenceOrder, Thresholds
from .sweep import ConfigError, SweepSpec, validate

log = logging.getLogger(__name__)

LIST_KEYS = ("k", "p_b", "n", "m", "policy")
SCALAR_KEYS = (
    "trials",
    "base_seed",
    "max_rounds",
    "high_threshold",
    "low_threshold",
    "anti_low_threshold",
    "evidence_order",
)
KEYS = LIST_KEYS + SCALAR_KEYS

DEFAULTS = {
    "k": "10",
    "p_b": "0.7",
    "n": "20",
    "m": "2",
    "policy": "ignore_linear",
    "trials": "1000",
    "base_seed": "0",
    "max_rounds": str(DEFAULT_MAX_ROUNDS),
    "high_threshold": "0.99",
    "low_threshold": "0.5",
    "anti_low_threshold": "0.01",
    "evidence_order": "fixed",
}


def _int(key: str, text: str, allowed: str) -> int:
    try:
        return int(text, 0) if text.lower().startswith("0x") else int(text)
    except ValueError:
        raise ConfigError(key, text, allowed) from None


def _float(key: str, text: str, allowed: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(key, text, allowed) from None
    if not math.isfinite(v):
        raise ConfigError(key, text, allowed)
    return v


def _split(key: str, text: str) -> list[str]:
    items = [t.strip() for t in text.split(",")]
    if not items or any(t == "" for t in items):
        raise ConfigError(key, text, "a comma-separated list of nonempty values")
    return items


def parse_config(text: str) -> SweepSpec:
    """Parse config text into a validated :class:`SweepSpec`.

    Unknown or repeated keys are errors. Keys not given take the defaults in
    ``DEFAULTS`` and are listed in ``SweepSpec.defaulted``.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", line, "of the form 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(key, value, f"a known key ({', '.join(KEYS)})")
        if key in raw:
            raise ConfigError(key, value, "given only once")
        raw[key] = value

    defaulted = tuple(k for k in KEYS if k not in raw)
    if defaulted:
        log.warning("config keys defaulted: %s", ", ".join(defaulted))
    vals = {**DEFAULTS, **raw}

    k_values = tuple(_int("k", t, "an integer >= 2") for t in _split("k", vals["k"]))
    p_b_values = tuple(_float("p_b", t, "in (0.5, 1.0)") for t in _split("p_b", vals["p_b"]))
    n_values = tuple(_int("n", t, "an integer in [1, 1000]") for t in _split("n", vals["n"]))
    m_values = tuple(_float("m", t, "a finite number >= 0") for t in _split("m", vals["m"]))
    try:
        policies = tuple(TrustKind.parse(t) for t in _split("policy", vals["policy"]))
    except DomainError:
        raise ConfigError(
            "policy", vals["policy"], "one of " + ", ".join(p.name.lower() for p in TrustKind)
        ) from None
    try:
        order = EvidenceOrder.parse(vals["evidence_order"])
    except DomainError:
        raise ConfigError("evidence_order", vals["evidence_order"], "one of fixed, shuffled") from None

    high = _float("high_threshold", vals["high_threshold"], "in (low_threshold, 1)")
    low = _float("low_threshold", vals["low_threshold"], "in (anti_low_threshold, high_threshold)")
    anti = _float("anti_low_threshold", vals["anti_low_threshold"], "in (0, low_threshold)")
    try:
        thresholds = Thresholds(high, low, anti)
    except DomainError:
        raise ConfigError(
            "high_threshold/low_threshold/anti_low_threshold",
            (high, low, anti),
            "ordered as 0 < anti_low < low < high < 1",
        ) from None

    spec = SweepSpec(
        k_values=k_values,
        p_b_values=p_b_values,
        n_values=n_values,
        m_values=m_values,
        policies=policies,
        trials_per_cell=_int("trials", vals["trials"], "an integer >= 1"),
        base_seed=_int("base_seed", vals["base_seed"], "an integer in [0, 2^64 - 1]"),
        max_rounds=_int("max_rounds", vals["max_rounds"], "an integer >= 1"),
        thresholds=thresholds,
        evidence_order=order,
        defaulted=defaulted,
    )
    validate(spec)
    return spec
