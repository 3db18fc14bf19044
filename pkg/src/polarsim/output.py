"""CSV writers and run manifests.

Column order is fixed. Credences and per-trial fractions are written with
``repr`` (shortest round-trip form); frequencies and means use six decimals.
Each output file gets a sidecar ``<file>.manifest.json`` so the CSV bytes
themselves depend only on the config and seed.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from . import __version__
from .rng import GENERATOR_NAME
from .sweep import OutcomeStats, TrialRecord

TRACE_HEADER = ("round", "agent", "credence", "action", "successes")
TRIALS_HEADER = (
    "cell_index", "k", "p_b", "n", "m", "policy", "trial_index", "seed", "outcome", "rounds", "false_fraction",
)
AGG_HEADER = (
    "cell_index", "k", "p_b", "n", "m", "policy", "trials",
    "freq_true", "freq_false", "freq_polarized", "freq_undecided",
    "se_true", "se_false", "se_polarized",
    "mean_rounds_consensus", "mean_false_fraction",
)


def fmt_real(x: float) -> str:
    return repr(float(x))


def fmt_freq(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.6f}"


def csv_line(fields: Iterable) -> str:
    return ",".join(str(f) for f in fields) + "\n"


def trial_rows(records: Sequence[TrialRecord], cells) -> Iterator[str]:
    for r in records:
        c = cells[r.cell_index]
        yield csv_line((
            r.cell_index, c.k, fmt_real(c.p_b), c.n, fmt_real(c.m), c.policy.name.lower(),
            r.trial_index, r.seed, r.outcome.name, r.rounds, fmt_real(r.false_fraction),
        ))


def agg_rows(stats: Sequence[OutcomeStats]) -> Iterator[str]:
    for s in stats:
        c = s.cell
        yield csv_line((
            c.index, c.k, fmt_real(c.p_b), c.n, fmt_real(c.m), c.policy.name.lower(), s.trials,
            fmt_freq(s.freq_true), fmt_freq(s.freq_false), fmt_freq(s.freq_polarized), fmt_freq(s.freq_undecided),
            fmt_freq(s.se_true), fmt_freq(s.se_false), fmt_freq(s.se_polarized),
            fmt_freq(s.mean_rounds_to_consensus), fmt_freq(s.mean_false_fraction),
        ))


@contextmanager
def atomic_outputs(paths: Sequence[Path]):
    """Yield temp paths; move them onto ``paths`` only if the block succeeds."""
    temps = []
    try:
        for p in paths:
            p = Path(p)
            fd, tmp = tempfile.mkstemp(prefix=f".{p.name}.", suffix=".part", dir=p.parent or ".")
            os.close(fd)
            temps.append(Path(tmp))
        yield temps
        for tmp, p in zip(temps, paths):
            os.replace(tmp, p)
    except BaseException:
        for tmp in temps:
            tmp.unlink(missing_ok=True)
        for p in paths:
            # a failed run must not leave stale outputs that look current
            Path(p).unlink(missing_ok=True)
        raise


def write_lines(path: Path, header: Sequence[str], rows: Iterable[str]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(csv_line(header))
        for row in rows:
            fh.write(row)


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def manifest(config: dict, base_seed: Optional[int], outputs: Sequence[Path], command: str) -> dict:
    return {
        "tool": "polarsim",
        "version": __version__,
        "command": command,
        "generator": GENERATOR_NAME,
        "config": config,
        "base_seed": base_seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": {Path(p).name: sha256(p) for p in outputs},
    }


def write_manifests(config: dict, base_seed: Optional[int], outputs: Sequence[Path], command: str) -> None:
    data = manifest(config, base_seed, outputs, command)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    for p in outputs:
        Path(str(p) + ".manifest.json").write_text(text)
