"""Command-line entry point: ``polarsim run | sweep | figure``.

Exit codes: 0 success, 2 configuration error, 3 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import _backend
from .config import parse_config
from .credal import DomainError, TrustKind
from .engine import DEFAULT_MAX_ROUNDS, EvidenceOrder, TrialConfig, trial_from_params
from .figures import FIGURES, generate
from .output import (
    AGG_HEADER,
    TRACE_HEADER,
    TRIALS_HEADER,
    agg_rows,
    atomic_outputs,
    csv_line,
    fmt_real,
    trial_rows,
    write_lines,
    write_manifests,
)
from .sweep import ConfigError, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("polarsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polarsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a single trial")
    run.add_argument("--k", type=int, default=10)
    run.add_argument("--p_b", "--p-b", dest="p_b", type=float, default=0.7)
    run.add_argument("--n", type=int, default=20)
    run.add_argument("--m", type=float, default=2.0)
    run.add_argument("--policy", default="ignore_linear",
                     help="none, ignore_linear, anti_linear, logistic, exponential, bounded_logistic")
    run.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    run.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    run.add_argument("--evidence-order", default="fixed", choices=["fixed", "shuffled"])
    run.add_argument("--init", type=_floats, default=None,
                     help="comma-separated initial credences (overrides the random draw)")
    run.add_argument("--trace", type=Path, default=None, help="per-round CSV trace path")
    run.add_argument("--backend", choices=["native", "python"], default=None)

    sw = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    sw.add_argument("--config", type=Path, required=True)
    sw.add_argument("--out", type=Path, required=True, help="per-trial CSV")
    sw.add_argument("--agg", type=Path, required=True, help="per-cell aggregate CSV")
    sw.add_argument("--jobs", type=int, default=1)

    fig = sub.add_parser("figure", help="emit plot data for one figure")
    fig.add_argument("which", help=", ".join(FIGURES))
    fig.add_argument("--trials", type=int, default=1000)
    fig.add_argument("--base-seed", type=lambda s: int(s, 0), default=0)
    fig.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    fig.add_argument("--jobs", type=int, default=1)
    fig.add_argument("--out", type=Path, default=None, help="output CSV (default <which>.csv)")
    return parser


def cmd_run(args) -> int:
    cfg = trial_from_params(
        args.k, args.p_b, args.n, args.m, TrustKind.parse(args.policy), seed=args.seed,
        max_rounds=args.max_rounds, evidence_order=EvidenceOrder.parse(args.evidence_order),
        initial_credences=args.init,
    )
    runner = _backend.get(args.backend)

    if args.trace is None:
        result = runner(cfg)
    else:
        with atomic_outputs([args.trace]) as (tmp,):
            with open(tmp, "w", newline="") as fh:
                fh.write(csv_line(TRACE_HEADER))

                def on_round(rnd, credences, actions, reports):
                    for i, (c, a, r) in enumerate(zip(credences, actions, reports)):
                        fh.write(csv_line((rnd, i, fmt_real(c), a, r.successes)))

                result = runner(cfg, on_round)
                for i, c in enumerate(result.final_credences):
                    fh.write(csv_line((result.rounds, i, fmt_real(c), "", "")))
        write_manifests(_trial_config_dict(cfg, runner), cfg.seed, [args.trace], "run")
    print(f"{result.outcome.name},{result.rounds},{fmt_real(result.false_fraction)}")
    return EXIT_OK


def _trial_config_dict(cfg: TrialConfig, runner) -> dict:
    b, p, th = cfg.bandit, cfg.policy, cfg.thresholds
    return {
        "k": b.k_agents, "p_b": b.p_b, "n": b.n_pulls, "m": p.m, "policy": p.kind.name.lower(),
        "seed": cfg.seed, "max_rounds": cfg.max_rounds, "high_threshold": th.high,
        "low_threshold": th.low, "anti_low_threshold": th.anti_low,
        "evidence_order": cfg.evidence_order.name.lower(),
        "initial_credences": list(cfg.initial_credences) if cfg.initial_credences else None,
        "backend": "native" if runner is _backend.run_trial_native else "python",
    }


def cmd_sweep(args) -> int:
    try:
        text = args.config.read_text()
    except OSError as e:
        raise ConfigError("--config", str(args.config), f"a readable file ({e.strerror})") from e
    spec = parse_config(text)
    if args.jobs < 1:
        raise ConfigError("--jobs", args.jobs, "an integer >= 1")
    result = run_sweep(spec, jobs=args.jobs)
    with atomic_outputs([args.out, args.agg]) as (tmp_out, tmp_agg):
        write_lines(tmp_out, TRIALS_HEADER, trial_rows(result.records, result.cells))
        write_lines(tmp_agg, AGG_HEADER, agg_rows(result.stats))
    write_manifests(spec.resolved(), spec.base_seed, [args.out, args.agg], "sweep")
    return EXIT_OK


def cmd_figure(args) -> int:
    if args.which not in FIGURES:
        raise ConfigError("figure", args.which, "one of " + ", ".join(FIGURES))
    if args.trials < 1:
        raise ConfigError("--trials", args.trials, "an integer >= 1")
    out = args.out or Path(f"{args.which}.csv")
    header, rows, config = generate(args.which, trials=args.trials, base_seed=args.base_seed,
                                    max_rounds=args.max_rounds, jobs=max(1, args.jobs))
    with atomic_outputs([out]) as (tmp,):
        write_lines(tmp, header, (csv_line(r) for r in rows))
    config = {**config, "figure": args.which}
    write_manifests(config, None if args.which == "fig1" else args.base_seed, [out], "figure")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "figure": cmd_figure}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
