"""Plot-ready data for each figure.

Every generator returns ``(header, rows, config)``; ``config`` is the resolved
grid, recorded in the manifest. Parameters not fixed by a figure use the
coarse grids below.
"""

from __future__ import annotations

from typing import Callable, Optional

from .credal import TrustKind, TrustPolicy, trust_weight
from .output import fmt_freq, fmt_real
from .sweep import SweepSpec, compare_policies, run_sweep

M_GRID = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)

FIGURE_GRIDS = {
    "fig1": {"m": 2.0, "p_i_e": 0.75, "d_step": 0.01},
    "fig2": {"k": (2, 6, 10, 20), "p_b": (0.7,), "n": (50,), "m": M_GRID, "policy": ("ignore_linear",)},
    "fig3": {"k": (10,), "p_b": (0.55, 0.6, 0.65, 0.7, 0.75, 0.8), "n": (20,), "m": M_GRID,
             "policy": ("ignore_linear",)},
    "fig4": {"k": (6,), "p_b": (0.55,), "n": (1, 5, 10, 20, 50, 100), "m": (0.0, 1.0),
             "policy": ("ignore_linear",)},
    "fig5": {"k": (2, 6, 10, 20), "p_b": (0.55, 0.7, 0.8), "n": (1, 10, 50, 100), "m": M_GRID,
             "policy": ("ignore_linear",)},
    "fig6": {"k": (20,), "p_b": (0.7,), "n": (10,), "m": (0.0, 1.0, 2.0, 3.0),
             "policy": ("anti_linear", "ignore_linear")},
}
FIGURES = tuple(FIGURE_GRIDS)


def fig1(**_):
    g = FIGURE_GRIDS["fig1"]
    anti = TrustPolicy(TrustKind.ANTI_LINEAR, g["m"])
    ignore = TrustPolicy(TrustKind.IGNORE_LINEAR, g["m"])
    rows = []
    for i in range(101):
        d = i / 100
        rows.append((fmt_real(d), fmt_real(trust_weight(anti, d, g["p_i_e"])),
                     fmt_real(trust_weight(ignore, d, g["p_i_e"]))))
    return ("d", "anti_linear", "ignore_linear"), rows, dict(g)


def _spec(name: str, trials: int, base_seed: int, max_rounds: int) -> SweepSpec:
    g = FIGURE_GRIDS[name]
    return SweepSpec(
        k_values=g["k"], p_b_values=g["p_b"], n_values=g["n"], m_values=g["m"],
        policies=tuple(TrustKind.parse(p) for p in g["policy"]), trials_per_cell=trials,
        base_seed=base_seed, max_rounds=max_rounds,
    )


def fig2(trials, base_seed, max_rounds, jobs):
    spec = _spec("fig2", trials, base_seed, max_rounds)
    res = run_sweep(spec, jobs)
    rows = [(s.cell.k, fmt_real(s.cell.m), s.trials, fmt_freq(s.freq_polarized), fmt_freq(s.se_polarized))
            for s in res.stats]
    return ("k", "m", "trials", "freq_polarized", "se_polarized"), rows, spec.resolved()


def fig3(trials, base_seed, max_rounds, jobs):
    spec = _spec("fig3", trials, base_seed, max_rounds)
    res = run_sweep(spec, jobs)
    rows = [(fmt_real(s.cell.m), fmt_real(s.cell.p_b), s.trials, fmt_freq(s.freq_polarized))
            for s in res.stats]
    return ("m", "p_b", "trials", "freq_polarized"), rows, spec.resolved()


def fig4(trials, base_seed, max_rounds, jobs):
    spec = _spec("fig4", trials, base_seed, max_rounds)
    res = run_sweep(spec, jobs)
    by_n: dict[int, dict[float, object]] = {}
    for s in res.stats:
        by_n.setdefault(s.cell.n, {})[s.cell.m] = s
    rows = []
    for n, cells in by_n.items():
        s0, s1 = cells[0.0], cells[1.0]
        r0, r1 = s0.mean_rounds_to_consensus, s1.mean_rounds_to_consensus
        ratio = r1 / r0 if r0 and r1 is not None else None
        rows.append((n, s0.n_consensus, fmt_freq(r0), s1.n_consensus, fmt_freq(r1), fmt_freq(ratio)))
    header = ("n", "consensus_trials_m0", "mean_rounds_m0", "consensus_trials_m1", "mean_rounds_m1",
              "ratio_m1_over_m0")
    return header, rows, spec.resolved()


def fig5(trials, base_seed, max_rounds, jobs):
    spec = _spec("fig5", trials, base_seed, max_rounds)
    res = run_sweep(spec, jobs)
    rows = [(s.cell.k, fmt_real(s.cell.p_b), s.cell.n, fmt_real(s.cell.m), s.trials,
             fmt_freq(s.mean_false_fraction), fmt_freq(s.se_false_fraction)) for s in res.stats]
    return ("k", "p_b", "n", "m", "trials", "mean_false_fraction", "se_false_fraction"), rows, spec.resolved()


def fig6(trials, base_seed, max_rounds, jobs):
    spec = _spec("fig6", trials, base_seed, max_rounds)
    pairs = compare_policies(spec, TrustKind.ANTI_LINEAR, TrustKind.IGNORE_LINEAR, jobs=jobs)
    rows = []
    for p in pairs:
        for s in (p.stats_a, p.stats_b):
            rows.append((s.cell.policy.name.lower(), fmt_real(s.cell.m), s.trials,
                         fmt_freq(1.0 - s.mean_false_fraction), fmt_freq(s.mean_false_fraction),
                         fmt_freq(s.se_false_fraction)))
    header = ("policy", "m", "trials", "mean_true_fraction", "mean_false_fraction", "se_false_fraction")
    return header, rows, spec.resolved()


GENERATORS: dict[str, Callable] = {
    "fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6,
}


def generate(name: str, trials: int = 1000, base_seed: int = 0, max_rounds: int = 10**6,
             jobs: int = 1, **_: Optional[int]):
    if name not in GENERATORS:
        raise KeyError(name)
    return GENERATORS[name](trials=trials, base_seed=base_seed, max_rounds=max_rounds, jobs=jobs)
