"""Compare the compiled kernel against the pure-Python trial loop.

    python benchmarks/bench_kernel.py [--trials 200]

Both backends run the same seeds; the script checks their results agree
before reporting timings.
"""

import argparse
import time

from polarsim import _backend
from polarsim.engine import trial_from_params
from polarsim.rng import trial_seed

CASES = [
    # (label, k, p_b, n, m, policy)
    ("K=6  p_B=.55 n=10 m=1 ignore", 6, 0.55, 10, 1.0, "ignore_linear"),
    ("K=10 p_B=.7  n=50 m=2 ignore", 10, 0.7, 50, 2.0, "ignore_linear"),
    ("K=20 p_B=.7  n=10 m=3 anti  ", 20, 0.7, 10, 3.0, "anti_linear"),
    ("K=10 p_B=.7  n=20 m=10 logistic", 10, 0.7, 20, 10.0, "logistic"),
]


def bench(run, cfgs):
    t0 = time.perf_counter()
    results = [run(c) for c in cfgs]
    return time.perf_counter() - t0, results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()
    if not _backend.NATIVE_AVAILABLE:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")

    print(f"{'case':34s} {'python s':>10s} {'native s':>10s} {'speedup':>8s}")
    for label, k, p_b, n, m, policy in CASES:
        cfgs = [trial_from_params(k, p_b, n, m, policy, seed=trial_seed(0, 0, t)) for t in range(args.trials)]
        t_py, r_py = bench(_backend.get("python"), cfgs)
        t_nat, r_nat = bench(_backend.get("native"), cfgs)
        if r_py != r_nat:
            raise SystemExit(f"backends disagree on {label}")
        print(f"{label:34s} {t_py:10.3f} {t_nat:10.4f} {t_py / t_nat:8.0f}x")


if __name__ == "__main__":
    main()
