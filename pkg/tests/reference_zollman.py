"""Strict-Bayes (full-trust) network bandit, written independently of the
package's update code.

Only the random stream is shared with the package (so trajectories can be
compared draw for draw); actions, binomial sampling, Bayes updates and the
consensus stopping rule are coded here from scratch.
"""

import bisect
import math

from polarsim.rng import Xoshiro256


def _pmf(k, n, p):
    j = min(k, n - k)
    coef = 1.0
    for i in range(1, j + 1):
        coef = coef * (n - j + i) / i
    return math.exp(math.log(coef) + k * math.log(p) + (n - k) * math.log1p(-p))


def _posterior(c, k, n, good, bad):
    if c <= 0.0 or c >= 1.0:
        return c
    lr = (n - 2 * k) * math.log(good / bad)
    r = math.inf if lr > 709.0 else math.exp(lr)
    if r == 1.0:
        return c
    return c / (c + (1.0 - c) * r)


def run(k_agents, p_b, n, seed, max_rounds=10**6, high=0.99, low=0.5):
    eps = p_b - 0.5
    good, bad = 0.5 + eps, 0.5 - eps
    cdf, acc = [], 0.0
    for s in range(n + 1):
        acc += _pmf(s, n, good)
        cdf.append(acc)

    rng = Xoshiro256(seed)
    cred = [rng.open_random() for _ in range(k_agents)]
    history = [list(cred)]
    rounds = 0
    while rounds < max_rounds:
        if all(c > high for c in cred) or all(c < low for c in cred):
            break
        succ = [
            min(bisect.bisect_right(cdf, rng.random()), n) if c >= 0.5 else None
            for c in cred
        ]
        new = []
        for i, c in enumerate(cred):
            seq = [i] + [j for j in range(k_agents) if j != i]
            for j in seq:
                if succ[j] is not None:
                    c = _posterior(c, succ[j], n, good, bad)
            new.append(c)
        cred = new
        rounds += 1
        history.append(list(cred))
    return rounds, history
