# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial loop.

Mirrors ``engine.run_trial_python`` exactly: same generator, same draw order,
same floating-point operation order (built with -ffp-contract=off so no FMA
contraction changes the rounding). Likelihood tables are computed in Python
and passed in.
"""

import numpy as np

from libc.math cimport exp, fabs, INFINITY
from libc.stdint cimport uint64_t

from .credal import EvidenceReport

cdef int NONE = 0
cdef int IGNORE_LINEAR = 1
cdef int ANTI_LINEAR = 2
cdef int LOGISTIC = 3
cdef int EXPONENTIAL = 4
cdef int BOUNDED_LOGISTIC = 5

cdef int ONGOING = 0
cdef int TRUE_CONSENSUS = 1
cdef int FALSE_CONSENSUS = 2
cdef int POLARIZED = 3
cdef int UNDECIDED = 4

cdef long long STAGNATION_WINDOW = 1000
cdef double STAGNATION_TOL = 1e-9
cdef double EXP_MAX = 709.0
cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef struct Xoshiro:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef void seed_rng(Xoshiro* g, uint64_t seed) noexcept nogil:
    cdef uint64_t x = seed
    x += GAMMA
    g.s0 = mix64(x)
    x += GAMMA
    g.s1 = mix64(x)
    x += GAMMA
    g.s2 = mix64(x)
    x += GAMMA
    g.s3 = mix64(x)


cdef inline uint64_t next_u64(Xoshiro* g) noexcept nogil:
    cdef uint64_t result = rotl(g.s1 * 5, 7) * 9
    cdef uint64_t t = g.s1 << 17
    g.s2 ^= g.s0
    g.s3 ^= g.s1
    g.s1 ^= g.s2
    g.s0 ^= g.s3
    g.s2 ^= t
    g.s3 = rotl(g.s3, 45)
    return result


cdef inline double next_double(Xoshiro* g) noexcept nogil:
    return <double>(next_u64(g) >> 11) * TWO_M53


cdef inline double next_open_double(Xoshiro* g) noexcept nogil:
    return (<double>(next_u64(g) >> 11) + 0.5) * TWO_M53


cdef inline double safe_exp(double x) noexcept nogil:
    if x > EXP_MAX:
        return INFINITY
    return exp(x)


cdef inline double weight(int kind, double m, double d, double pe) noexcept nogil:
    cdef double w, dm
    if kind == NONE:
        return 1.0
    if kind == IGNORE_LINEAR:
        dm = d * m
        if dm >= 1.0:
            w = pe
        else:
            w = 1.0 - dm * (1.0 - pe)
    elif kind == ANTI_LINEAR:
        dm = d * m
        if dm == 1.0:
            w = pe
        else:
            w = 1.0 - dm * (1.0 - pe)
    elif kind == LOGISTIC:
        w = 1.0 / (1.0 + safe_exp(m * (d - 0.5)))
    elif kind == EXPONENTIAL:
        w = exp(-m * d)
    else:
        w = (1.0 - pe) / (1.0 + safe_exp(m * (d - 0.5))) + pe
    if w < 0.0:
        return 0.0
    if w > 1.0:
        return 1.0
    return w


cdef inline double bayes(double prior, double ratio) noexcept nogil:
    if prior <= 0.0:
        return 0.0
    if prior >= 1.0:
        return 1.0
    if ratio == 1.0:
        return prior
    return prior / (prior + (1.0 - prior) * ratio)


cdef inline double jeffrey(double prior, double w, double lg, double lb, double ratio) noexcept nogil:
    cdef double post = bayes(prior, ratio)
    cdef double pe, post_not, out
    if w == 1.0:
        return post
    pe = prior * lg + (1.0 - prior) * lb
    if pe >= 1.0 - 1e-12:
        return post
    post_not = (prior - prior * lg) / (1.0 - pe)
    out = prior + (w - pe) * (post - post_not)
    if out < 0.0:
        return 0.0
    if out > 1.0:
        return 1.0
    return out


cdef inline int sample_successes(const double* cdf, int n, double u) noexcept nogil:
    # bisect_right over cdf[0..n], clamped to n
    cdef int lo = 0, hi = n + 1, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if u < cdf[mid]:
            hi = mid
        else:
            lo = mid + 1
    if lo > n:
        return n
    return lo


cdef int classify(const double* c, int k, int kind, double m, double high, double low,
                  double anti_low, long long stagnant) noexcept nogil:
    cdef int i, j, n_high = 0, n_low = 0
    cdef bint all_high = True, all_low = True
    for i in range(k):
        if not c[i] > high:
            all_high = False
        if not c[i] < low:
            all_low = False
    if all_high:
        return TRUE_CONSENSUS
    if all_low:
        return FALSE_CONSENSUS
    if kind == NONE:
        return ONGOING
    if kind == IGNORE_LINEAR or kind == ANTI_LINEAR:
        if m <= 1.0:
            return ONGOING
        for i in range(k):
            if c[i] > high:
                n_high += 1
        if n_high == 0:
            return ONGOING
        for i in range(k):
            if c[i] > high:
                continue
            if kind == IGNORE_LINEAR:
                if not c[i] <= low:
                    return ONGOING
            elif not c[i] < anti_low:
                return ONGOING
            for j in range(k):
                if c[j] > high and not m * fabs(c[i] - c[j]) >= 1.0:
                    return ONGOING
            n_low += 1
        if n_low > 0:
            return POLARIZED
        return ONGOING
    if stagnant >= STAGNATION_WINDOW:
        for i in range(k):
            if c[i] > high:
                n_high += 1
            elif c[i] < low:
                n_low += 1
        if n_high > 0 and n_low > 0 and n_high + n_low == k:
            return POLARIZED
    return ONGOING


def run_kernel(int k, int n, double[::1] l_good, double[::1] l_bad, double[::1] ratio,
               double[::1] cdf, int kind, double m, uint64_t seed, long long max_rounds,
               double high, double low, double anti_low, bint shuffled, init=None,
               on_round=None):
    """Run one trial; returns ``(outcome_code, rounds, final_credences)``."""
    cdef Xoshiro g
    cdef double[::1] c = np.empty(k, dtype=np.float64)
    cdef double[::1] start = np.empty(k, dtype=np.float64)
    cdef double[::1] ref = np.empty(k, dtype=np.float64)
    cdef int[::1] succ = np.empty(k, dtype=np.intc)
    cdef int[::1] order = np.empty(k, dtype=np.intc)
    cdef double[::1] init_mv
    cdef int i, j, t, kk, tmp
    cdef long long rnd = 0, since = 0, stagnant = 0
    cdef double ci, cur, pe, w, d
    cdef bint nonlinear = kind == LOGISTIC or kind == EXPONENTIAL or kind == BOUNDED_LOGISTIC
    cdef bint moved
    cdef int outcome

    seed_rng(&g, seed)
    if init is not None:
        init_mv = np.ascontiguousarray(init, dtype=np.float64)
        for i in range(k):
            c[i] = init_mv[i]
    else:
        for i in range(k):
            c[i] = next_open_double(&g)
    for i in range(k):
        ref[i] = c[i]

    outcome = classify(&c[0], k, kind, m, high, low, anti_low, 0)
    while outcome == ONGOING and rnd < max_rounds:
        for i in range(k):
            start[i] = c[i]
            if c[i] < 0.5:
                succ[i] = -1
            else:
                succ[i] = sample_successes(&cdf[0], n, next_double(&g))
        for i in range(k):
            order[i] = i
        if shuffled:
            for i in range(k - 1, 0, -1):
                j = <int>(next_double(&g) * <double>(i + 1))
                tmp = order[i]
                order[i] = order[j]
                order[j] = tmp
        if on_round is not None:
            on_round(
                rnd,
                [start[i] for i in range(k)],
                ["A" if succ[i] < 0 else "B" for i in range(k)],
                [EvidenceReport(i, 0 if succ[i] < 0 else n, 0 if succ[i] < 0 else succ[i])
                 for i in range(k)],
            )

        with nogil:
            for i in range(k):
                ci = start[i]
                cur = ci
                if succ[i] >= 0:
                    kk = succ[i]
                    pe = cur * l_good[kk] + (1.0 - cur) * l_bad[kk]
                    w = weight(kind, m, 0.0, pe)
                    cur = jeffrey(cur, w, l_good[kk], l_bad[kk], ratio[kk])
                for t in range(k):
                    j = order[t]
                    if j == i or succ[j] < 0:
                        continue
                    kk = succ[j]
                    d = fabs(ci - start[j])
                    pe = cur * l_good[kk] + (1.0 - cur) * l_bad[kk]
                    w = weight(kind, m, d, pe)
                    cur = jeffrey(cur, w, l_good[kk], l_bad[kk], ratio[kk])
                c[i] = cur
            rnd += 1

            if nonlinear:
                moved = False
                for i in range(k):
                    if fabs(c[i] - ref[i]) >= STAGNATION_TOL:
                        moved = True
                        break
                if moved:
                    for i in range(k):
                        ref[i] = c[i]
                    since = rnd
                stagnant = rnd - since
            outcome = classify(&c[0], k, kind, m, high, low, anti_low, stagnant)

    if outcome == ONGOING:
        outcome = UNDECIDED
    return outcome, rnd, [c[i] for i in range(k)]
