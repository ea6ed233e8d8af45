"""Independent reference computations the tests check the library against.

Everything here is deliberately implemented with different machinery than the
package: quadrature instead of erf, exhaustive enumeration instead of dynamic
programming, and direct pair recounts instead of the production loops.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from topictrends.burst import BurstParams


def normal_cdf_quadrature(z: float, subintervals: int = 2000) -> float:
    """Standard normal CDF by composite Simpson integration of the density."""
    if z == 0.0:
        return 0.5
    a, b = 0.0, abs(z)
    n = subintervals if subintervals % 2 == 0 else subintervals + 1
    xs = np.linspace(a, b, n + 1)
    ys = np.exp(-xs * xs / 2.0) / math.sqrt(2.0 * math.pi)
    h = (b - a) / n
    integral = (h / 3.0) * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())
    return 0.5 + integral if z > 0 else 0.5 - integral


def s_statistic_recount(series) -> int:
    """Concordant-minus-discordant pair count via a numpy sign matrix."""
    x = np.asarray(series, dtype=float)
    diffs = np.sign(x[None, :] - x[:, None])
    return int(np.triu(diffs, k=1).sum())


def pairwise_slope_median(series) -> float:
    """Median of all pairwise slopes, computed directly from sorted order."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    i, j = np.triu_indices(n, k=1)
    slopes = np.sort((x[j] - x[i]) / (j - i))
    m = len(slopes)
    if m % 2:
        return float(slopes[m // 2])
    return float((slopes[m // 2 - 1] + slopes[m // 2]) / 2.0)


def burst_costs(counts, totals, params: BurstParams):
    """Per-period state costs and the up-transition cost for the automaton."""
    p0 = sum(counts) / sum(totals)
    p1 = min(params.s * p0, params.p1_cap)

    def cost(r, d, p):
        out = 0.0
        if r > 0:
            out -= r * math.log(p)
        if d - r > 0:
            out -= (d - r) * math.log(1.0 - p)
        return out

    sigma0 = [cost(r, d, p0) for r, d in zip(counts, totals)]
    sigma1 = [cost(r, d, p1) for r, d in zip(counts, totals)]
    up_cost = params.gamma * math.log(len(counts))
    return sigma0, sigma1, up_cost


def exhaustive_min_cost_states(counts, totals, params: BurstParams) -> tuple[float, list[int]]:
    """Minimum-cost state sequence by enumerating all 2^T candidates.

    The automaton starts in state 0; raising costs gamma*ln(T), dropping is
    free. Equal-cost sequences resolve to the lexicographically smallest,
    which favors state 0 at the earliest differing period.
    """
    T = len(counts)
    sigma0, sigma1, up_cost = burst_costs(counts, totals, params)
    best_cost = None
    best_seq = None
    for seq in itertools.product((0, 1), repeat=T):
        total = 0.0
        prev = 0
        for t, state in enumerate(seq):
            if state == 1 and prev == 0:
                total += up_cost
            total += sigma1[t] if state else sigma0[t]
            prev = state
        if best_cost is None or total < best_cost or (total == best_cost and seq < best_seq):
            best_cost = total
            best_seq = seq
    return best_cost, list(best_seq)


def sequence_cost(seq, counts, totals, params: BurstParams) -> float:
    """Total automaton cost of one explicit state sequence."""
    sigma0, sigma1, up_cost = burst_costs(counts, totals, params)
    total = 0.0
    prev = 0
    for t, state in enumerate(seq):
        if state == 1 and prev == 0:
            total += up_cost
        total += sigma1[t] if state else sigma0[t]
        prev = state
    return total


def intervals_from_states(states, counts, totals, params: BurstParams):
    """Burst intervals (start, end, weight) read off a state sequence.

    Maximal elevated runs are trimmed to periods with nonzero totals at both
    ends; weight sums the base-vs-elevated cost difference over the interval.
    """
    sigma0, sigma1, _ = burst_costs(counts, totals, params)
    T = len(states)
    out = []
    t = 0
    while t < T:
        if states[t] != 1:
            t += 1
            continue
        end = t
        while end + 1 < T and states[end + 1] == 1:
            end += 1
        lo, hi = t, end
        while lo <= hi and totals[lo] == 0:
            lo += 1
        while hi >= lo and totals[hi] == 0:
            hi -= 1
        if lo <= hi:
            weight = sum(sigma0[u] - sigma1[u] for u in range(lo, hi + 1))
            if weight > 0.0:
                out.append((lo, hi, weight))
        t = end + 1
    return out
