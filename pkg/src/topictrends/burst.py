"""Two-state burst detection over annual (count, total) series.

A topic's yearly counts r_t out of corpus totals d_t are modeled by a
two-state automaton: a base state emitting at the corpus-wide rate p0 and an
elevated state at p1 = min(s*p0, p1_cap). Entering the elevated state costs
gamma*ln(T); leaving is free. The minimum-cost state sequence marks burst
intervals, weighted by the cost saved over staying in the base state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import CountExceedsTotal, EmptySeries

if TYPE_CHECKING:
    from .series import CorpusYearTotals, TopicYearSeries


@dataclass(frozen=True)
class BurstParams:
    """Automaton tuning: rate ratio, transition penalty scale, elevated-rate cap."""

    s: float = 2.0
    gamma: float = 1.0
    p1_cap: float = 0.9999

    def __post_init__(self):
        if not self.s > 1.0:
            raise ValueError(f"s must exceed 1, got {self.s}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if not 0.0 < self.p1_cap < 1.0:
            raise ValueError(f"p1_cap must lie in (0, 1), got {self.p1_cap}")


@dataclass(frozen=True)
class BurstInterval:
    """An inclusive year range during which a topic ran in the elevated state."""

    topic: str
    start_year: int
    end_year: int
    weight: float

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValueError(f"start_year {self.start_year} > end_year {self.end_year}")


def _xlogy(x: float, y: float) -> float:
    """x*ln(y) with the 0*ln(0) = 0 convention."""
    if x == 0.0:
        return 0.0
    return x * math.log(y)


def state_cost(count: int, total: int, rate: float) -> float:
    """Negative log-likelihood of count successes in total trials at the given rate.

    The binomial coefficient is identical across states and omitted. Periods
    with total == 0 cost nothing in either state.
    """
    return -(_xlogy(count, rate) + _xlogy(total - count, 1.0 - rate))


def base_and_burst_rates(
    counts: Sequence[int], totals: Sequence[int], params: BurstParams
) -> tuple[float, float]:
    """Overall event rate p0 and the capped elevated rate p1."""
    p0 = sum(counts) / sum(totals)
    return p0, min(params.s * p0, params.p1_cap)


def _validate(counts: Sequence[int], totals: Sequence[int]) -> int:
    if len(counts) != len(totals):
        raise ValueError(f"length mismatch: {len(counts)} counts vs {len(totals)} totals")
    if len(counts) == 0:
        raise EmptySeries("series has no periods")
    for t, (r, d) in enumerate(zip(counts, totals)):
        if r < 0 or d < 0:
            raise ValueError(f"negative count at period {t}")
        if r > d:
            raise CountExceedsTotal(f"period {t}: count {r} exceeds total {d}")
    if sum(totals) == 0:
        raise EmptySeries("all period totals are zero")
    return len(counts)


def minimum_cost_states(
    counts: Sequence[int], totals: Sequence[int], params: BurstParams
) -> list[int]:
    """Minimum-cost 0/1 state sequence; ties resolve toward state 0.

    The automaton starts in state 0 before the first period; raising to the
    elevated state costs gamma*ln(T) while dropping is free. Among equal-cost
    sequences the lexicographically smallest (earliest positions favoring
    state 0) is returned, found by a backward cost sweep and a greedy forward
    reconstruction.
    """
    T = _validate(counts, totals)
    p0, p1 = base_and_burst_rates(counts, totals, params)
    up_cost = params.gamma * math.log(T)

    sigma0 = [state_cost(r, d, p0) for r, d in zip(counts, totals)]
    sigma1 = [state_cost(r, d, p1) for r, d in zip(counts, totals)]

    # suffix[t][j]: cost of periods t..T-1 given state j at t, transitions included
    suffix = [[0.0, 0.0] for _ in range(T + 1)]
    for t in range(T - 1, -1, -1):
        nxt = suffix[t + 1]
        suffix[t][0] = sigma0[t] + min(nxt[0], up_cost + nxt[1])
        suffix[t][1] = sigma1[t] + min(nxt[0], nxt[1])

    states: list[int] = []
    prev = 0
    for t in range(T):
        cost_if_base = suffix[t][0]  # dropping to state 0 is free
        cost_if_burst = (up_cost if prev == 0 else 0.0) + suffix[t][1]
        prev = 0 if cost_if_base <= cost_if_burst else 1
        states.append(prev)
    return states


def detect_bursts(
    counts: Sequence[int],
    totals: Sequence[int],
    params: BurstParams = BurstParams(),
    topic: str = "",
    first_year: int = 0,
) -> list[BurstInterval]:
    """Burst intervals for one topic series.

    Maximal elevated-state runs become intervals; their start and end are
    trimmed to periods with a nonzero total, since an empty period carries no
    evidence. Each interval's weight sums the per-period cost savings of the
    elevated state and is strictly positive for every emitted interval.
    Period indices map to years as first_year + index.
    """
    states = minimum_cost_states(counts, totals, params)
    p0, p1 = base_and_burst_rates(counts, totals, params)
    T = len(states)

    intervals: list[BurstInterval] = []
    t = 0
    while t < T:
        if states[t] != 1:
            t += 1
            continue
        run_end = t
        while run_end + 1 < T and states[run_end + 1] == 1:
            run_end += 1
        lo, hi = t, run_end
        while lo <= hi and totals[lo] == 0:
            lo += 1
        while hi >= lo and totals[hi] == 0:
            hi -= 1
        if lo <= hi:
            weight = sum(
                state_cost(counts[u], totals[u], p0) - state_cost(counts[u], totals[u], p1)
                for u in range(lo, hi + 1)
            )
            if weight > 0.0:
                intervals.append(
                    BurstInterval(
                        topic=topic,
                        start_year=first_year + lo,
                        end_year=first_year + hi,
                        weight=weight,
                    )
                )
        t = run_end + 1
    return intervals


def burst_table(
    series_list: Sequence["TopicYearSeries"],
    totals: "CorpusYearTotals",
    params: BurstParams = BurstParams(),
    top_n: int = 100,
) -> list[BurstInterval]:
    """Bursts across all topics, limited to the top_n heaviest topics.

    Topics are ranked by their summed interval weight; intervals of the kept
    topics are returned sorted by start year ascending, weight descending,
    then topic name.
    """
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    per_topic: list[tuple[str, list[BurstInterval]]] = []
    for s in series_list:
        found = detect_bursts(
            s.counts, totals.totals, params, topic=s.topic, first_year=totals.year_min
        )
        if found:
            per_topic.append((s.topic, found))
    per_topic.sort(key=lambda tf: (-sum(i.weight for i in tf[1]), tf[0]))
    kept = [interval for _, found in per_topic[:top_n] for interval in found]
    kept.sort(key=lambda i: (i.start_year, -i.weight, i.topic))
    return kept
