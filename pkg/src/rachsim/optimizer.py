"""Utility-maximizing choice of the RACH subframe count.

The authoritative optimizer is an exhaustive integer argmax over the
admissible subframe range (at most 9 evaluations). A Lambert-W closed form
for the interior stationary maximum is kept alongside it and cross-checked:
with x = load / (n_s * n_p), stationarity of the utility reads
x^2 * exp(-x) = alpha / n_p. As n_s grows from 0, utility first falls to a
local minimum (the x > 2 root), then rises to a local maximum (the x < 2
root), then falls again, so the maximum unwinds through the principal
branch: x = -2 * W0(-sqrt(alpha / n_p) / 2). No real root exists once
alpha exceeds n_p * 4 * exp(-2), the peak of the marginal collision term;
utility is then monotone decreasing in n_s and the boundary wins.

Because the interior stationary point need not beat the range boundaries,
any decision derived from the closed form compares the rounded neighbors
of the real-valued optimum against both boundary counts.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .lambertw import BelowBranchPointError, WBranch, lambert_w
from .model import RachConfig, utility_of_load

__all__ = [
    "DEFAULT_TABLE_MAX_LOAD",
    "SubframeDecision",
    "LookupTable",
    "optimal_subframes_integer",
    "optimal_subframes_closed_form",
    "closed_form_decision",
    "decide_subframes",
    "subframe_lookup_table",
    "stationary_alpha_limit",
]

# Beyond this load the controller stops trusting the table and pins the
# allocation at n_s_max (congestion-relief rule).
DEFAULT_TABLE_MAX_LOAD = 700.0


@dataclass(frozen=True)
class SubframeDecision:
    """A chosen subframe count and the utility it achieves."""

    n_s: int
    achieved_utility: float
    clamped: bool = False


@dataclass(frozen=True)
class LookupTable:
    """Offline load -> n_s table; thresholds mark where the argmax changes.

    entries are (load_threshold, n_s) pairs with strictly increasing
    thresholds; a query returns the n_s of the last threshold at or below
    the queried load.
    """

    alpha: float
    n_preambles: int
    entries: tuple[tuple[float, int], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("lookup table needs at least one entry")
        thresholds = [t for t, _ in self.entries]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError("load thresholds must be strictly increasing")

    def lookup(self, load: float) -> int:
        idx = bisect_right([t for t, _ in self.entries], load) - 1
        return self.entries[max(idx, 0)][1]


def stationary_alpha_limit(n_preambles: int) -> float:
    """Largest alpha for which an interior stationary maximum exists."""
    return n_preambles * 4.0 * math.exp(-2.0)


def optimal_subframes_integer(load: float, config: RachConfig) -> SubframeDecision:
    """Exhaustive argmax of utility over the admissible subframe counts.

    Ties break toward the smaller count, freeing subframes for data when
    utility is indifferent.
    """
    best_n = config.n_s_min
    best_u = -math.inf
    for n_s in config.subframe_range:
        u = utility_of_load(load, n_s, config)
        if u > best_u:
            best_n, best_u = n_s, u
    return SubframeDecision(n_s=best_n, achieved_utility=best_u)


def optimal_subframes_closed_form(load: float, config: RachConfig) -> float | None:
    """Real-valued subframe count at the interior utility maximum.

    Returns None when alpha > n_preambles * 4 * exp(-2): the W argument
    falls below -1/e and no interior stationary maximum exists, so callers
    must fall back to comparing the range boundaries.
    """
    if load <= 0:
        raise ValueError(f"load must be > 0, got {load}")
    if config.alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {config.alpha}")
    arg = -math.sqrt(config.alpha / config.n_preambles) / 2.0
    try:
        w = lambert_w(arg, WBranch.PRINCIPAL)
    except BelowBranchPointError:
        return None
    # x = -2w in (0, 2]; n_s = load / (x * n_p).
    return -load / (2.0 * config.n_preambles * w)


def closed_form_decision(load: float, config: RachConfig) -> SubframeDecision:
    """Integer decision derived from the closed form.

    Compares floor/ceil of the real optimum (clamped into range) against
    both boundary counts; agrees with optimal_subframes_integer wherever
    the closed form is defined. Exists for cross-validation, not as the
    controller path.
    """
    candidates = {config.n_s_min, config.n_s_max}
    real_opt = optimal_subframes_closed_form(load, config)
    if real_opt is not None:
        for n in (math.floor(real_opt), math.ceil(real_opt)):
            candidates.add(min(max(n, config.n_s_min), config.n_s_max))
    best_n = config.n_s_min
    best_u = -math.inf
    for n_s in sorted(candidates):
        u = utility_of_load(load, n_s, config)
        if u > best_u:
            best_n, best_u = n_s, u
    return SubframeDecision(n_s=best_n, achieved_utility=best_u)


def decide_subframes(
    load: float,
    config: RachConfig,
    table_max_load: float = DEFAULT_TABLE_MAX_LOAD,
) -> SubframeDecision:
    """Controller-facing decision: argmax in range, saturation beyond it.

    Loads past table_max_load pin the allocation at n_s_max (flagged via
    clamped=True) even though the raw argmax would eventually drift back
    to n_s_min as throughput collapses; the controller's job out there is
    congestion relief, not marginal utility.
    """
    if load < 0:
        raise ValueError(f"load must be >= 0, got {load}")
    if load > table_max_load:
        n_s = config.n_s_max
        return SubframeDecision(
            n_s=n_s,
            achieved_utility=utility_of_load(load, n_s, config),
            clamped=True,
        )
    return optimal_subframes_integer(load, config)


def subframe_lookup_table(
    config: RachConfig,
    load_grid_step: float = 1.0,
    max_load: float = DEFAULT_TABLE_MAX_LOAD,
) -> LookupTable:
    """Sweep loads on a grid and record every argmax change as a threshold."""
    if load_grid_step <= 0:
        raise ValueError(f"load_grid_step must be > 0, got {load_grid_step}")
    if max_load <= 0:
        raise ValueError(f"max_load must be > 0, got {max_load}")
    entries: list[tuple[float, int]] = []
    last_n: int | None = None
    steps = int(math.floor(max_load / load_grid_step + 1e-9))
    for i in range(steps + 1):
        load = i * load_grid_step
        n_s = optimal_subframes_integer(load, config).n_s
        if n_s != last_n:
            entries.append((load, n_s))
            last_n = n_s
    return LookupTable(
        alpha=config.alpha, n_preambles=config.n_preambles, entries=tuple(entries)
    )
