"""Comparator tests applied to the combined outcome.

Both tests see atoms as ordinary values, which is how they are usually run
on semi-continuous outcomes.  The Wilcoxon tie policy is fixed and explicit:

* ties receive midranks over the pooled sample;
* the normal approximation uses the tie-corrected variance
  ``n0 n1 / 12 * ((N + 1) - sum(t^3 - t) / (N (N - 1)))``;
* a continuity correction of 0.5 is subtracted from ``|W - E[W]|``;
* for ``N <= 20`` without ties the p-value comes from the exact null
  distribution of the rank sum instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputError
from .numerics import normal_sf, t_sf_two_sided

EXACT_MAX_N = 20


@dataclass(frozen=True)
class BaselineResult:
    statistic: float
    p_value: float
    method: str
    n0: int
    n1: int
    df: float = math.nan
    exact: bool = False
    p_normal: float = math.nan
    flags: tuple = ()


def t_test(x0, x1, variant: str = "welch") -> BaselineResult:
    """Two-sample t-test of equal means, statistic ``(mean0 - mean1) / se``."""
    a = np.asarray(x0, dtype=float)
    b = np.asarray(x1, dtype=float)
    n0, n1 = a.size, b.size
    if n0 < 2 or n1 < 2:
        raise InputError("t-test needs at least two values per group")
    v0, v1 = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))
    if v0 == 0.0 and v1 == 0.0:
        raise DegenerateError("both groups have zero variance")
    diff = float(a.mean() - b.mean())
    if variant == "pooled":
        df = n0 + n1 - 2.0
        sp2 = ((n0 - 1) * v0 + (n1 - 1) * v1) / df
        se = math.sqrt(sp2 * (1.0 / n0 + 1.0 / n1))
        method = "t_pooled"
    elif variant == "welch":
        s0, s1 = v0 / n0, v1 / n1
        se = math.sqrt(s0 + s1)
        df = (s0 + s1) ** 2 / (s0 ** 2 / (n0 - 1) + s1 ** 2 / (n1 - 1))
        method = "t_welch"
    else:
        raise ValueError(f"unknown t-test variant {variant!r}")
    t = diff / se
    return BaselineResult(t, min(1.0, t_sf_two_sided(t, df)), method, n0, n1, df)


def midranks(values) -> tuple[np.ndarray, np.ndarray]:
    """Midranks (1-based) and the sizes of all tie groups."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    sizes = np.diff(np.r_[starts, xs.size])
    avg = starts + (sizes + 1) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(avg, sizes)
    return ranks, sizes


def rank_sum_distribution(n0: int, n: int) -> np.ndarray:
    """Null counts of the rank sum of ``n0`` items drawn from ranks ``1..n``.

    ``counts[s]`` is the number of subsets with sum ``s``; the total is
    ``C(n, n0)``.
    """
    top = n * (n + 1) // 2
    table = np.zeros((n0 + 1, top + 1), dtype=np.int64)
    table[0, 0] = 1
    for r in range(1, n + 1):
        for k in range(min(r, n0), 0, -1):
            table[k, r:] += table[k - 1, :top + 1 - r]
    return table[n0]


def rank_sum_variance(n0: int, n1: int, ties=None) -> float:
    """Null variance of the rank sum, corrected for tie groups of the given sizes."""
    n = n0 + n1
    tie_term = 0.0
    if ties is not None and n > 1:
        t = np.asarray(ties, dtype=float)
        tie_term = float(np.sum(t ** 3 - t)) / (n * (n - 1))
    return n0 * n1 / 12.0 * ((n + 1) - tie_term)


def wilcoxon(x0, x1) -> BaselineResult:
    """Wilcoxon rank-sum test; the statistic is the rank sum of ``x0``."""
    a = np.asarray(x0, dtype=float)
    b = np.asarray(x1, dtype=float)
    n0, n1 = a.size, b.size
    if n0 < 1 or n1 < 1:
        raise InputError("Wilcoxon test needs at least one value per group")
    n = n0 + n1
    ranks, ties = midranks(np.r_[a, b])
    w = float(ranks[:n0].sum())
    mean = n0 * (n + 1) / 2.0
    if ties.size == 1:
        return BaselineResult(w, 1.0, "wilcoxon", n0, n1, flags=("degenerate",))
    var = rank_sum_variance(n0, n1, ties)
    z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
    p_normal = min(1.0, 2.0 * normal_sf(z))
    has_ties = bool(np.any(ties > 1))
    if n <= EXACT_MAX_N and not has_ties:
        counts = rank_sum_distribution(n0, n)
        s = int(round(w))
        total = float(counts.sum())
        lower = counts[:s + 1].sum() / total
        upper = counts[s:].sum() / total
        p = float(min(1.0, 2.0 * min(lower, upper)))
        return BaselineResult(w, p, "wilcoxon", n0, n1, exact=True, p_normal=p_normal)
    return BaselineResult(w, p_normal, "wilcoxon", n0, n1, p_normal=p_normal,
                          flags=("ties",) if has_ties else ())
