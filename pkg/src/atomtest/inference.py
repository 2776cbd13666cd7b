"""Confidence intervals and regions by inverting the component LRTs.

Marginal intervals collect the parameter values whose one-degree-of-freedom
statistic stays below the chi-square(1) critical value; the simultaneous
region thresholds ``W1(m) + W2(b)`` at the chi-square(2) critical value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .empirical import el_profile_w1
from .errors import ContinuousPartUndefinedError, RegionError
from .model import TrialData, observed_mask, recompose_delta
from .numerics import Interval, ToleranceSpec, chisq_quantile, find_root, normal_quantile
from .parametric import (PARAMETRIC, SEMIPARAMETRIC, binary_part, continuous_part,
                         profile_w1, profile_w2)
from .regression import SEPARATION_BOUND, ols_mle

MAX_DOUBLINGS = 60
ENDPOINT_TOL = ToleranceSpec(abs_tol=1e-10, rel_tol=1e-10, max_iter=300)
_HULL_PAD = 1e-9


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    target: str
    estimate: float = math.nan
    flags: tuple = ()
    note: str = ""

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True, eq=False)
class ConfidenceRegion:
    m_grid: np.ndarray
    b_grid: np.ndarray
    w_values: np.ndarray
    threshold: float
    membership: np.ndarray
    level: float
    method: str
    estimate: tuple = (math.nan, math.nan)

    def rows(self):
        """Yield ``(m, b, W, member)`` in row-major grid order."""
        for i, m in enumerate(self.m_grid):
            for j, b in enumerate(self.b_grid):
                yield float(m), float(b), float(self.w_values[i, j]), bool(self.membership[i, j])


def _split(data: TrialData):
    obs = observed_mask(data)
    g = data.group
    return obs, data.y[obs & (g == 0)], data.y[obs & (g == 1)]


def _walk_out(f: Callable[[float], float], start: float, step: float, direction: int,
              limit: float | None = None):
    """Find an endpoint of ``{x : f(x) <= 0}`` going outward from ``start``.

    The step doubles until ``f`` turns positive or ``limit`` is reached.
    Returns ``(endpoint, exhausted)``; ``exhausted`` means ``f`` stayed
    non-positive all the way to ``limit`` (or for every doubling).
    """
    if limit is None:
        limit = direction * math.inf
    inner = start
    for k in range(MAX_DOUBLINGS + 1):
        x = start + direction * step * (2.0 ** k)
        if direction * (x - limit) >= 0:
            x = limit
        fx = f(x)
        if fx > 0:
            lo, hi = (inner, x) if inner < x else (x, inner)
            if lo == hi:
                return x, False
            return find_root(f, Interval(lo, hi), ENDPOINT_TOL), False
        if x == limit:
            return x, True
        inner = x
    return inner, True


def w1_function(data: TrialData, method: str, use_covariates: bool = True):
    """Return ``(W1, mu_delta_hat, se, (lo, hi))`` for the continuous part.

    ``(lo, hi)`` is the open range of mean differences where the statistic is
    finite: the whole line for the Gaussian model, the data hull for EL.
    """
    obs, y0, y1 = _split(data)
    if min(y0.size, y1.size) < 2:
        raise ContinuousPartUndefinedError(
            f"continuous component needs at least 2 observed outcomes per group, got {(y0.size, y1.size)}")
    se = math.sqrt(np.var(y0, ddof=1) / y0.size + np.var(y1, ddof=1) / y1.size)
    if not se > 0:
        se = 1.0
    if method == PARAMETRIC:
        _, est, fit = continuous_part(data, obs, use_covariates)
        full_ll = fit.loglik

        def w1(m):
            return profile_w1(data, m, obs, use_covariates, full_ll)

        return w1, est, se, (-math.inf, math.inf)
    if method == SEMIPARAMETRIC:
        est = float(y1.mean() - y0.mean())

        def w1(m):
            return el_profile_w1(y0, y1, m)[0]

        lo, hi = float(y1.min() - y0.max()), float(y1.max() - y0.min())
        return w1, est, se, (lo, hi)
    raise ValueError(f"unknown method {method!r}")


def _interval_from(w, est, se, bounds, level, target):
    q = chisq_quantile(level, 1)
    lo_b, hi_b = bounds
    flags = []
    pad = _HULL_PAD * max(1.0, hi_b - lo_b) if math.isfinite(hi_b - lo_b) else 0.0

    def f(x):
        v = w(x)
        return v - q

    upper, ex_u = _walk_out(f, est, se, +1, hi_b - pad if math.isfinite(hi_b) else None)
    lower, ex_l = _walk_out(f, est, se, -1, lo_b + pad if math.isfinite(lo_b) else None)
    if ex_u:
        upper = math.inf
        flags.append("upper_open")
    if ex_l:
        lower = -math.inf
        flags.append("lower_open")
    return ConfidenceInterval(lower, upper, level, target, est, tuple(flags))


def ci_mu_delta(data: TrialData, alpha: float = 0.05, method: str = SEMIPARAMETRIC,
                use_covariates: bool = True) -> ConfidenceInterval:
    """Interval for the mean difference among observed outcomes."""
    w, est, se, bounds = w1_function(data, method, use_covariates)
    return _interval_from(w, est, se, bounds, 1.0 - alpha, "mu_delta")


def w2_function(data: TrialData, use_covariates: bool = False):
    """Return ``(W2, beta_delta_hat, se, flags)`` for the binary part."""
    obs = observed_mask(data)
    part = binary_part(data, obs, use_covariates)
    g = data.group
    counts = []
    for lab in (0, 1):
        n = int(np.sum(g == lab))
        k = int(np.sum(obs[g == lab]))
        counts.extend([k, n - k])
    se = math.sqrt(sum(1.0 / c for c in counts)) if min(counts) > 0 else 1.0

    def w2(b):
        return profile_w2(data, b, obs, use_covariates)

    return w2, part.beta_delta_hat, se, part.flags


def ci_beta_delta(data: TrialData, alpha: float = 0.05,
                  use_covariates: bool = False) -> tuple[ConfidenceInterval, ConfidenceInterval]:
    """Intervals for the log odds-ratio of being observed and for the odds ratio."""
    level = 1.0 - alpha
    w2, est, se, flags = w2_function(data, use_covariates)
    q = chisq_quantile(level, 1)
    flags = list(flags)
    if math.isnan(est):
        beta = ConfidenceInterval(-math.inf, math.inf, level, "beta_delta", est,
                                  tuple(flags + ["degenerate"]),
                                  "no group has both observed and unobserved records")
    else:
        def f(b):
            return w2(b) - q

        if math.isinf(est):
            start = math.copysign(SEPARATION_BOUND, est)
            direction = -1 if est > 0 else 1
            end, exhausted = _walk_out(f, start, se, direction)
            end = math.copysign(math.inf, -est) if exhausted else end
            lo, hi = (end, math.inf) if est > 0 else (-math.inf, end)
            flags.append("upper_open" if est > 0 else "lower_open")
        else:
            hi, ex_u = _walk_out(f, est, se, +1)
            lo, ex_l = _walk_out(f, est, se, -1)
            if ex_u:
                hi = math.inf
                flags.append("upper_open")
            if ex_l:
                lo = -math.inf
                flags.append("lower_open")
        beta = ConfidenceInterval(lo, hi, level, "beta_delta", est, tuple(flags))
    odds = ConfidenceInterval(_exp(beta.lower), _exp(beta.upper), level, "odds_ratio",
                              _exp(beta.estimate), beta.flags, beta.note)
    return beta, odds


def _exp(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if x > 709.0:
        return math.inf
    return math.exp(x)


def joint_statistic(data: TrialData, m: float, b: float, method: str = SEMIPARAMETRIC,
                    use_covariates: bool = False) -> float:
    """``W1(m) + W2(b)`` for one candidate pair of treatment contrasts."""
    w1 = w1_function(data, method, use_covariates)[0]
    w2 = w2_function(data, use_covariates)[0]
    return w1(m) + w2(b)


def simultaneous_region(data: TrialData, alpha: float = 0.05, resolution: int = 50,
                        method: str = SEMIPARAMETRIC,
                        use_covariates: bool = False) -> ConfidenceRegion:
    """Grid evaluation of the joint confidence region for (mu_delta, beta_delta).

    The grid spans very wide marginal intervals (level ``1 - min(alpha/10,
    0.001)``) padded by 20% on each side, so the region boundary at level
    ``1 - alpha`` is covered whatever the data scale.
    """
    if resolution < 10:
        raise RegionError("resolution must be at least 10")
    wide = min(alpha / 10.0, 0.001)
    mi = ci_mu_delta(data, wide, method, use_covariates)
    bi, _ = ci_beta_delta(data, wide, use_covariates)
    for ci, name in ((mi, "mean difference"), (bi, "log odds-ratio")):
        if not (math.isfinite(ci.lower) and math.isfinite(ci.upper)):
            raise RegionError(
                f"the {name} interval is unbounded ({ci.lower}, {ci.upper}); "
                "a finite grid cannot cover the region")
    m_grid = _padded_grid(mi, resolution)
    b_grid = _padded_grid(bi, resolution)
    w1 = w1_function(data, method, use_covariates)[0]
    w2 = w2_function(data, use_covariates)[0]
    w1_vals = np.array([w1(m) for m in m_grid])
    w2_vals = np.array([w2(b) for b in b_grid])
    w = w1_vals[:, None] + w2_vals[None, :]
    threshold = chisq_quantile(1.0 - alpha, 2)
    return ConfidenceRegion(m_grid, b_grid, w, threshold, w <= threshold, 1.0 - alpha,
                            method, (mi.estimate, bi.estimate))


def _padded_grid(ci: ConfidenceInterval, resolution: int) -> np.ndarray:
    pad = 0.2 * (ci.upper - ci.lower)
    return np.linspace(ci.lower - pad, ci.upper + pad, resolution)


def ci_delta_combined(data: TrialData, alpha: float = 0.05) -> ConfidenceInterval:
    """Wald interval for the combined-outcome mean difference (delta method).

    The continuous block (mu0, mu_delta) and the observation probabilities
    are treated as independent, which the likelihood factorization justifies.
    """
    obs, y0, y1 = _split(data)
    if min(y0.size, y1.size) < 2:
        raise ContinuousPartUndefinedError(
            f"continuous component needs at least 2 observed outcomes per group, got {(y0.size, y1.size)}")
    g = data.group
    n0, n1 = int(np.sum(g == 0)), int(np.sum(g == 1))
    p0, p1 = y0.size / n0, y1.size / n1
    X = np.column_stack([np.ones(y0.size + y1.size),
                         np.r_[np.zeros(y0.size), np.ones(y1.size)]])
    fit = ols_mle(X, np.r_[y0, y1], names=["intercept", "treatment"])
    mu0, mu_delta = float(fit.coef[0]), float(fit.coef[1])
    cov_mu = fit.sigma2_hat * np.linalg.inv(X.T @ X)
    e = data.atom
    delta = recompose_delta(mu_delta, p0, p1, mu0, e)
    grad_mu = np.array([p1 - p0, p1])
    var = float(grad_mu @ cov_mu @ grad_mu)
    var += (mu0 + mu_delta - e) ** 2 * p1 * (1.0 - p1) / n1
    var += (mu0 - e) ** 2 * p0 * (1.0 - p0) / n0
    flags, note = (), ""
    if p0 in (0.0, 1.0) or p1 in (0.0, 1.0):
        flags = ("degenerate_variance",)
        note = ("an observation proportion is 0 or 1, so its binomial variance "
                "estimate is zero; consider a bootstrap interval instead")
    z = normal_quantile(1.0 - alpha / 2.0)
    half = z * math.sqrt(var)
    return ConfidenceInterval(delta - half, delta + half, 1.0 - alpha, "delta_combined",
                              delta, flags, note)
