"""Empirical likelihood for the continuous part, and the semi-parametric LRT.

For a sample ``y`` and hypothesised mean ``mu`` the maximizing multinomial
weights are ``p_i = 1 / (n (1 + lam (y_i - mu)))`` where ``lam`` solves

    sum_i (y_i - mu) / (1 + lam (y_i - mu)) = 0

and ``-2 log R(mu) = 2 sum_i log(1 + lam (y_i - mu))``.  The two-sample
statistic for a mean difference profiles out the group-0 mean by minimizing
the sum of the two one-sample statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContinuousPartUndefinedError, HullError
from .model import EffectEstimates, TrialData, observed_mask, recompose_delta
from .numerics import Interval, ToleranceSpec, chisq_sf, find_root, minimize_scalar
from .parametric import SEMIPARAMETRIC, TestResult, binary_part

HULL_MARGIN = 1e-10
LAMBDA_TOL = ToleranceSpec(abs_tol=1e-14, rel_tol=1e-12, max_iter=300)
PROFILE_TOL = ToleranceSpec(abs_tol=1e-9, rel_tol=1e-9, max_iter=500)


@dataclass(frozen=True)
class ELState:
    lambda0: float
    lambda1: float
    mu_profile: float
    W1E: float


def _lambda_bounds(d: np.ndarray) -> tuple[float, float]:
    dmin, dmax = float(d.min()), float(d.max())
    if not (dmin < 0.0 < dmax):
        raise HullError("hypothesised mean is not inside the open convex hull of the sample")
    lo, hi = -1.0 / dmax, -1.0 / dmin
    pad = HULL_MARGIN * (hi - lo)
    return lo + pad, hi - pad


def _solve_lambda(d: np.ndarray, lo: float, hi: float) -> float:
    """Root of the strictly decreasing estimating function on ``(lo, hi)``."""
    def g(lam):
        return float(np.sum(d / (1.0 + lam * d)))

    return find_root(g, Interval(lo, hi), LAMBDA_TOL)


def el_lambda(values, mu: float) -> float:
    """Lagrange multiplier of the one-sample mean constraint at ``mu``."""
    y = np.asarray(values, dtype=float)
    if y.size < 2:
        raise HullError("empirical likelihood needs at least two values")
    d = y - mu
    lo, hi = _lambda_bounds(d)
    return _solve_lambda(d, lo, hi)


def el_weights(values, mu: float) -> np.ndarray:
    y = np.asarray(values, dtype=float)
    lam = el_lambda(y, mu)
    return 1.0 / (y.size * (1.0 + lam * (y - mu)))


def el_m2logr_one(values, mu: float) -> float:
    """-2 log empirical likelihood ratio for the mean; +inf outside the hull."""
    y = np.asarray(values, dtype=float)
    d = y - mu
    try:
        if y.size < 2:
            raise HullError("need two values")
        lo, hi = _lambda_bounds(d)
    except HullError:
        return math.inf
    lam = _solve_lambda(d, lo, hi)
    return max(0.0, 2.0 * float(np.sum(np.log1p(lam * d))))


def feasible_mu_interval(obs0, obs1, mu_delta: float) -> tuple[float, float]:
    """Open interval of group-0 means keeping both constraints in their hulls."""
    lo = max(float(np.min(obs0)), float(np.min(obs1)) - mu_delta)
    hi = min(float(np.max(obs0)), float(np.max(obs1)) - mu_delta)
    return lo, hi


def el_profile_state(obs0, obs1, mu_delta: float) -> ELState:
    y0 = np.asarray(obs0, dtype=float)
    y1 = np.asarray(obs1, dtype=float)
    if y0.size < 2 or y1.size < 2:
        raise ContinuousPartUndefinedError("each group needs at least two observed values")
    lo, hi = feasible_mu_interval(y0, y1, mu_delta)
    if not lo < hi:
        return ELState(math.nan, math.nan, math.nan, math.inf)
    m0, m1 = float(y0.mean()), float(y1.mean()) - mu_delta
    # the minimizer lies between the two unconstrained targets; both targets
    # are inside their own hulls, so the clipped segment is non-empty
    pad = HULL_MARGIN * (hi - lo)
    a = min(max(min(m0, m1), lo + pad), hi - pad)
    b = max(min(max(m0, m1), hi - pad), lo + pad)

    def objective(mu):
        return el_m2logr_one(y0, mu) + el_m2logr_one(y1, mu + mu_delta)

    if b - a <= 1e-12 * max(1.0, abs(a)):
        mu_star, w = a, objective(a)
    else:
        mu_star, w = minimize_scalar(objective, Interval(a, b), PROFILE_TOL)
    if not math.isfinite(w):
        return ELState(math.nan, math.nan, mu_star, math.inf)
    return ELState(el_lambda(y0, mu_star), el_lambda(y1, mu_star + mu_delta), mu_star, w)


def el_profile_w1(obs0, obs1, mu_delta: float) -> tuple[float, float]:
    """Profile two-sample EL statistic for a difference in means.

    Returns ``(W1E, mu_star)``; ``W1E`` is +inf when no group-0 mean keeps
    both samples' constraints feasible.
    """
    st = el_profile_state(obs0, obs1, mu_delta)
    return st.W1E, st.mu_profile


def semiparametric_lrt(data: TrialData, alpha: float = 0.05, atom_eps: float = 0.0) -> TestResult:
    """Empirical likelihood for the continuous part plus the logistic LRT."""
    obs = observed_mask(data, atom_eps)
    g = data.group
    y0, y1 = data.y[obs & (g == 0)], data.y[obs & (g == 1)]
    if min(y0.size, y1.size) < 2:
        raise ContinuousPartUndefinedError(
            f"continuous component needs at least 2 observed outcomes per group, got {(y0.size, y1.size)}")
    w1, _ = el_profile_w1(y0, y1, 0.0)
    binary = binary_part(data, obs, use_covariates=False)
    flags = list(binary.flags)
    if data.covariates is not None:
        flags.append("covariates_ignored")
    w = w1 + binary.W2
    if math.isinf(w1):
        flags.append("el_infeasible")
        p = 0.0
    else:
        p = chisq_sf(w, 2)
    mu0 = float(y0.mean())
    mu_delta = float(y1.mean()) - mu0
    delta = recompose_delta(mu_delta, binary.pi_hat[0], binary.pi_hat[1], mu0, data.atom)
    est = EffectEstimates(mu_delta, binary.beta_delta_hat, delta)
    return TestResult(w, w1, binary.W2, 2, p, est, SEMIPARAMETRIC, alpha, tuple(flags),
                      binary.pi_hat, mu0, (y0.size, y1.size),
                      (int(np.sum(g == 0)), int(np.sum(g == 1))))
