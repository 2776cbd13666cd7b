"""Parametric two-part likelihood ratio test.

The continuous part is a Gaussian linear model fitted to observed outcomes,
the binary part a logistic model for being observed.  Because the likelihood
factorizes, the joint statistic is the sum of the two nested-model LRTs and
is referred to a chi-square distribution with two degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContinuousPartUndefinedError, SeparationError
from .model import EffectEstimates, TrialData, observed_mask, recompose_delta
from .numerics import Interval, ToleranceSpec, chisq_sf, find_root
from .regression import logistic_mle, lrt_nested, ols_mle

PARAMETRIC = "parametric"
SEMIPARAMETRIC = "semiparametric"
METHOD_LABELS = {
    PARAMETRIC: "Parametric Likelihood Ratio Test",
    SEMIPARAMETRIC: "Semi-empirical Likelihood Ratio Test",
}


@dataclass(frozen=True)
class TestResult:
    W: float
    W1: float
    W2: float
    df: int
    p_value: float
    estimates: EffectEstimates
    method: str
    alpha: float = 0.05
    flags: tuple = ()
    pi_hat: tuple = (math.nan, math.nan)
    mu0_hat: float = math.nan
    n_obs: tuple = (0, 0)
    n_total: tuple = (0, 0)

    __test__ = False  # not a pytest class


@dataclass(frozen=True, eq=False)
class BinaryPart:
    W2: float
    beta_delta_hat: float
    pi_hat: tuple
    flags: tuple = ()
    loglik_full: float = math.nan
    loglik_reduced: float = math.nan


def _designs(data: TrialData, use_covariates: bool):
    n = data.n
    cols = [np.ones(n), data.group.astype(float)]
    names = ["intercept", "treatment"]
    if use_covariates and data.covariates is not None:
        cols.extend(data.covariates.T)
        names.extend(data.covariate_names)
    full = np.column_stack(cols)
    keep = [0] + list(range(2, full.shape[1]))
    return full, full[:, keep], names, [names[j] for j in keep]


def _binomial_ll(k: int, n: int, p: float) -> float:
    out = 0.0
    if k:
        out += k * math.log(p)
    if n - k:
        out += (n - k) * math.log1p(-p)
    return out


def binary_table_lrt(k0: int, n0: int, k1: int, n1: int) -> tuple[float, float]:
    """Closed-form 2x2 deviance difference and log odds-ratio, boundary safe."""
    p0, p1, pp = k0 / n0, k1 / n1, (k0 + k1) / (n0 + n1)
    w = 2.0 * (_binomial_ll(k0, n0, p0) + _binomial_ll(k1, n1, p1) - _binomial_ll(k0 + k1, n0 + n1, pp))

    def logit(p):
        if p <= 0.0:
            return -math.inf
        if p >= 1.0:
            return math.inf
        return math.log(p / (1.0 - p))

    l0, l1 = logit(p0), logit(p1)
    beta = math.nan if (math.isinf(l0) and l0 == l1) else l1 - l0
    return max(w, 0.0), beta


def binary_part(data: TrialData, obs: np.ndarray, use_covariates: bool = True) -> BinaryPart:
    """Logistic LRT for the treatment effect on being observed."""
    a = obs.astype(float)
    full, reduced, names, rnames = _designs(data, use_covariates)
    g = data.group
    n0, n1 = int(np.sum(g == 0)), int(np.sum(g == 1))
    k0, k1 = int(np.sum(obs[g == 0])), int(np.sum(obs[g == 1]))
    pi_hat = (k0 / n0, k1 / n1)
    boundary = k0 in (0, n0) or k1 in (0, n1)
    if boundary and full.shape[1] == 2:
        # saturated limit: the MLE sits at the edge, use the table directly
        w2, beta = binary_table_lrt(k0, n0, k1, n1)
        return BinaryPart(w2, beta, pi_hat, ("binary_boundary",))
    fit_full = logistic_mle(full, a, names=names)
    fit_red = logistic_mle(reduced, a, names=rnames)
    w2, _ = lrt_nested(fit_full.loglik, fit_red.loglik, 1)
    return BinaryPart(w2, float(fit_full.coef[1]), pi_hat, (), fit_full.loglik, fit_red.loglik)


def _continuous_inputs(data: TrialData, obs: np.ndarray, use_covariates: bool):
    g = data.group
    counts = (int(np.sum(obs & (g == 0))), int(np.sum(obs & (g == 1))))
    if min(counts) < 2:
        raise ContinuousPartUndefinedError(
            f"continuous component needs at least 2 observed outcomes per group, got {counts}")
    full, reduced, names, rnames = _designs(data, use_covariates)
    return full[obs], reduced[obs], data.y[obs], names, rnames


def continuous_part(data: TrialData, obs: np.ndarray, use_covariates: bool = True):
    """Gaussian LRT for the treatment effect among observed outcomes.

    Returns ``(W1, mu_delta_hat, full_fit)``; sigma^2 is shared by the groups
    under both hypotheses.
    """
    xf, xr, y, names, rnames = _continuous_inputs(data, obs, use_covariates)
    fit_full = ols_mle(xf, y, names=names)
    fit_red = ols_mle(xr, y, names=rnames)
    w1, _ = lrt_nested(fit_full.loglik, fit_red.loglik, 1)
    return w1, float(fit_full.coef[1]), fit_full


def profile_w1(data: TrialData, m: float, obs: Optional[np.ndarray] = None,
               use_covariates: bool = True, full_loglik: Optional[float] = None) -> float:
    """Gaussian profile LRT for the hypothesis mu_delta = m."""
    if obs is None:
        obs = observed_mask(data)
    xf, xr, y, names, rnames = _continuous_inputs(data, obs, use_covariates)
    if full_loglik is None:
        full_loglik = ols_mle(xf, y, names=names).loglik
    constrained = ols_mle(xr, y, offset=m * xf[:, 1], names=rnames)
    return max(0.0, 2.0 * (full_loglik - constrained.loglik))


def profile_w2(data: TrialData, b: float, obs: Optional[np.ndarray] = None,
               use_covariates: bool = True, full_loglik: Optional[float] = None) -> float:
    """Logistic profile LRT for the hypothesis beta_delta = b.

    The intercept (and covariate effects) are re-maximized with the treatment
    coefficient held at ``b`` through an offset.
    """
    if obs is None:
        obs = observed_mask(data)
    a = obs.astype(float)
    full, reduced, names, rnames = _designs(data, use_covariates)
    if full_loglik is None:
        full_loglik = _binary_full_loglik(data, obs, full, names)
    if full.shape[1] == 2:
        constrained = _table_loglik_fixed_slope(data, obs, b)
    else:
        constrained = logistic_mle(reduced, a, offset=b * full[:, 1], names=rnames).loglik
    return max(0.0, 2.0 * (full_loglik - constrained))


def _table_loglik_fixed_slope(data: TrialData, obs: np.ndarray, b: float) -> float:
    """Two-group binomial log-likelihood maximized over the intercept with
    the log odds-ratio held at ``b``."""
    g = data.group
    n0, n1 = int(np.sum(g == 0)), int(np.sum(g == 1))
    k0, k1 = int(np.sum(obs[g == 0])), int(np.sum(obs[g == 1]))
    k = k0 + k1
    if k == 0 or k == n0 + n1:
        return 0.0

    def score(b0):
        return k - n0 * _expit(b0) - n1 * _expit(b0 + b)

    span = abs(b) + 40.0
    b0 = find_root(score, Interval(-span, span), ToleranceSpec(1e-13, 1e-13, 300))
    return (k0 * _log_expit(b0) + (n0 - k0) * _log_expit(-b0)
            + k1 * _log_expit(b0 + b) + (n1 - k1) * _log_expit(-(b0 + b)))


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _log_expit(x: float) -> float:
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def _binary_full_loglik(data, obs, full, names):
    g = data.group
    if full.shape[1] == 2:
        n0, n1 = int(np.sum(g == 0)), int(np.sum(g == 1))
        k0, k1 = int(np.sum(obs[g == 0])), int(np.sum(obs[g == 1]))
        return _binomial_ll(k0, n0, k0 / n0) + _binomial_ll(k1, n1, k1 / n1)
    return logistic_mle(full, obs.astype(float), names=names).loglik


def parametric_lrt(data: TrialData, use_covariates: bool = True, alpha: float = 0.05,
                   atom_eps: float = 0.0) -> TestResult:
    """Joint parametric LRT of no treatment effect on either component."""
    obs = observed_mask(data, atom_eps)
    g = data.group
    n_total = (int(np.sum(g == 0)), int(np.sum(g == 1)))
    n_obs = (int(np.sum(obs & (g == 0))), int(np.sum(obs & (g == 1))))
    w1, mu_delta, fit = continuous_part(data, obs, use_covariates)
    try:
        binary = binary_part(data, obs, use_covariates)
    except SeparationError as exc:
        exc.partial = {"W1": w1, "mu_delta_hat": mu_delta, "logistic": exc.partial}
        raise
    mu0 = float(np.mean(data.y[obs & (g == 0)]))
    delta = recompose_delta(mu_delta, binary.pi_hat[0], binary.pi_hat[1], mu0, data.atom)
    est = EffectEstimates(mu_delta, binary.beta_delta_hat, delta)
    w = w1 + binary.W2
    return TestResult(w, w1, binary.W2, 2, chisq_sf(w, 2), est, PARAMETRIC, alpha,
                      binary.flags, binary.pi_hat, mu0, n_obs, n_total)
