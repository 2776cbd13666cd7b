"""Gaussian and logistic maximum likelihood fits, and nested-model LRTs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (DegenerateFitError, NestingError, SeparationError,
                     SingularDesignError)
from .numerics import chisq_sf

SEPARATION_BOUND = 30.0
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class LinearFit:
    coef: np.ndarray
    sigma2_hat: float
    loglik: float
    n: int
    residuals: np.ndarray


@dataclass(frozen=True, eq=False)
class LogisticFit:
    coef: np.ndarray
    loglik: float
    converged: bool
    n: int
    fitted: np.ndarray
    iterations: int


def _column_names(names, k):
    if names is None:
        return [f"column {j}" for j in range(k)]
    return list(names)


def gaussian_loglik(sigma2: float, n: int) -> float:
    return -0.5 * n * (_LOG_2PI + math.log(sigma2) + 1.0)


def ols_mle(design, y, offset=None, names: Optional[Sequence[str]] = None) -> LinearFit:
    """Least squares by QR decomposition; variance MLE with divisor n.

    ``offset`` is subtracted from ``y`` before fitting, which is how a
    coefficient is held fixed when profiling.
    """
    X = np.asarray(design, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    z = np.asarray(y, dtype=float)
    if offset is not None:
        z = z - offset
    n, k = X.shape
    if n != z.size:
        raise ValueError("design rows and response length differ")
    if n < k + 1:
        raise SingularDesignError(f"{n} observations cannot support {k} coefficients plus a variance")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    scale = max(float(np.max(np.linalg.norm(X, axis=0))), 1.0)
    bad = np.flatnonzero(diag <= 1e-10 * scale)
    if bad.size:
        col = _column_names(names, k)[bad[0]]
        raise SingularDesignError(f"design is rank deficient at {col}")
    coef = np.linalg.solve(r, q.T @ z)
    resid = z - X @ coef
    rss = float(resid @ resid)
    if rss <= 1e-26 * max(float(z @ z), 1e-300):
        raise DegenerateFitError("residual sum of squares is zero; Gaussian likelihood is unbounded")
    s2 = rss / n
    return LinearFit(coef, s2, gaussian_loglik(s2, n), n, resid)


def _bernoulli_loglik(a, eta):
    # log sigma(eta) = -log1p(exp(-eta)), computed stably on both sides
    return float(np.sum(a * eta - np.logaddexp(0.0, eta)))


def logistic_mle(design, a, offset=None, names: Optional[Sequence[str]] = None,
                 max_iter: int = 100, grad_tol: float = 1e-10) -> LogisticFit:
    """Logistic regression by IRLS (Newton-Raphson) with step halving.

    A coefficient exceeding 30 in absolute value on the logit scale is
    treated as evidence of (quasi-)complete separation.
    """
    X = np.asarray(design, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    a = np.asarray(a, dtype=float)
    n, k = X.shape
    off = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    if np.linalg.matrix_rank(X) < k:
        raise SingularDesignError("logistic design is rank deficient")
    colnames = _column_names(names, k)
    beta = np.zeros(k)
    eta = off + X @ beta
    ll = _bernoulli_loglik(a, eta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = 1.0 / (1.0 + np.exp(-eta))
        grad = X.T @ (a - p)
        if np.max(np.abs(grad)) < grad_tol:
            converged = True
            break
        w = p * (1.0 - p)
        hess = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        t = 1.0
        for _ in range(30):
            cand = beta + t * step
            eta_c = off + X @ cand
            ll_c = _bernoulli_loglik(a, eta_c)
            if ll_c >= ll - 1e-12 * abs(ll):
                break
            t *= 0.5
        beta, eta, ll = cand, eta_c, ll_c
        big = np.flatnonzero(np.abs(beta) > SEPARATION_BOUND)
        if big.size:
            j = int(big[np.argmax(np.abs(beta[big]))])
            raise SeparationError(
                f"logistic fit diverges along {colnames[j]} (|coef| > {SEPARATION_BOUND:g}); "
                "the data are (quasi-)separated", column=colnames[j],
                partial=LogisticFit(beta, ll, False, n, 1.0 / (1.0 + np.exp(-eta)), it))
    fitted = 1.0 / (1.0 + np.exp(-eta))
    return LogisticFit(beta, ll, converged, n, fitted, it)


def lrt_nested(full: float, reduced: float, df: int, slack: float = 1e-8) -> tuple[float, float]:
    """Likelihood ratio statistic and chi-square p-value for nested fits."""
    if full < reduced - slack * max(1.0, abs(reduced)):
        raise NestingError(f"full model log-likelihood {full} is below reduced {reduced}")
    w = max(0.0, 2.0 * (full - reduced))
    return w, chisq_sf(w, df)
