"""Special functions, root finding and bounded scalar minimization.

Everything here works on plain Python floats; the statistical modules call
these routines inside tight loops so they avoid numpy overhead for scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import BracketError, ConvergenceError, DomainError

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_SQRT_EPS = math.sqrt(_EPS)
_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.max_iter < 1:
            raise DomainError("tolerances must be positive and max_iter >= 1")


DEFAULT_TOL = ToleranceSpec()


# ---------------------------------------------------------------------------
# incomplete gamma / beta


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    else:
        raise ConvergenceError("incomplete gamma series did not converge", best=total)
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge", best=h)
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0 or x < 0:
        raise DomainError(f"gammaincc requires a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_contfrac(a, x)


def gammainc(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0 or x < 0:
        raise DomainError(f"gammainc requires a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_contfrac(a, x)


def _beta_contfrac(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ConvergenceError("incomplete beta continued fraction did not converge", best=h)


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0 or not 0.0 <= x <= 1.0:
        raise DomainError(f"betainc requires a, b > 0 and 0 <= x <= 1, got {a}, {b}, {x}")
    if x == 0.0 or x == 1.0:
        return x
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(lbt)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_contfrac(a, b, x) / a
    return 1.0 - front * _beta_contfrac(b, a, 1.0 - x) / b


# ---------------------------------------------------------------------------
# distributions


def chisq_sf(x: float, df: float) -> float:
    """Upper tail probability P(chi2_df > x)."""
    if df <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"chi-square argument must be >= 0, got {x}")
    return min(1.0, max(0.0, gammaincc(0.5 * df, 0.5 * x)))


def chisq_quantile(p: float, df: float) -> float:
    """Return x with P(chi2_df <= x) = p."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if df <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    # Wilson-Hilferty start, then expand until bracketed
    z = normal_quantile(p)
    h = 2.0 / (9.0 * df)
    guess = max(df * (1.0 - h + z * math.sqrt(h)) ** 3, 1e-8)
    a = 0.5 * df
    # work with whichever tail is small, on the log scale, so tiny
    # probabilities stay well conditioned
    if p < 0.5:
        def g(x):
            c = gammainc(a, 0.5 * x)
            return (math.log(c) if c > 0.0 else -math.inf) - math.log(p)
    else:
        target = 1.0 - p

        def g(x):
            s = gammaincc(a, 0.5 * x)
            return math.log(target) - (math.log(s) if s > 0.0 else -math.inf)

    lo, hi = guess, guess
    while g(lo) > 0:
        lo *= 0.5
    while g(hi) < 0:
        hi = 2.0 * hi + 1.0
    if lo == hi:
        return lo if g(lo) == 0 else find_root(g, Interval(0.5 * lo, 2.0 * hi + 1.0), _QTOL)
    return find_root(g, Interval(lo, hi), _QTOL)


_QTOL = ToleranceSpec(abs_tol=1e-300, rel_tol=4 * _EPS, max_iter=500)


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF (Acklam rational start, Halley polish)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if p > 0.5:
        # 1 - p is exact here; refining in the lower tail avoids cancellation
        return -normal_quantile(1.0 - p)
    a = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
         1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
    b = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
         6.680131188771972e01, -1.328068155288572e01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
         -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
         3.754408661907416e00)
    plow = 0.02425
    if p < plow:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    for _ in range(3):
        # Halley refinement
        e = normal_cdf(x) - p
        u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
        x -= u / (1.0 + 0.5 * x * u)
    return x


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T_df| > |t|) via the incomplete beta function."""
    if df <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t * t))


# ---------------------------------------------------------------------------
# root finding and minimization


def find_root(f: Callable[[float], float], bracket: Interval,
              tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Brent's method: bisection safeguarding secant / inverse quadratic steps.

    Raises ``BracketError`` when ``f`` does not change sign over the bracket.
    """
    xpre, xcur = float(bracket.lo), float(bracket.hi)
    fpre, fcur = f(xpre), f(xcur)
    if fpre == 0.0:
        return xpre
    if fcur == 0.0:
        return xcur
    if (fpre > 0) == (fcur > 0):
        raise BracketError(
            f"no sign change on [{xpre}, {xcur}]: f(lo)={fpre}, f(hi)={fcur}")
    xblk = fblk = spre = scur = 0.0
    for _ in range(tol.max_iter):
        if fpre != 0.0 and fcur != 0.0 and (fpre < 0) != (fcur < 0):
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur
        delta = 0.5 * (tol.abs_tol + tol.rel_tol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return xcur
        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if math.isfinite(stry) and 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis
        xpre, fpre = xcur, fcur
        if abs(scur) > delta:
            xcur += scur
        else:
            xcur += delta if sbis > 0 else -delta
        fcur = f(xcur)
    raise ConvergenceError(f"root finder exceeded {tol.max_iter} iterations", best=xcur)


def minimize_scalar(f: Callable[[float], float], bracket: Interval,
                    tol: ToleranceSpec = DEFAULT_TOL) -> tuple[float, float]:
    """Bounded Brent minimization with golden-section fallback.

    The interior search never touches the end points, so both ends are probed
    afterwards; a monotone ``f`` therefore returns the boundary minimum.
    Non-finite values are tolerated (parabolic steps through them fall back
    to golden section).
    """
    a, b = float(bracket.lo), float(bracket.hi)
    v = w = x = a + _GOLDEN * (b - a)
    fv = fw = fx = f(x)
    d = e = 0.0
    for _ in range(tol.max_iter):
        xm = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + tol.abs_tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            etemp, e = e, d
            if (math.isfinite(p) and math.isfinite(q) and abs(p) < abs(0.5 * q * etemp)
                    and q * (a - x) < p < q * (b - x)):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if xm >= x else -tol1
                golden = False
        if golden:
            e = (a - x) if x >= xm else (b - x)
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else (tol1 if d > 0 else -tol1))
        fu = f(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    else:
        raise ConvergenceError(f"minimizer exceeded {tol.max_iter} iterations", best=(x, fx))
    for end in (bracket.lo, bracket.hi):
        fe = f(end)
        if fe < fx:
            x, fx = float(end), fe
    return x, fx
