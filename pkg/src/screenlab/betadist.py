"""Exact beta and binomial tail computations.

Everything here is built on the regularized incomplete beta function,
evaluated with the standard continued fraction (modified Lentz) and
inverted by bisection. Quantiles are resolved to an absolute tolerance of
1e-10, tight enough for four-decimal confidence intervals and for the
pessimistic error bounds used in tree pruning.
"""

from __future__ import annotations

import math

_MAX_CF_ITER = 300
_CF_EPS = 3e-16
_TINY = 1e-300
_INV_ABS_TOL = 1e-10


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
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
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    front = math.exp(log_front)
    # The continued fraction converges fast on one side of the mean;
    # use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - math.exp(b * math.log1p(-x) + a * math.log(x) - log_beta(b, a)) \
        * _betacf(b, a, 1.0 - x) / b


def betainc_inv(a: float, b: float, p: float) -> float:
    """Quantile of the Beta(a, b) distribution by bisection on betainc."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    # bisect until the bracket is three orders tighter than the tolerance
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if betainc(a, b, mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < _INV_ABS_TOL * 1e-3:
            break
    return 0.5 * (lo + hi)


def binom_tail_geq(k: int, n: int, p: float) -> float:
    """Exact upper binomial tail P[X >= k] for X ~ Binomial(n, p)."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return betainc(k, n - k + 1, p)


def binom_upper_limit(errors: float, n: float, confidence: float) -> float:
    """Pessimistic upper bound on an error rate: the largest rate p with
    P[X <= errors | n, p] >= confidence. Used for subtree-replacement
    pruning with the conventional confidence 0.25."""
    if n <= 0:
        return 0.0
    if errors >= n:
        return 1.0
    return betainc_inv(errors + 1.0, n - errors, 1.0 - confidence)


def clopper_pearson(successes: int, n: int, level: float = 0.95):
    """Exact two-sided binomial confidence interval for a proportion."""
    if not 0 <= successes <= n:
        raise ValueError(f"need 0 <= successes <= n, got {successes}/{n}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    alpha = 1.0 - level
    low = 0.0 if successes == 0 else betainc_inv(successes, n - successes + 1, alpha / 2.0)
    high = 1.0 if successes == n else betainc_inv(successes + 1, n - successes, 1.0 - alpha / 2.0)
    return low, high
