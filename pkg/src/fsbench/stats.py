"""Student-t statistics for episode-accuracy confidence intervals.

The t quantile is computed from first principles: the CDF is expressed
through the regularized incomplete beta function, evaluated with the
modified Lentz continued-fraction algorithm, and the quantile is found
by bisection. Only math.lgamma is taken from the standard library, so
the result does not depend on any external statistics package.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import DomainError, InsufficientDataError

_MAX_CF_ITER = 2000
_CF_EPS = 1e-15
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz form)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise DomainError("incomplete beta requires a > 0 and b > 0")
    if x < 0.0 or x > 1.0:
        raise DomainError("incomplete beta requires 0 <= x <= 1")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the fraction on whichever side converges fast, mirror for the other.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(x: float, df: int) -> float:
    """CDF of the Student t distribution with ``df`` degrees of freedom."""
    if df < 1:
        raise DomainError("degrees of freedom must be >= 1")
    if x == 0.0:
        return 0.5
    w = df / (df + x * x)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, w)
    return 1.0 - tail if x > 0 else tail


def t_quantile(df: int, p: float) -> float:
    """Value x with t_cdf(x, df) == p, to absolute error below 1e-9.

    Found by doubling an upper bracket and bisecting; each probe costs
    one incomplete-beta evaluation, so even extreme quantiles stay cheap.
    """
    # validate before the cache: equal-hashing keys (2.0, True) must not
    # slip through on a cache hit
    if not isinstance(df, int) or isinstance(df, bool) or df < 1:
        raise DomainError("degrees of freedom must be a positive integer")
    if not 0.0 < p < 1.0:
        raise DomainError("probability must lie strictly between 0 and 1")
    return _t_quantile_cached(df, float(p))


@lru_cache(maxsize=512)
def _t_quantile_cached(df: int, p: float) -> float:
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -_t_quantile_cached(df, 1.0 - p)
    lo = 0.0
    hi = 1.0
    for _ in range(160):
        if t_cdf(hi, df) >= p:
            break
        hi *= 2.0
    else:
        raise DomainError(f"no finite bracket for t quantile at p={p}")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConfidenceInterval:
    """Two-sided interval mean +/- half_width over n sampled values."""

    mean: float
    half_width: float
    level: float
    n: int
    stdev: float

    def __post_init__(self) -> None:
        if self.half_width < 0.0:
            raise DomainError("half_width cannot be negative")
        if not 0.0 < self.level < 1.0:
            raise DomainError("confidence level must lie strictly between 0 and 1")
        if self.n < 2:
            raise InsufficientDataError("a confidence interval needs n >= 2")

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def display(self, digits: int = 3) -> str:
        return f"{self.mean:.{digits}f} ± {self.half_width:.{digits}f}"


def mean_confidence_interval(values: Sequence[float], level: float = 0.95) -> ConfidenceInterval:
    """Mean with a two-sided Student-t interval over sampled values.

    The standard deviation uses the n-1 denominator, matching the t
    interval's derivation.
    """
    n = len(values)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 values, got {n}")
    if not 0.0 < level < 1.0:
        raise DomainError("confidence level must lie strictly between 0 and 1")
    mean = statistics.fmean(values)
    stdev = statistics.stdev(values)
    t = t_quantile(n - 1, (1.0 + level) / 2.0)
    half = t * stdev / math.sqrt(n)
    return ConfidenceInterval(mean=mean, half_width=half, level=level, n=n, stdev=stdev)
