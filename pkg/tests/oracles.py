"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written in a different style from the
library: pure-Python loops and math-module scalars instead of numpy
kernels, direct numeric integration instead of continued fractions. A
bug would have to appear in both routes, in the same way, to escape.
"""

from __future__ import annotations

import math
import statistics

import numpy as np

# ---------------------------------------------------------------------------
# nearest-centroid reference


def ref_transform(rows, mode, center=None):
    """Row-wise transform on lists of lists."""
    out = []
    for row in rows:
        v = list(map(float, row))
        if mode == "cl2n":
            v = [a - b for a, b in zip(v, center)]
        if mode in ("l2n", "cl2n"):
            norm = math.sqrt(sum(a * a for a in v))
            v = [a / norm for a in v]
        out.append(v)
    return out


def ref_prototypes(support, mode):
    """support: {class_id: [[...], ...]} -> ({class_id: proto}, center)."""
    center = None
    if mode == "cl2n":
        pooled = [row for rows in support.values() for row in rows]
        dim = len(pooled[0])
        center = [sum(row[j] for row in pooled) / len(pooled) for j in range(dim)]
    protos = {}
    for cid, rows in support.items():
        t = ref_transform(rows, mode, center)
        dim = len(t[0])
        protos[cid] = [sum(row[j] for row in t) / len(t) for j in range(dim)]
    return protos, center


def ref_classify(query, protos, mode, center=None):
    """Smallest squared distance wins; ties go to the smallest class id."""
    (q,) = ref_transform([list(map(float, query))], mode, center)
    best_id = None
    best_d = None
    for cid in sorted(protos):
        p = protos[cid]
        d = sum((a - b) * (a - b) for a, b in zip(q, p))
        if best_d is None or d < best_d:
            best_d = d
            best_id = cid
    return best_id


def ref_episode_accuracy(support, queries, query_labels, mode):
    protos, center = ref_prototypes(support, mode)
    correct = 0
    for q, label in zip(queries, query_labels):
        if ref_classify(q, protos, mode, center) == label:
            correct += 1
    return correct / len(query_labels)


# ---------------------------------------------------------------------------
# Student-t reference: direct numeric integration of the density


def t_pdf(x: float, df: int) -> float:
    ln_c = (
        math.lgamma((df + 1) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
    )
    return math.exp(ln_c - ((df + 1) / 2.0) * math.log1p(x * x / df))


def t_cdf_by_integration(x: float, df: int, tol: float = 1e-11) -> float:
    """CDF via Simpson's rule from 0 to |x| with interval doubling."""
    if x == 0.0:
        return 0.5
    hi = abs(x)
    n = 64
    prev = None
    for _ in range(22):
        h = hi / n
        total = t_pdf(0.0, df) + t_pdf(hi, df)
        for i in range(1, n):
            total += (4.0 if i % 2 else 2.0) * t_pdf(i * h, df)
        est = total * h / 3.0
        if prev is not None and abs(est - prev) < tol:
            break
        prev = est
        n *= 2
    half = est
    return 0.5 + half if x > 0 else 0.5 - half


def t_quantile_by_integration(df: int, p: float) -> float:
    """Bisection against the integration CDF."""
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile_by_integration(df, 1.0 - p)
    lo, hi = 0.0, 1.0
    while t_cdf_by_integration(hi, df) < p:
        hi *= 2.0
        if hi > 1e9:
            raise AssertionError("no bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if t_cdf_by_integration(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cauchy_quantile(p: float) -> float:
    """Exact quantile for one degree of freedom."""
    return math.tan(math.pi * (p - 0.5))


def ref_confidence_interval(values, level=0.95, t_value=None):
    """Textbook two-pass computation; t looked up by the caller."""
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    sd = math.sqrt(var)
    if t_value is None:
        t_value = t_quantile_by_integration(n - 1, (1.0 + level) / 2.0)
    return mean, t_value * sd / math.sqrt(n), sd


# ---------------------------------------------------------------------------
# vectorized seed derivation for large-scale collision scans

_U = np.uint64
_GAMMA = _U(0x9E3779B97F4A7C15)
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)


def derive_seeds_vectorized(base_seed: int, count: int) -> np.ndarray:
    """derive_seed(base_seed, i) for i in range(count), all-numpy."""
    idx = np.arange(count, dtype=np.uint64)
    z = (_U(base_seed) ^ (idx * _GAMMA)) + _GAMMA
    z = (z ^ (z >> _U(30))) * _M1
    z = (z ^ (z >> _U(27))) * _M2
    return z ^ (z >> _U(31))


def sample_mean_stdev(values):
    """statistics-module cross-check used by the CI tests."""
    return statistics.fmean(values), statistics.stdev(values)
