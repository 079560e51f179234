"""Array kernels: adaptive average pooling, embedding transforms, distances.

Storage is 32-bit; every function here promotes to 64-bit floats so that
summation order cannot perturb results at the tolerances the tests pin.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateVectorError, DimensionError, ValidationError


class TransformMode(Enum):
    """Embedding transform applied before prototypes and distances.

    UN leaves vectors untouched, L2N scales each to unit length, CL2N
    subtracts a center vector first and then scales to unit length.
    """

    UN = "un"
    L2N = "l2n"
    CL2N = "cl2n"


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Single-image feature map in channels x height x width layout."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValidationError("feature map must be a 3-d array (C, H, W) with no empty axis")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("feature map contains non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]


def adaptive_avg_pool(fm) -> np.ndarray:
    """Spatial mean over the H x W grid, one value per channel.

    Accepts a FeatureMap or any array-like of shape (C, H, W); returns a
    float64 vector of length C.
    """
    if not isinstance(fm, FeatureMap):
        fm = FeatureMap(fm)
    return fm.values.mean(axis=(1, 2))


def transform(vectors, mode: TransformMode, center=None) -> np.ndarray:
    """Apply an embedding transform row-wise to a matrix.

    Args:
        vectors: array-like of shape (rows, dim).
        mode: UN (identity), L2N (unit length), or CL2N (subtract
            ``center``, then unit length).
        center: required for CL2N, ignored otherwise.

    Returns:
        A new float64 matrix; the input is never modified.
    """
    arr = np.array(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix of vectors, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vectors contain non-finite values")
    if mode is TransformMode.UN:
        return arr
    suffix = ""
    if mode is TransformMode.CL2N:
        if center is None:
            raise ValidationError("CL2N requires a center vector")
        c = np.asarray(center, dtype=np.float64)
        if c.ndim != 1 or c.shape[0] != arr.shape[1]:
            raise DimensionError(
                f"center has length {c.size}, vectors have dim {arr.shape[1]}"
            )
        arr = arr - c
        suffix = " after centering"
    norms = np.linalg.norm(arr, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DegenerateVectorError(f"row {int(zero[0])} has zero norm{suffix}")
    return arr / norms[:, None]


def euclidean_distance_sq(a, b) -> float:
    """Squared Euclidean distance between two equal-length vectors."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1:
        raise DimensionError("euclidean_distance_sq expects 1-d vectors")
    if va.shape[0] != vb.shape[0]:
        raise DimensionError(f"length mismatch: {va.shape[0]} vs {vb.shape[0]}")
    if not (np.all(np.isfinite(va)) and np.all(np.isfinite(vb))):
        raise ValidationError("vectors contain non-finite values")
    d = va - vb
    return float(np.dot(d, d))


def pairwise_sq_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared distances between every row of ``a`` and every row of ``b``.

    Both classify paths share this kernel, so single-query and batched
    classification produce bit-identical distances.
    """
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("pairwise_sq_distances expects 2-d matrices")
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"dim mismatch: {a.shape[1]} vs {b.shape[1]}")
    diff = a[:, None, :] - b[None, :, :]
    return np.sum(diff * diff, axis=2)
