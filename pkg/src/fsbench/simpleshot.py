"""Nearest-centroid few-shot classification (SimpleShot).

A class prototype is the arithmetic mean of its transformed support
vectors; queries take the label of the nearest prototype by squared
Euclidean distance. The pipeline is strictly inductive: the CL2N center
comes from the episode's support vectors only, never from queries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DimensionError, ProtocolError, ValidationError
from .ops import TransformMode, pairwise_sq_distances, transform


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    """Per-class centroids in transformed embedding space."""

    class_ids: tuple
    prototypes: np.ndarray
    mode: TransformMode
    center: np.ndarray = None

    def __post_init__(self) -> None:
        protos = np.asarray(self.prototypes, dtype=np.float64)
        if protos.ndim != 2 or protos.shape[0] != len(self.class_ids):
            raise ValidationError("prototype matrix must have one row per class id")
        if len(set(self.class_ids)) != len(self.class_ids):
            raise ValidationError("class ids must be unique")
        if not np.all(np.isfinite(protos)):
            raise ValidationError("prototypes contain non-finite values")
        if (self.center is not None) != (self.mode is TransformMode.CL2N):
            raise ValidationError("center must be present exactly when mode is CL2N")
        if self.mode is not TransformMode.UN:
            norms = np.linalg.norm(protos, axis=1)
            # means of unit vectors live inside the unit ball
            if norms.max() > 1.0 + 1e-9:
                raise ValidationError("prototype norm exceeds 1 under a normalizing mode")
        object.__setattr__(self, "prototypes", protos)

    @property
    def dim(self) -> int:
        return self.prototypes.shape[1]


@dataclass(frozen=True, eq=False)
class Prediction:
    """Classification outcome for one query vector."""

    query_index: int
    class_id: int
    sq_distances: np.ndarray

    def __post_init__(self) -> None:
        if self.class_id < 0:
            raise ValidationError("predicted class id must be non-negative")


def compute_prototypes(
    support_vectors: Mapping[int, np.ndarray], mode: TransformMode
) -> PrototypeSet:
    """Build per-class prototypes from support vectors.

    Args:
        support_vectors: class id -> (shots, dim) matrix. Iteration order
            fixes the prototype row order.
        mode: transform applied to every support vector before averaging.
            For CL2N the center is the mean of ALL support vectors across
            classes, and prototypes are not re-normalized afterwards.
    """
    if not support_vectors:
        raise ProtocolError("at least one support class is required")
    mats = {}
    dim = None
    for class_id, vecs in support_vectors.items():
        mat = np.asarray(vecs, dtype=np.float64)
        if mat.ndim != 2:
            raise DimensionError(f"class {class_id}: support matrix must be 2-d")
        if mat.shape[0] < 1:
            raise ProtocolError(f"class {class_id} has no support vectors")
        if dim is None:
            dim = mat.shape[1]
        elif mat.shape[1] != dim:
            raise DimensionError(
                f"class {class_id}: dim {mat.shape[1]} differs from {dim}"
            )
        mats[class_id] = mat
    center = None
    if mode is TransformMode.CL2N:
        center = np.concatenate(list(mats.values()), axis=0).mean(axis=0)
    protos = np.stack(
        [transform(mat, mode, center).mean(axis=0) for mat in mats.values()]
    )
    return PrototypeSet(
        class_ids=tuple(mats), prototypes=protos, mode=mode, center=center
    )


def classify_batch(
    queries: np.ndarray, protos: PrototypeSet, mode: TransformMode
) -> list:
    """Classify each query row against a prototype set.

    The query transform must match the prototype transform (CL2N reuses
    the prototypes' support-derived center). Ties on the minimal distance
    resolve to the smallest class id, so results never depend on
    prototype row order.
    """
    if mode is not protos.mode:
        raise ProtocolError(
            f"transform mode mismatch: queries {mode.value}, prototypes {protos.mode.value}"
        )
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim != 2:
        raise DimensionError("queries must be a 2-d matrix")
    if q.shape[0] == 0:
        return []
    if q.shape[1] != protos.dim:
        raise DimensionError(f"query dim {q.shape[1]} vs prototype dim {protos.dim}")
    tq = transform(q, mode, protos.center)
    dists = pairwise_sq_distances(tq, protos.prototypes)
    ids = protos.class_ids
    out = []
    for i in range(dists.shape[0]):
        row = dists[i]
        best = min(cid for j, cid in enumerate(ids) if row[j] == row.min())
        out.append(Prediction(query_index=i, class_id=best, sq_distances=row.copy()))
    return out


def classify(query: np.ndarray, protos: PrototypeSet, mode: TransformMode) -> Prediction:
    """Classify a single query vector; see classify_batch."""
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1:
        raise DimensionError("classify expects a 1-d query vector")
    return classify_batch(q[None, :], protos, mode)[0]
