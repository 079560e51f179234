"""Synthetic Gaussian-cluster datasets for tests and calibration runs."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .store import EmbeddingDataset


def make_gaussian_clusters(
    n_classes: int,
    per_class: int,
    dim: int,
    *,
    noise: float = 1.0,
    separation_sigmas: float = 3.0,
    seed: int = 0,
    dataset_name: str = "synthetic",
    backbone_name: str = "synthetic",
) -> EmbeddingDataset:
    """Isotropic Gaussian clusters with equal pairwise mean separation.

    Cluster k is centered at alpha * e_k (a scaled one-hot axis), which
    makes every pair of means exactly the same distance apart. The scale
    is chosen so that the inter-mean distance equals
    ``separation_sigmas * noise * sqrt(dim)``: separation is measured in
    units of the cluster's noise radius, the typical norm of an isotropic
    dim-dimensional Gaussian perturbation. Records are blocked by class
    (all of class 0 first), which leaves record order trivially
    reproducible.
    """
    if n_classes < 2:
        raise ValidationError("need at least 2 classes")
    if dim < n_classes:
        raise ValidationError(f"dim must be >= n_classes to place {n_classes} one-hot means")
    if per_class < 2:
        raise ValidationError("need at least 2 records per class")
    if noise <= 0 or separation_sigmas <= 0:
        raise ValidationError("noise and separation_sigmas must be positive")
    # |alpha*e_i - alpha*e_j| = alpha*sqrt(2) for i != j
    alpha = separation_sigmas * noise * np.sqrt(dim) / np.sqrt(2.0)
    rng = np.random.default_rng(seed)
    vectors = np.empty((n_classes * per_class, dim), dtype=np.float64)
    labels = np.empty(n_classes * per_class, dtype=np.int64)
    for k in range(n_classes):
        start = k * per_class
        means = np.zeros(dim)
        means[k] = alpha
        vectors[start : start + per_class] = means + noise * rng.standard_normal(
            (per_class, dim)
        )
        labels[start : start + per_class] = k
    return EmbeddingDataset(
        dataset_name=dataset_name,
        backbone_name=backbone_name,
        dim=dim,
        class_names=tuple(f"class{k}" for k in range(n_classes)),
        labels=labels,
        vectors=vectors.astype(np.float32),
        image_size=1,
        preprocess=f"gaussian-clusters(seed={seed},sep={separation_sigmas},noise={noise})",
    )
