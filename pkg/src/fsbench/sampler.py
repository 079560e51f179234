"""Deterministic N-way/M-shot episode sampling.

Episode composition is a pure function of the dataset's records and
(base_seed, episode_index). The generator consumption order is fixed and
documented so an independent implementation can reproduce every episode:

1. Seed a xoshiro256** stream with derive_seed(base_seed, episode_index).
2. Choose N classes by partial Fisher-Yates over the eligible class ids
   in ascending order; sort the chosen ids ascending.
3. For each chosen class in ascending order, choose M support records by
   partial Fisher-Yates over that class's record indices in ascending
   order; sort each support row ascending.
4. Build the query pool: all record indices of the chosen classes in
   ascending order, minus the support indices (same-dataset episodes
   only). Unstratified draws take Q records from the pool in one partial
   Fisher-Yates pass; stratified draws split Q per class (remainder to
   the lowest class ids) and sample each class's pool in ascending class
   order. Query indices are sorted ascending afterwards.

Eligibility: same-dataset episodes require m_shot + 1 records per class
(every chosen class can contribute at least one query); cross-dataset
episodes require m_shot records on the support side only, since queries
come from the other dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasibleQueryError,
    InfeasibleSpecError,
    ProtocolError,
    ValidationError,
)
from .rng import Xoshiro256StarStar, derive_seed
from .store import EmbeddingDataset

DEFAULT_QUERY_COUNT = 50


@dataclass(frozen=True)
class EpisodeSpec:
    """Parameters of one episode draw."""

    n_way: int
    m_shot: int
    query_count: int = DEFAULT_QUERY_COUNT
    episode_index: int = 0
    base_seed: int = 0
    stratified: bool = False

    def __post_init__(self) -> None:
        if self.n_way < 2:
            raise ValidationError(f"n_way must be >= 2, got {self.n_way}")
        if self.m_shot < 1:
            raise ValidationError(f"m_shot must be >= 1, got {self.m_shot}")
        if self.query_count < 1:
            raise ValidationError(f"query_count must be >= 1, got {self.query_count}")
        if self.episode_index < 0:
            raise ValidationError("episode_index must be non-negative")
        if not 0 <= self.base_seed < (1 << 64):
            raise ValidationError("base_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Episode:
    """One sampled task: support indices per class plus labeled queries.

    Indices reference records of the sampled dataset; for cross-dataset
    episodes, support indices reference the support dataset and query
    indices the query dataset.
    """

    class_ids: tuple
    support_indices: tuple
    query_indices: tuple
    query_labels: tuple
    seed: int
    spec: EpisodeSpec
    cross_dataset: bool = field(default=False)

    def __post_init__(self) -> None:
        spec = self.spec
        if len(self.class_ids) != spec.n_way or len(set(self.class_ids)) != spec.n_way:
            raise ValidationError("episode must carry n_way distinct class ids")
        if len(self.support_indices) != spec.n_way:
            raise ValidationError("one support row per class id is required")
        for row in self.support_indices:
            if len(row) != spec.m_shot or len(set(row)) != spec.m_shot:
                raise ValidationError("each support row needs m_shot distinct indices")
        if len(self.query_indices) != spec.query_count:
            raise ValidationError("query_indices must have length query_count")
        if len(self.query_labels) != spec.query_count:
            raise ValidationError("one label per query index is required")
        chosen = set(self.class_ids)
        if any(label not in chosen for label in self.query_labels):
            raise ValidationError("query labels must be among the episode's class ids")
        if not self.cross_dataset:
            support = {i for row in self.support_indices for i in row}
            overlap = support.intersection(self.query_indices)
            if overlap:
                raise ValidationError(f"support and query sets overlap: {sorted(overlap)[:5]}")


def _class_indices(ds: EmbeddingDataset) -> list:
    labels = ds.labels
    return [np.nonzero(labels == c)[0].tolist() for c in range(len(ds.class_names))]


def _choose_classes(rng, eligible, n_way: int, detail: str) -> list:
    if len(eligible) < n_way:
        raise InfeasibleSpecError(
            f"{n_way}-way episode needs {n_way} eligible classes, found {len(eligible)} ({detail})"
        )
    return sorted(rng.sample(eligible, n_way))


def _max_stratified_q(remaining: list) -> int:
    """Largest total query count the per-class split can satisfy."""

    def feasible(q: int) -> bool:
        base, extra = divmod(q, len(remaining))
        return all(
            r >= base + (1 if rank < extra else 0) for rank, r in enumerate(remaining)
        )

    lo, hi = 0, sum(remaining)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _draw_queries(rng, spec: EpisodeSpec, pools: list) -> list:
    """Sample query indices from per-class pools (ascending class order)."""
    if spec.stratified:
        base, extra = divmod(spec.query_count, len(pools))
        quotas = [base + (1 if rank < extra else 0) for rank in range(len(pools))]
        for rank, (pool, quota) in enumerate(zip(pools, quotas)):
            if len(pool) < quota:
                raise InfeasibleQueryError(
                    f"stratified quota {quota} exceeds the {len(pool)} remaining "
                    f"records of chosen class rank {rank}; maximum feasible "
                    f"query count is {_max_stratified_q([len(p) for p in pools])}"
                )
        chosen = []
        for pool, quota in zip(pools, quotas):
            chosen.extend(rng.sample(pool, quota))
        return sorted(chosen)
    pool = [i for p in pools for i in p]
    if len(pool) < spec.query_count:
        raise InfeasibleQueryError(
            f"query pool holds {len(pool)} records after support removal; "
            f"maximum feasible query count is {len(pool)}"
        )
    return sorted(rng.sample(pool, spec.query_count))


def sample_episode(ds: EmbeddingDataset, spec: EpisodeSpec) -> Episode:
    """Sample one episode from a single dataset.

    Classes, supports, and queries are drawn without replacement in the
    documented order; separate episode indices sample independently.
    """
    if spec.n_way > len(ds.class_names):
        raise InfeasibleSpecError(
            f"n_way={spec.n_way} exceeds the {len(ds.class_names)} dataset classes"
        )
    seed = derive_seed(spec.base_seed, spec.episode_index)
    rng = Xoshiro256StarStar(seed)
    per_class = _class_indices(ds)
    eligible = [c for c, idx in enumerate(per_class) if len(idx) >= spec.m_shot + 1]
    chosen = _choose_classes(
        rng, eligible, spec.n_way, f"need at least m_shot+1={spec.m_shot + 1} records each"
    )
    supports = []
    pools = []
    for c in chosen:
        row = sorted(rng.sample(per_class[c], spec.m_shot))
        supports.append(tuple(row))
        taken = set(row)
        pools.append([i for i in per_class[c] if i not in taken])
    queries = _draw_queries(rng, spec, pools)
    return Episode(
        class_ids=tuple(chosen),
        support_indices=tuple(supports),
        query_indices=tuple(queries),
        query_labels=tuple(int(ds.labels[i]) for i in queries),
        seed=seed,
        spec=spec,
    )


def sample_cross_episode(
    support_ds: EmbeddingDataset, query_ds: EmbeddingDataset, spec: EpisodeSpec
) -> Episode:
    """Sample one episode with supports and queries from different datasets.

    Both datasets must agree on the evaluation class list (remap first).
    Class eligibility looks at the support side only, so classes that the
    query dataset lacks still receive prototypes; their absence simply
    leaves them out of the query pool, and queries misclassified into
    them count as errors.
    """
    if tuple(support_ds.class_names) != tuple(query_ds.class_names):
        only_s = set(support_ds.class_names) - set(query_ds.class_names)
        only_q = set(query_ds.class_names) - set(support_ds.class_names)
        raise ProtocolError(
            "datasets disagree on evaluation classes: "
            f"support-only {sorted(only_s)}, query-only {sorted(only_q)}, "
            "or same names in a different order"
        )
    if spec.n_way > len(support_ds.class_names):
        raise InfeasibleSpecError(
            f"n_way={spec.n_way} exceeds the {len(support_ds.class_names)} shared classes"
        )
    seed = derive_seed(spec.base_seed, spec.episode_index)
    rng = Xoshiro256StarStar(seed)
    support_per_class = _class_indices(support_ds)
    eligible = [c for c, idx in enumerate(support_per_class) if len(idx) >= spec.m_shot]
    chosen = _choose_classes(
        rng, eligible, spec.n_way, f"need at least m_shot={spec.m_shot} support records each"
    )
    supports = []
    for c in chosen:
        supports.append(tuple(sorted(rng.sample(support_per_class[c], spec.m_shot))))
    query_per_class = _class_indices(query_ds)
    pools = [list(query_per_class[c]) for c in chosen]
    queries = _draw_queries(rng, spec, pools)
    return Episode(
        class_ids=tuple(chosen),
        support_indices=tuple(supports),
        query_indices=tuple(queries),
        query_labels=tuple(int(query_ds.labels[i]) for i in queries),
        seed=seed,
        spec=spec,
        cross_dataset=True,
    )
