"""Episode execution, accuracy aggregation, and report serialization.

A grid cell runs a fixed number of episodes, reports the mean episode
accuracy with a Student-t interval, and pools per-episode confusion
matrices. Serialization is canonical: fixed key order, fixed float
formatting where formatting applies, and no wall-clock content, so two
runs with the same inputs produce byte-identical reports.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import FsbenchError, InsufficientDataError, ProtocolError, ValidationError
from .ops import TransformMode
from .sampler import Episode, EpisodeSpec, sample_cross_episode, sample_episode
from .simpleshot import classify_batch, compute_prototypes
from .stats import ConfidenceInterval, mean_confidence_interval
from .store import EmbeddingDataset
from .version import __version__


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    """Accuracy and confusion counts for one evaluated episode."""

    episode_index: int
    class_ids: tuple
    accuracy: float
    per_class: tuple  # (class_id, correct, total) per episode class
    confusion: np.ndarray  # rows = true class, columns = predicted

    def __post_init__(self) -> None:
        n = len(self.class_ids)
        conf = np.asarray(self.confusion, dtype=np.int64)
        if conf.shape != (n, n):
            raise ValidationError("confusion matrix must be N x N for N class ids")
        total = int(conf.sum())
        if total <= 0:
            raise ValidationError("an episode result needs at least one query")
        if abs(self.accuracy - np.trace(conf) / total) > 1e-12:
            raise ValidationError("accuracy must equal trace(confusion)/sum(confusion)")
        if sum(t for _, _, t in self.per_class) != total:
            raise ValidationError("per-class totals must sum to the query count")
        object.__setattr__(self, "confusion", conf)


def score_predictions(
    episode_index: int,
    class_ids: Sequence[int],
    true_labels: Sequence[int],
    predicted_labels: Sequence[int],
) -> EpisodeResult:
    """Fold per-query outcomes into an EpisodeResult."""
    ids = tuple(class_ids)
    pos = {c: i for i, c in enumerate(ids)}
    if len(true_labels) != len(predicted_labels):
        raise ValidationError("one prediction per true label is required")
    conf = np.zeros((len(ids), len(ids)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        if t not in pos or p not in pos:
            raise ProtocolError(f"label outside the episode's classes: true={t}, predicted={p}")
        conf[pos[t], pos[p]] += 1
    total = int(conf.sum())
    per_class = tuple(
        (c, int(conf[i, i]), int(conf[i].sum())) for i, c in enumerate(ids)
    )
    return EpisodeResult(
        episode_index=episode_index,
        class_ids=ids,
        accuracy=float(np.trace(conf)) / total,
        per_class=per_class,
        confusion=conf,
    )


def run_episode(
    support_ds: EmbeddingDataset,
    query_ds: EmbeddingDataset,
    spec: EpisodeSpec,
    mode: TransformMode,
) -> Tuple[Episode, EpisodeResult]:
    """Sample and evaluate a single episode."""
    if support_ds is query_ds:
        episode = sample_episode(support_ds, spec)
    else:
        episode = sample_cross_episode(support_ds, query_ds, spec)
    support_vectors = {
        c: support_ds.vectors[list(idx)].astype(np.float64)
        for c, idx in zip(episode.class_ids, episode.support_indices)
    }
    protos = compute_prototypes(support_vectors, mode)
    queries = query_ds.vectors[list(episode.query_indices)].astype(np.float64)
    predictions = classify_batch(queries, protos, mode)
    result = score_predictions(
        spec.episode_index,
        episode.class_ids,
        episode.query_labels,
        [p.class_id for p in predictions],
    )
    return episode, result


@dataclass(frozen=True, eq=False)
class AggregateConfusion:
    """Pooled confusion counts plus per-class accuracy statistics."""

    class_ids: tuple
    matrix: np.ndarray
    per_class: Mapping[int, ConfidenceInterval]
    per_class_mean: Mapping[int, float]
    contributing: Mapping[int, int]


def aggregate_confusion(
    results: Sequence[EpisodeResult], class_ids: Optional[Sequence[int]] = None
) -> AggregateConfusion:
    """Sum episode confusions and summarize per-class accuracies.

    Without ``class_ids`` every episode must share an identical class-id
    tuple (the pooled matrix keeps that shape). Passing ``class_ids``
    pools over that fixed universe instead, embedding each episode's
    matrix, which covers runs whose episodes draw different class
    subsets. A class contributes to its own accuracy series only in
    episodes where it received at least one query; classes with fewer
    than two contributing episodes report a mean but no interval.
    """
    if not results:
        raise InsufficientDataError("no episode results to aggregate")
    if class_ids is None:
        first = results[0].class_ids
        for r in results[1:]:
            if r.class_ids != first:
                raise ProtocolError(
                    "episodes disagree on class ids; pass class_ids to pool "
                    "over a fixed universe"
                )
        universe = first
    else:
        universe = tuple(class_ids)
        if len(set(universe)) != len(universe):
            raise ProtocolError("class universe must not repeat ids")
    pos = {c: i for i, c in enumerate(universe)}
    pooled = np.zeros((len(universe), len(universe)), dtype=np.int64)
    series: dict = {c: [] for c in universe}
    for r in results:
        for c in r.class_ids:
            if c not in pos:
                raise ProtocolError(f"episode class id {c} outside the class universe")
        idx = [pos[c] for c in r.class_ids]
        pooled[np.ix_(idx, idx)] += r.confusion
        for c, correct, total in r.per_class:
            if total > 0:
                series[c].append(correct / total)
    per_class = {}
    per_class_mean = {}
    contributing = {}
    for c in universe:
        vals = series[c]
        contributing[c] = len(vals)
        if vals:
            per_class_mean[c] = statistics.fmean(vals)
        if len(vals) >= 2:
            per_class[c] = mean_confidence_interval(vals)
    return AggregateConfusion(
        class_ids=universe,
        matrix=pooled,
        per_class=per_class,
        per_class_mean=per_class_mean,
        contributing=contributing,
    )


@dataclass(frozen=True, eq=False)
class RunSummary:
    """Aggregated outcome of one grid cell."""

    support_dataset: str
    query_dataset: Optional[str]
    backbone: str
    n_way: int
    m_shot: int
    query_count: int
    episodes: int
    transform: TransformMode
    base_seed: int
    stratified: bool
    accuracy: ConfidenceInterval
    episode_accuracies: tuple
    class_names: tuple
    confusion: np.ndarray
    per_class: Mapping[str, ConfidenceInterval]
    per_class_mean: Mapping[str, float]
    per_class_episodes: Mapping[str, int]
    duration_s: float = field(compare=False)

    @property
    def display(self) -> str:
        return self.accuracy.display()


DataArg = Union[EmbeddingDataset, Tuple[EmbeddingDataset, EmbeddingDataset]]


def run_cell(
    data: DataArg,
    *,
    n_way: int,
    m_shot: int,
    mode: TransformMode = TransformMode.L2N,
    base_seed: int = 0,
    episodes: int = 100,
    query_count: int = 50,
    stratified: bool = False,
) -> RunSummary:
    """Run one grid cell: ``episodes`` episodes of an N-way/M-shot task.

    ``data`` is a single dataset, or a (support, query) pair for
    cross-dataset evaluation. Episode indices run 0..episodes-1; the
    whole cell is deterministic given the datasets and base_seed. Any
    episode failure aborts the cell with the episode index attached.
    """
    if isinstance(data, EmbeddingDataset):
        support_ds = query_ds = data
    else:
        support_ds, query_ds = data
    if support_ds is not query_ds and support_ds.backbone_name != query_ds.backbone_name:
        raise ProtocolError(
            f"backbone mismatch: {support_ds.backbone_name!r} vs {query_ds.backbone_name!r}"
        )
    if episodes < 2:
        raise InsufficientDataError("a cell needs at least 2 episodes for an interval")
    started = time.monotonic()
    results = []
    for i in range(episodes):
        spec = EpisodeSpec(
            n_way=n_way,
            m_shot=m_shot,
            query_count=query_count,
            episode_index=i,
            base_seed=base_seed,
            stratified=stratified,
        )
        try:
            _, result = run_episode(support_ds, query_ds, spec, mode)
        except FsbenchError as exc:
            raise type(exc)(f"episode {i}: {exc}") from exc
        results.append(result)
    universe = tuple(range(len(support_ds.class_names)))
    agg = aggregate_confusion(results, class_ids=universe)
    ci = mean_confidence_interval([r.accuracy for r in results], level=0.95)
    names = support_ds.class_names
    return RunSummary(
        support_dataset=support_ds.dataset_name,
        query_dataset=None if support_ds is query_ds else query_ds.dataset_name,
        backbone=support_ds.backbone_name,
        n_way=n_way,
        m_shot=m_shot,
        query_count=query_count,
        episodes=episodes,
        transform=mode,
        base_seed=base_seed,
        stratified=stratified,
        accuracy=ci,
        episode_accuracies=tuple(r.accuracy for r in results),
        class_names=tuple(names),
        confusion=agg.matrix,
        per_class={names[c]: iv for c, iv in agg.per_class.items()},
        per_class_mean={names[c]: m for c, m in agg.per_class_mean.items()},
        per_class_episodes={names[c]: n for c, n in agg.contributing.items()},
        duration_s=time.monotonic() - started,
    )


def _interval_doc(ci: ConfidenceInterval) -> dict:
    return {
        "mean": ci.mean,
        "mean_fixed": f"{ci.mean:.6f}",
        "half_width": ci.half_width,
        "half_width_fixed": f"{ci.half_width:.6f}",
        "stdev": ci.stdev,
        "level": ci.level,
        "n": ci.n,
        "display": ci.display(),
    }


def summary_to_json(
    summary: RunSummary, *, config_hash: str = "", version: str = __version__
) -> str:
    """Canonical JSON report for one cell.

    Key order, float formatting, and content are all fixed; wall-clock
    duration is deliberately excluded so reruns are byte-identical.
    """
    per_class = {}
    for name in summary.class_names:
        entry: dict = {"episodes": summary.per_class_episodes.get(name, 0)}
        if name in summary.per_class_mean:
            entry["mean"] = summary.per_class_mean[name]
            entry["mean_fixed"] = f"{summary.per_class_mean[name]:.6f}"
        else:
            entry["mean"] = None
            entry["mean_fixed"] = None
        if name in summary.per_class:
            iv = summary.per_class[name]
            entry["half_width"] = iv.half_width
            entry["half_width_fixed"] = f"{iv.half_width:.6f}"
        else:
            entry["half_width"] = None
            entry["half_width_fixed"] = None
        per_class[name] = entry
    doc = {
        "report": "run_summary",
        "version": version,
        "config_hash": config_hash,
        "base_seed": summary.base_seed,
        "cell": {
            "support_dataset": summary.support_dataset,
            "query_dataset": summary.query_dataset,
            "backbone": summary.backbone,
            "n_way": summary.n_way,
            "m_shot": summary.m_shot,
            "query_count": summary.query_count,
            "episodes": summary.episodes,
            "transform": summary.transform.value,
            "stratified": summary.stratified,
        },
        "accuracy": _interval_doc(summary.accuracy),
        "class_names": list(summary.class_names),
        "confusion": [[int(v) for v in row] for row in summary.confusion],
        "per_class": per_class,
        "episode_accuracies": list(summary.episode_accuracies),
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


CSV_COLUMNS = (
    "protocol",
    "support_dataset",
    "query_dataset",
    "backbone",
    "n_way",
    "m_shot",
    "query_count",
    "episodes",
    "transform",
    "stratified",
    "base_seed",
    "mean",
    "half_width",
    "stdev",
    "level",
    "display",
    "version",
    "config_hash",
)


def summary_csv_row(
    summary: RunSummary,
    *,
    protocol: str = "",
    config_hash: str = "",
    version: str = __version__,
) -> dict:
    """One combined-CSV row for a cell, keyed by CSV_COLUMNS."""
    ci = summary.accuracy
    return {
        "protocol": protocol,
        "support_dataset": summary.support_dataset,
        "query_dataset": summary.query_dataset or "",
        "backbone": summary.backbone,
        "n_way": summary.n_way,
        "m_shot": summary.m_shot,
        "query_count": summary.query_count,
        "episodes": summary.episodes,
        "transform": summary.transform.value,
        "stratified": summary.stratified,
        "base_seed": summary.base_seed,
        "mean": f"{ci.mean:.6f}",
        "half_width": f"{ci.half_width:.6f}",
        "stdev": f"{ci.stdev:.6f}",
        "level": ci.level,
        "display": ci.display(),
        "version": version,
        "config_hash": config_hash,
    }
