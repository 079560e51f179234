"""Episode scoring, confusion pooling, grid cells, and report canon."""

import json

import numpy as np
import pytest

from fsbench.errors import (
    InsufficientDataError,
    ProtocolError,
    ValidationError,
)
from fsbench.evaluation import (
    CSV_COLUMNS,
    EpisodeResult,
    aggregate_confusion,
    run_cell,
    run_episode,
    score_predictions,
    summary_csv_row,
    summary_to_json,
)
from fsbench.ops import TransformMode
from fsbench.sampler import EpisodeSpec
from fsbench.stats import t_quantile
from fsbench.synthetic import make_gaussian_clusters

from oracles import ref_confidence_interval, ref_episode_accuracy


def test_score_predictions_counts():
    r = score_predictions(0, (2, 5), [2, 2, 5, 5, 5], [2, 5, 5, 5, 2])
    assert r.accuracy == pytest.approx(3 / 5)
    assert r.per_class == ((2, 1, 2), (5, 2, 3))
    assert np.array_equal(r.confusion, [[1, 1], [1, 2]])


def test_score_predictions_rejects_foreign_labels():
    with pytest.raises(ProtocolError):
        score_predictions(0, (0, 1), [0, 2], [0, 1])
    with pytest.raises(ProtocolError):
        score_predictions(0, (0, 1), [0, 1], [0, 9])


def test_score_predictions_length_mismatch():
    with pytest.raises(ValidationError):
        score_predictions(0, (0, 1), [0, 1, 0], [0, 1])


def test_episode_result_invariants():
    with pytest.raises(ValidationError):
        EpisodeResult(
            episode_index=0,
            class_ids=(0, 1),
            accuracy=0.9,  # trace says 0.5
            per_class=((0, 1, 2), (1, 1, 2)),
            confusion=np.array([[1, 1], [1, 1]]),
        )


def test_run_episode_accuracy_matches_reference():
    ds = make_gaussian_clusters(4, 25, 8, separation_sigmas=1.0, seed=3)
    for mode in TransformMode:
        spec = EpisodeSpec(n_way=3, m_shot=4, query_count=20, episode_index=5, base_seed=11)
        episode, result = run_episode(ds, ds, spec, mode)
        support = {
            cid: ds.vectors[list(idx)].astype(float).tolist()
            for cid, idx in zip(episode.class_ids, episode.support_indices)
        }
        queries = [ds.vectors[i].astype(float).tolist() for i in episode.query_indices]
        expected = ref_episode_accuracy(support, queries, episode.query_labels, mode.value)
        assert result.accuracy == pytest.approx(expected, abs=1e-12)


def test_aggregate_same_class_tuple():
    a = score_predictions(0, (1, 3), [1, 3, 3], [1, 3, 1])
    b = score_predictions(1, (1, 3), [1, 1, 3], [1, 1, 3])
    agg = aggregate_confusion([a, b])
    assert agg.class_ids == (1, 3)
    assert np.array_equal(agg.matrix, a.confusion + b.confusion)
    assert agg.contributing == {1: 2, 3: 2}
    assert agg.per_class_mean[1] == pytest.approx(1.0)
    assert agg.per_class_mean[3] == pytest.approx(0.75)


def test_aggregate_differing_classes_needs_universe():
    a = score_predictions(0, (0, 1), [0, 1], [0, 1])
    b = score_predictions(1, (1, 2), [1, 2], [1, 2])
    with pytest.raises(ProtocolError, match="universe"):
        aggregate_confusion([a, b])
    agg = aggregate_confusion([a, b], class_ids=(0, 1, 2))
    assert agg.matrix.shape == (3, 3)
    assert np.array_equal(np.diag(agg.matrix), [1, 2, 1])
    assert agg.contributing == {0: 1, 1: 2, 2: 1}
    # single-episode classes report a mean but no interval
    assert 0 in agg.per_class_mean and 0 not in agg.per_class
    assert 1 in agg.per_class


def test_aggregate_rejects_foreign_ids_and_empties():
    a = score_predictions(0, (0, 5), [0, 5], [0, 5])
    with pytest.raises(ProtocolError):
        aggregate_confusion([a], class_ids=(0, 1))
    with pytest.raises(InsufficientDataError):
        aggregate_confusion([])


def test_run_cell_summary_contents():
    ds = make_gaussian_clusters(5, 30, 16, separation_sigmas=2.0, seed=1)
    s = run_cell(ds, n_way=3, m_shot=5, episodes=12, query_count=15, base_seed=6)
    assert s.support_dataset == "synthetic"
    assert s.query_dataset is None
    assert s.n_way == 3 and s.m_shot == 5
    assert s.episodes == 12 and len(s.episode_accuracies) == 12
    assert s.transform is TransformMode.L2N  # default
    assert s.confusion.shape == (5, 5)
    assert int(s.confusion.sum()) == 12 * 15
    assert set(s.per_class_episodes) <= set(s.class_names)
    assert 0.0 <= s.accuracy.mean <= 1.0
    assert s.duration_s >= 0.0


def test_run_cell_interval_matches_reference():
    ds = make_gaussian_clusters(4, 25, 8, separation_sigmas=0.9, seed=2)
    s = run_cell(ds, n_way=4, m_shot=1, episodes=20, query_count=10, base_seed=3)
    mean, half, sd = ref_confidence_interval(
        list(s.episode_accuracies), t_value=t_quantile(19, 0.975)
    )
    assert s.accuracy.mean == pytest.approx(mean, abs=1e-14)
    assert s.accuracy.half_width == pytest.approx(half, abs=1e-12)
    assert s.accuracy.stdev == pytest.approx(sd, abs=1e-14)


def test_run_cell_is_deterministic():
    ds = make_gaussian_clusters(4, 20, 8, separation_sigmas=1.0, seed=5)
    a = run_cell(ds, n_way=2, m_shot=3, episodes=8, query_count=10, base_seed=1)
    b = run_cell(ds, n_way=2, m_shot=3, episodes=8, query_count=10, base_seed=1)
    assert a.episode_accuracies == b.episode_accuracies
    assert np.array_equal(a.confusion, b.confusion)


def test_run_cell_seed_sensitivity():
    ds = make_gaussian_clusters(6, 30, 12, separation_sigmas=0.5, seed=5)
    a = run_cell(ds, n_way=3, m_shot=1, episodes=10, query_count=10, base_seed=1)
    b = run_cell(ds, n_way=3, m_shot=1, episodes=10, query_count=10, base_seed=2)
    assert a.episode_accuracies != b.episode_accuracies


def test_run_cell_needs_two_episodes():
    ds = make_gaussian_clusters(3, 20, 8, seed=0)
    with pytest.raises(InsufficientDataError):
        run_cell(ds, n_way=2, m_shot=1, episodes=1)


def test_run_cell_failure_names_episode():
    ds = make_gaussian_clusters(3, 6, 8, seed=0)
    with pytest.raises(ProtocolError, match="episode 0"):
        run_cell(ds, n_way=3, m_shot=5, episodes=2, query_count=50)


def test_run_cell_cross_pair_and_backbone_guard():
    a = make_gaussian_clusters(3, 20, 8, seed=1, dataset_name="a", backbone_name="x")
    b = make_gaussian_clusters(3, 20, 8, seed=2, dataset_name="b", backbone_name="y")
    with pytest.raises(ProtocolError, match="backbone"):
        run_cell((a, b), n_way=2, m_shot=3, episodes=4, query_count=8)
    b2 = make_gaussian_clusters(3, 20, 8, seed=2, dataset_name="b", backbone_name="x")
    s = run_cell((a, b2), n_way=2, m_shot=3, episodes=4, query_count=8)
    assert s.support_dataset == "a"
    assert s.query_dataset == "b"


# ---------------------------------------------------------------------------
# serialization canon


def make_summary():
    ds = make_gaussian_clusters(3, 20, 8, separation_sigmas=1.2, seed=9)
    return run_cell(ds, n_way=2, m_shot=2, episodes=6, query_count=9, base_seed=4)


def test_json_is_byte_stable_and_excludes_duration():
    s1 = make_summary()
    s2 = make_summary()
    assert s1.duration_s != s2.duration_s or True  # wall clock may differ
    j1 = summary_to_json(s1, config_hash="h")
    j2 = summary_to_json(s2, config_hash="h")
    assert j1 == j2
    assert "duration" not in j1


def test_json_key_order_fixed():
    doc = summary_to_json(make_summary(), config_hash="abc")
    parsed = json.loads(doc)
    assert list(parsed) == [
        "report",
        "version",
        "config_hash",
        "base_seed",
        "cell",
        "accuracy",
        "class_names",
        "confusion",
        "per_class",
        "episode_accuracies",
    ]
    assert parsed["report"] == "run_summary"
    assert parsed["config_hash"] == "abc"
    cell = parsed["cell"]
    assert list(cell) == [
        "support_dataset",
        "query_dataset",
        "backbone",
        "n_way",
        "m_shot",
        "query_count",
        "episodes",
        "transform",
        "stratified",
    ]


def test_json_fixed_decimals_match_floats():
    parsed = json.loads(summary_to_json(make_summary()))
    acc = parsed["accuracy"]
    assert acc["mean_fixed"] == f"{acc['mean']:.6f}"
    assert acc["half_width_fixed"] == f"{acc['half_width']:.6f}"
    for entry in parsed["per_class"].values():
        if entry["mean"] is not None:
            assert entry["mean_fixed"] == f"{entry['mean']:.6f}"
        else:
            assert entry["mean_fixed"] is None


def test_json_confusion_matches_summary():
    s = make_summary()
    parsed = json.loads(summary_to_json(s))
    assert parsed["confusion"] == [[int(v) for v in row] for row in s.confusion]
    assert parsed["class_names"] == list(s.class_names)
    assert len(parsed["episode_accuracies"]) == s.episodes


def test_csv_row_matches_columns():
    s = make_summary()
    row = summary_csv_row(s, protocol="p", config_hash="h")
    assert tuple(row) == CSV_COLUMNS
    assert row["protocol"] == "p"
    assert row["mean"] == f"{s.accuracy.mean:.6f}"
    assert row["transform"] == "l2n"
    assert row["query_dataset"] == ""
