import numpy as np
import pytest

from conftest import gaussian_blobs
from topicflux.embedstore import EmbeddingMatrix
from topicflux.tune import TuneError, enumerate_grid, grid_search, run_trial, trials_to_csv


def blob_embeddings(seed=0, per=200, k=3):
    centers = [(0, 0, 0), (15, 15, 0), (0, 15, 15)][:k]
    X, _ = gaussian_blobs(centers, [per] * k, 0.6, seed=seed)
    ids = [f"r{i}" for i in range(len(X))]
    return EmbeddingMatrix(ids, X.astype(np.float32))


def test_enumerate_grid_lexicographic():
    combos = enumerate_grid({"min_samples": [5, 10], "min_cluster_size": [20, 30]})
    # keys sorted: min_cluster_size before min_samples
    assert combos == [
        {"min_cluster_size": 20, "min_samples": 5},
        {"min_cluster_size": 20, "min_samples": 10},
        {"min_cluster_size": 30, "min_samples": 5},
        {"min_cluster_size": 30, "min_samples": 10},
    ]


def test_enumerate_grid_rejects_unknown_keys():
    with pytest.raises(TuneError):
        enumerate_grid({"bogus": [1]})


def test_grid_search_single_combination():
    emb = blob_embeddings()
    grid = {"min_cluster_size": [50], "min_samples": [10]}
    best, results = grid_search(emb, grid, subsample_fraction=1.0, base_seed=1)
    assert len(results) == 1
    assert best.params == {"min_cluster_size": 50, "min_samples": 10}
    assert best.defined and -1 <= best.dbcv <= 1


def test_grid_search_planted_blobs_prefer_feasible_size():
    emb = blob_embeddings()
    grid = {"min_cluster_size": [5, 500], "min_samples": [5]}
    best, results = grid_search(emb, grid, subsample_fraction=1.0, base_seed=0)
    assert best.params["min_cluster_size"] == 5
    undefined = [r for r in results if not r.defined]
    assert len(undefined) == 1  # 500 forces all-outliers, undefined DBCV
    assert undefined[0].params["min_cluster_size"] == 500


def test_grid_search_reported_optimum_shape_expressible():
    grid = {
        "min_cluster_size": [100],
        "min_samples": [10],
        "selection": ["leaf"],
        "metric": ["euclidean"],
        "reduce_k": [50],
    }
    combos = enumerate_grid(grid)
    assert combos == [
        {
            "metric": "euclidean",
            "min_cluster_size": 100,
            "min_samples": 10,
            "reduce_k": 50,
            "selection": "leaf",
        }
    ]


def test_grid_search_reproducible_and_best_dominates():
    emb = blob_embeddings(seed=3)
    grid = {"min_cluster_size": [30, 60], "min_samples": [5, 10]}
    best1, res1 = grid_search(emb, grid, subsample_fraction=0.5, base_seed=9)
    best2, res2 = grid_search(emb, grid, subsample_fraction=0.5, base_seed=9)
    assert best1.params == best2.params
    assert [r.dbcv for r in res1] == [r.dbcv for r in res2]
    for r in res1:
        if r.defined:
            assert best1.dbcv >= r.dbcv
    # per-trial seeds are trial-indexed
    assert [r.seed for r in res1] == [9, 10, 11, 12]


def test_grid_search_parallel_equals_serial():
    emb = blob_embeddings(seed=4, per=120)
    grid = {"min_cluster_size": [20, 40], "min_samples": [5]}
    _, serial = grid_search(emb, grid, subsample_fraction=0.5, base_seed=2, workers=1)
    _, parallel = grid_search(emb, grid, subsample_fraction=0.5, base_seed=2, workers=4)
    assert [(r.trial, r.dbcv, r.cluster_count) for r in serial] == [
        (r.trial, r.dbcv, r.cluster_count) for r in parallel
    ]


def test_grid_search_all_undefined_error():
    emb = blob_embeddings(per=30)
    grid = {"min_cluster_size": [5000], "min_samples": [5]}
    with pytest.raises(TuneError, match="no valid configuration"):
        grid_search(emb, grid, subsample_fraction=1.0, base_seed=0)


def test_invalid_param_combo_becomes_undefined_trial():
    emb = blob_embeddings(per=60)
    result = run_trial(
        emb, {"min_cluster_size": 5, "min_samples": 50}, fraction=1.0, seed=0, trial=0
    )
    assert not result.defined
    assert "invalid params" in result.note


def test_trials_csv_layout():
    emb = blob_embeddings(per=60)
    _, results = grid_search(
        emb, {"min_cluster_size": [20], "min_samples": [5]}, subsample_fraction=1.0, base_seed=0
    )
    text = trials_to_csv(results)
    lines = text.strip().split("\n")
    assert lines[0] == "trial,min_cluster_size,min_samples,dbcv,clusters,outlier_fraction,seed,ms"
    assert len(lines) == 2
    assert lines[1].startswith("0,20,5,")
