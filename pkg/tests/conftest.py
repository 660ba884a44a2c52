import numpy as np
import pytest

import _synth
from topicflux.config import RunConfig
from topicflux.persistence import load_model
from topicflux.pipeline import run_fit, run_prepare


def adjusted_rand(a, b) -> float:
    """Contingency-table ARI; outlier labels count as their own class."""
    a = np.asarray(a)
    b = np.asarray(b)
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ua.size, ub.size), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def c2(x):
        return x * (x - 1) / 2.0

    sum_ij = c2(table).sum()
    sum_a = c2(table.sum(axis=1)).sum()
    sum_b = c2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / c2(a.size)
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


def gaussian_blobs(centers, sizes, sigma, seed):
    rng = np.random.default_rng(seed)
    points = [rng.normal(c, sigma, (n, len(centers[0]))) for c, n in zip(centers, sizes)]
    labels = np.repeat(np.arange(len(centers)), sizes)
    return np.vstack(points), labels


@pytest.fixture
def two_blobs():
    X, labels = gaussian_blobs([(0, 0), (9, 9)], [150, 170], 0.5, seed=11)
    return X, labels


@pytest.fixture(scope="session")
def model_bundle(tmp_path_factory):
    """A small fitted model shared by persistence/service/CLI tests.

    600 documents over 10 planted topics; cluster-size floor lowered to
    match the per-topic document counts.
    """
    root = tmp_path_factory.mktemp("model_bundle")
    data_dir = root / "data"
    paths = _synth.generate(data_dir, n_docs=600, seed=99)
    config_path = root / "config.toml"
    config_path.write_text(_synth.config_toml(paths, min_cluster_size=25, reduce_k=20))
    config = RunConfig.load(config_path)

    corpus_dir = root / "prepared"
    run_prepare(config, corpus_dir)
    model_dir = root / "model"
    fitted = run_fit(config, corpus_dir, paths["embeddings"], model_dir)
    return {
        "model": fitted,
        "loaded": load_model(model_dir),
        "model_dir": model_dir,
        "corpus_dir": corpus_dir,
        "config": config,
        "config_path": config_path,
        "paths": paths,
        "root": root,
    }
