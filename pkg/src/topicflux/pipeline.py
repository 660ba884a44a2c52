"""Stage orchestration: prepare, tune, and fit as file-to-file steps.

Every stage reads files and writes files; nothing passes through implicit
state, so stages can be rerun or resumed independently. All randomness
flows from the single `seed` config key.
"""

from __future__ import annotations

import dataclasses
import json
import os
from datetime import date

import numpy as np

from . import dynamics, represent, stats
from .cluster import DensityParams, density_cluster
from .config import RunConfig
from .embedstore import align, load_embeddings
from .ingest import (
    CleanCorpus,
    parse_metadata,
    prepare_corpus,
    profile_corpus,
    read_corpus_jsonl,
    write_corpus_jsonl,
)
from .persistence import TopicModel, save_model
from .reduce import pca_fit, pca_transform
from .tune import grid_search, trials_to_csv

DEFAULT_REQUIRED = ["record_id", "dup_group_key", "title", "abstract_text", "publish_date"]

CORPUS_FILE = "corpus.jsonl"
PROVENANCE_FILE = "provenance.json"
PROFILE_FILE = "profile.json"


def run_prepare(config: RunConfig, out_dir) -> CleanCorpus:
    """Parse, filter, deduplicate; write corpus + provenance + profile."""
    path = config.require("corpus.path")
    fmt = config.get("corpus.format", "csv")
    schema = config.schema()
    window = config.window()
    required = set(config.get("filter.required", DEFAULT_REQUIRED))
    language = config.get("filter.language", "en")

    parsed = parse_metadata(path, schema, fmt)
    raw_profile = profile_corpus(parsed.records)
    corpus = prepare_corpus(
        parsed.records,
        required_fields=required,
        window=window,
        language=language,
        parse_skipped=len(parsed.skipped),
    )

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, CORPUS_FILE), "w", encoding="utf-8") as f:
        write_corpus_jsonl(corpus, f)
    with open(os.path.join(out_dir, PROVENANCE_FILE), "w", encoding="utf-8") as f:
        json.dump(
            {
                "raw_records": len(parsed.records) + len(parsed.skipped),
                "retained": len(corpus.records),
                "dropped": corpus.provenance,
                "window": [window[0].isoformat(), window[1].isoformat()],
            },
            f,
            indent=2,
            sort_keys=True,
        )
    with open(os.path.join(out_dir, PROFILE_FILE), "w", encoding="utf-8") as f:
        json.dump(dataclasses.asdict(raw_profile), f, indent=2, sort_keys=True)
    return corpus


def load_prepared_corpus(corpus_dir, window: tuple[date, date]) -> CleanCorpus:
    path = os.path.join(corpus_dir, CORPUS_FILE)
    with open(path, "r", encoding="utf-8") as f:
        return read_corpus_jsonl(f, window=window)


def run_tune(config: RunConfig, corpus_dir, emb_path, trials_csv_path) -> dict:
    """Grid search on the aligned embeddings; write the trial table."""
    grid = {
        k: list(v)
        for k, v in config.require("grid").items()
        if k not in ("subsample_fraction",)
    }
    fraction = float(config.get("grid.subsample_fraction", 0.25))
    seed = int(config.get("seed", 0))

    corpus = load_prepared_corpus(corpus_dir, config.window())
    emb = load_embeddings(emb_path, config.get("embeddings.format", "binary"))
    _, emb, _ = align(corpus, emb)

    workers = int(config.get("tune.workers", 1))
    best, results = grid_search(emb, grid, fraction, seed, workers=workers)
    with open(trials_csv_path, "w", encoding="utf-8") as f:
        f.write(trials_to_csv(results))
    return {
        "best_params": best.params,
        "best_dbcv": best.dbcv,
        "best_seed": best.seed,
        "trials": len(results),
    }


def run_fit(config: RunConfig, corpus_dir, emb_path, model_dir, force: bool = False) -> TopicModel:
    """Reduce, cluster, represent, bin; save the full model artifact."""
    window = config.window()
    corpus = load_prepared_corpus(corpus_dir, window)
    emb = load_embeddings(emb_path, config.get("embeddings.format", "binary"))
    corpus, emb, _ = align(corpus, emb)

    X = emb.vectors.astype(np.float64)
    reduce_k = int(config.get("reduce.k", 50))
    reduce_k = min(reduce_k, min(X.shape))
    projection = pca_fit(X, reduce_k)
    reduced = pca_transform(projection, X)

    params = DensityParams(
        min_cluster_size=int(config.require("cluster.min_cluster_size")),
        min_samples=int(config.require("cluster.min_samples")),
        metric=str(config.get("cluster.metric", "euclidean")),
        selection=str(config.get("cluster.selection", "leaf")),
    )
    tree, assignment = density_cluster(reduced, params)

    texts = [r.abstract_text for r in corpus.records]
    vocab, counts = represent.build_class_counts(texts, assignment.labels)
    class_sizes = assignment.sizes()
    tfidf = represent.class_tfidf(
        vocab,
        counts,
        class_sizes,
        reduce_frequent_words=bool(config.get("represent.reduce_frequent_words", True)),
    )

    dates = [r.publish_date.value for r in corpus.records]
    series = {}
    for width in dynamics.BIN_WIDTHS:
        bins = dynamics.assign_bins(dates, width, origin=window[0])
        series[width] = dynamics.build_series(
            assignment.labels, bins, width, origin=window[0], window_end=window[1]
        )

    overlays = dynamics.load_overlays(
        cases_path=config.get("overlays.cases"),
        events_path=config.get("overlays.events"),
    )

    # embedding-space topic centroids back the vector search path
    centroids = np.zeros((assignment.n_clusters, X.shape[1]))
    for topic in range(assignment.n_clusters):
        centroids[topic] = X[assignment.labels == topic].mean(axis=0)

    model = TopicModel(
        projection=projection,
        labels=assignment.labels,
        tree=tree,
        tfidf=tfidf,
        series=series,
        overlays=overlays,
        window=window,
        topic_centroids=centroids,
        config_hash=config.config_hash(),
    )
    save_model(model, model_dir, force=force)
    return model


def run_window_test(
    model: TopicModel,
    topic_id: int,
    window1: tuple[date, date],
    window2: tuple[date, date],
    bin_weeks: int,
    alpha: float = stats.DEFAULT_ALPHA,
) -> stats.KruskalWallisResult:
    if bin_weeks not in model.series:
        raise stats.StatsError(f"model has no {bin_weeks}-week series")
    return stats.test_topic_windows(model.series[bin_weeks], topic_id, window1, window2, alpha)
