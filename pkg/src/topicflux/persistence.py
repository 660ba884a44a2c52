"""Versioned on-disk model artifact: a directory of raw blobs + manifest.

Arrays are raw little-endian files described (dtype, shape, byte length)
by `manifest.json`, written last inside a temp directory that is renamed
into place, so a reader never observes a half-written artifact. Floats go
to disk as float32; computation stays float64. See FORMAT.md.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .cluster import CondensedTree
from .dynamics import OverlaySeries, TopicTimeSeries
from .reduce import Projection
from .represent import ClassTfIdfModel, SparseRows, Vocabulary
from .stopwords import stopwords_hash

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"

_DTYPES = {"<f4": np.dtype("<f4"), "<i4": np.dtype("<i4"), "<i8": np.dtype("<i8"), "u1": np.dtype("u1")}


class PersistenceError(Exception):
    pass


@dataclass
class TopicModel:
    """Every fitted stage of a run, bundled for query serving."""

    projection: Projection
    labels: np.ndarray
    tree: CondensedTree
    tfidf: ClassTfIdfModel
    series: dict[int, TopicTimeSeries]  # bin width -> series
    overlays: OverlaySeries
    window: tuple[date, date]
    topic_centroids: np.ndarray | None = None  # (C, d) mean embedding per topic
    config_hash: str = ""
    stopword_hash: str = field(default_factory=stopwords_hash)

    @property
    def n_documents(self) -> int:
        return int(self.labels.size)

    @property
    def n_topics(self) -> int:
        return int(self.tfidf.weights.n_rows)

    @property
    def vocabulary_size(self) -> int:
        return len(self.tfidf.vocabulary)


def _write_blob(tmp: str, name: str, array: np.ndarray, dtype: str) -> dict:
    data = np.ascontiguousarray(array, dtype=_DTYPES[dtype])
    path = os.path.join(tmp, name)
    with open(path, "wb") as f:
        f.write(data.tobytes())
    return {"file": name, "dtype": dtype, "shape": list(array.shape), "bytes": data.nbytes}


def save_model(model: TopicModel, out_dir, force: bool = False) -> dict:
    """Write the artifact atomically; returns the manifest written."""
    out_dir = os.fspath(out_dir)
    if os.path.exists(out_dir):
        if not force:
            raise PersistenceError(
                f"{out_dir} already exists (possibly a partial artifact); pass force to replace"
            )
        shutil.rmtree(out_dir)

    parent = os.path.dirname(os.path.abspath(out_dir)) or "."
    tmp = tempfile.mkdtemp(prefix=".model-partial-", dir=parent)
    try:
        blobs: dict[str, dict] = {}
        blobs["projection_mean"] = _write_blob(tmp, "projection_mean.f32", model.projection.mean, "<f4")
        blobs["projection_basis"] = _write_blob(tmp, "projection_basis.f32", model.projection.basis, "<f4")
        blobs["projection_evr"] = _write_blob(
            tmp, "projection_evr.f32", model.projection.explained_variance_ratio, "<f4"
        )
        blobs["labels"] = _write_blob(tmp, "labels.i32", model.labels, "<i4")

        tree = model.tree
        flags = tree.is_leaf.astype(np.uint8) | (tree.selected.astype(np.uint8) << 1)
        blobs["tree_parent"] = _write_blob(tmp, "tree_parent.i32", tree.parent, "<i4")
        blobs["tree_birth"] = _write_blob(tmp, "tree_birth.f32", tree.birth_lambda, "<f4")
        blobs["tree_death"] = _write_blob(tmp, "tree_death.f32", tree.death_lambda, "<f4")
        blobs["tree_size"] = _write_blob(tmp, "tree_size.i64", tree.size, "<i8")
        blobs["tree_stability"] = _write_blob(tmp, "tree_stability.f32", tree.stability, "<f4")
        blobs["tree_flags"] = _write_blob(tmp, "tree_flags.u8", flags, "u1")

        blobs["vocab_frequency"] = _write_blob(
            tmp, "vocab_frequency.i64", model.tfidf.vocabulary.corpus_frequency, "<i8"
        )
        blobs["weights_indptr"] = _write_blob(tmp, "weights_indptr.i64", model.tfidf.weights.indptr, "<i8")
        blobs["weights_indices"] = _write_blob(tmp, "weights_indices.i64", model.tfidf.weights.indices, "<i8")
        blobs["weights_values"] = _write_blob(tmp, "weights_values.f32", model.tfidf.weights.values, "<f4")
        blobs["class_sizes"] = _write_blob(tmp, "class_sizes.i64", model.tfidf.class_sizes, "<i8")
        if model.topic_centroids is not None:
            blobs["topic_centroids"] = _write_blob(
                tmp, "topic_centroids.f32", model.topic_centroids, "<f4"
            )

        for width, ts in sorted(model.series.items()):
            blobs[f"series_w{width}_counts"] = _write_blob(
                tmp, f"series_w{width}_counts.i64", ts.counts, "<i8"
            )
            blobs[f"series_w{width}_outliers"] = _write_blob(
                tmp, f"series_w{width}_outliers.i64", ts.outlier_counts, "<i8"
            )

        with open(os.path.join(tmp, "vocabulary.json"), "w", encoding="utf-8") as f:
            json.dump(
                {
                    "terms": model.tfidf.vocabulary.terms,
                    "stopword_list_id": model.tfidf.vocabulary.stopword_list_id,
                },
                f,
            )
        with open(os.path.join(tmp, "overlays.json"), "w", encoding="utf-8") as f:
            json.dump(
                {
                    "case_counts": [[d.isoformat(), v] for d, v in model.overlays.case_counts],
                    "events": [[d.isoformat(), label] for d, label in model.overlays.events],
                },
                f,
            )

        manifest = {
            "format_version": FORMAT_VERSION,
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "config_hash": model.config_hash,
            "stopword_hash": model.stopword_hash,
            "counts": {
                "documents": model.n_documents,
                "topics": model.n_topics,
                "vocabulary": model.vocabulary_size,
            },
            "window": [model.window[0].isoformat(), model.window[1].isoformat()],
            "series_origins": {
                str(w): ts.origin.isoformat() for w, ts in sorted(model.series.items())
            },
            "average_class_mass": model.tfidf.average_class_mass,
            "reduce_frequent_words": model.tfidf.reduce_frequent_words,
            "blobs": blobs,
        }
        with open(os.path.join(tmp, MANIFEST_NAME), "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)

        os.rename(tmp, out_dir)
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return manifest


def _read_blob(model_dir: str, spec: dict, name: str) -> np.ndarray:
    path = os.path.join(model_dir, spec["file"])
    if not os.path.exists(path):
        raise PersistenceError(f"blob {name} missing: {spec['file']}")
    actual = os.path.getsize(path)
    if actual != spec["bytes"]:
        raise PersistenceError(
            f"blob {name} corrupted: {spec['file']} has {actual} bytes, manifest says {spec['bytes']}"
        )
    data = np.fromfile(path, dtype=_DTYPES[spec["dtype"]]).reshape(spec["shape"])
    out = data.astype(np.float64) if spec["dtype"] == "<f4" else data.astype(np.int64)
    out.setflags(write=False)
    return out


def load_model(model_dir) -> TopicModel:
    """Reload an artifact; all queries must reproduce the pre-save results."""
    model_dir = os.fspath(model_dir)
    manifest_path = os.path.join(model_dir, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise PersistenceError(f"no {MANIFEST_NAME} in {model_dir}")
    with open(manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise PersistenceError(f"unsupported artifact format version: {version}")
    if manifest["stopword_hash"] != stopwords_hash():
        raise PersistenceError(
            "artifact was fitted against a different stopword list; refusing to load"
        )

    blobs = manifest["blobs"]
    get = lambda name: _read_blob(model_dir, blobs[name], name)

    projection = Projection(
        mean=get("projection_mean"),
        basis=get("projection_basis"),
        explained_variance_ratio=get("projection_evr"),
    )
    labels = get("labels")

    flags = _read_blob(model_dir, blobs["tree_flags"], "tree_flags")
    tree = CondensedTree(
        parent=get("tree_parent"),
        birth_lambda=get("tree_birth"),
        death_lambda=get("tree_death"),
        size=get("tree_size"),
        stability=get("tree_stability"),
        is_leaf=(flags & 1).astype(bool),
        selected=((flags >> 1) & 1).astype(bool),
    )

    with open(os.path.join(model_dir, "vocabulary.json"), "r", encoding="utf-8") as f:
        vocab_doc = json.load(f)
    terms = vocab_doc["terms"]
    vocab = Vocabulary(
        terms=terms,
        term_index={t: i for i, t in enumerate(terms)},
        corpus_frequency=get("vocab_frequency").astype(np.float64),
        stopword_list_id=vocab_doc["stopword_list_id"],
    )
    weights = SparseRows(
        indptr=get("weights_indptr"),
        indices=get("weights_indices"),
        values=get("weights_values"),
        n_cols=len(terms),
    )
    class_sizes = get("class_sizes")
    tfidf = ClassTfIdfModel(
        vocabulary=vocab,
        weights=weights,
        class_sizes=class_sizes,
        average_class_mass=float(manifest["average_class_mass"]),
        reduce_frequent_words=bool(manifest["reduce_frequent_words"]),
    )

    counts = manifest["counts"]
    if labels.size != counts["documents"]:
        raise PersistenceError(
            f"labels blob has {labels.size} entries, manifest says {counts['documents']} documents"
        )
    if weights.n_rows != counts["topics"]:
        raise PersistenceError(
            f"weight matrix has {weights.n_rows} rows, manifest says {counts['topics']} topics"
        )
    if len(terms) != counts["vocabulary"]:
        raise PersistenceError(
            f"vocabulary has {len(terms)} terms, manifest says {counts['vocabulary']}"
        )

    series: dict[int, TopicTimeSeries] = {}
    for width_str, origin_str in manifest.get("series_origins", {}).items():
        width = int(width_str)
        counts_arr = get(f"series_w{width}_counts")
        outliers = get(f"series_w{width}_outliers")
        totals = counts_arr.sum(axis=0) + outliers
        with np.errstate(divide="ignore", invalid="ignore"):
            intensity = np.where(totals > 0, counts_arr / np.maximum(totals, 1), 0.0)
        series[width] = TopicTimeSeries(
            bin_width_weeks=width,
            origin=date.fromisoformat(origin_str),
            counts=counts_arr,
            outlier_counts=outliers,
            intensity=intensity,
        )

    with open(os.path.join(model_dir, "overlays.json"), "r", encoding="utf-8") as f:
        overlays_doc = json.load(f)
    overlays = OverlaySeries(
        case_counts=[(date.fromisoformat(d), float(v)) for d, v in overlays_doc["case_counts"]],
        events=[(date.fromisoformat(d), label) for d, label in overlays_doc["events"]],
    )

    window = (
        date.fromisoformat(manifest["window"][0]),
        date.fromisoformat(manifest["window"][1]),
    )
    centroids = get("topic_centroids") if "topic_centroids" in blobs else None
    return TopicModel(
        projection=projection,
        labels=labels,
        tree=tree,
        tfidf=tfidf,
        series=series,
        overlays=overlays,
        window=window,
        topic_centroids=centroids,
        config_hash=manifest["config_hash"],
        stopword_hash=manifest["stopword_hash"],
    )
