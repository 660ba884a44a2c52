"""Loading, validation, alignment, and subsampling of document embeddings.

Embeddings are produced elsewhere; this module only ingests them. The
binary format is fixed (magic, LE u32 header, float32 row-major, id block)
so files round-trip bit-exactly and other toolchains can read them.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .ingest import CleanCorpus
from .rng import Xoshiro256StarStar

MAGIC = b"EMB1"
EXPECTED_DIM = 768  # the embedding contract; other widths load with a warning flag


class EmbeddingError(Exception):
    """Fatal embedding-file problem: bad structure, NaN/Inf, duplicate id."""


@dataclass
class EmbeddingMatrix:
    ids: list[str]
    vectors: np.ndarray  # n x d, float32
    nonstandard_dim: bool = False

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def validate(self) -> None:
        if len(self.ids) != self.vectors.shape[0]:
            raise EmbeddingError(
                f"{len(self.ids)} ids for {self.vectors.shape[0]} vector rows"
            )
        seen: set[str] = set()
        for i in self.ids:
            if i in seen:
                raise EmbeddingError(f"duplicate embedding id: {i!r}")
            seen.add(i)
        bad = ~np.isfinite(self.vectors)
        if bad.any():
            row = int(np.argwhere(bad)[0][0])
            raise EmbeddingError(f"non-finite value in embedding row {row} (id {self.ids[row]!r})")


def _finish(ids: list[str], vectors: np.ndarray) -> EmbeddingMatrix:
    emb = EmbeddingMatrix(ids, np.ascontiguousarray(vectors, dtype=np.float32))
    emb.nonstandard_dim = emb.dim != EXPECTED_DIM
    emb.validate()
    return emb


def save_embeddings(emb: EmbeddingMatrix, path) -> None:
    """Write the EMB1 binary layout; see FORMAT.md."""
    vec = np.ascontiguousarray(emb.vectors, dtype="<f4")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", vec.shape[0], vec.shape[1]))
        f.write(vec.tobytes())
        for i in emb.ids:
            f.write(i.encode("utf-8") + b"\n")


def load_embeddings(path, fmt: str = "binary") -> EmbeddingMatrix:
    if fmt == "binary":
        return _load_binary(path)
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "jsonl":
        return _load_jsonl(path)
    raise EmbeddingError(f"unknown embedding format: {fmt!r}")


def _load_binary(path) -> EmbeddingMatrix:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise EmbeddingError(f"bad magic bytes {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 12:
        raise EmbeddingError("truncated header")
    n, d = struct.unpack("<II", data[4:12])
    body_end = 12 + n * d * 4
    if len(data) < body_end:
        raise EmbeddingError(
            f"truncated vector block: need {body_end} bytes, file has {len(data)}"
        )
    vectors = np.frombuffer(data[12:body_end], dtype="<f4").reshape(n, d)
    id_block = data[body_end:].decode("utf-8")
    lines = id_block.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if len(lines) != n:
        raise EmbeddingError(f"id block has {len(lines)} ids, header declares {n}")
    return _finish(lines, vectors)


def _load_csv(path) -> EmbeddingMatrix:
    import csv as _csv

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = _csv.reader(f)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise EmbeddingError("csv embeddings must start with an `id,v0,...` header")
        d = len(header) - 1
        ids: list[str] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise EmbeddingError(
                    f"row {line_no}: expected {d} values, got {len(row) - 1}"
                )
            ids.append(row[0])
            try:
                rows.append([float(x) for x in row[1:]])
            except ValueError as exc:
                raise EmbeddingError(f"row {line_no}: {exc}") from exc
    return _finish(ids, np.asarray(rows, dtype=np.float64).reshape(len(ids), d))


def _load_jsonl(path) -> EmbeddingMatrix:
    ids: list[str] = []
    rows: list[list[float]] = []
    d: int | None = None
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            vec = obj["vector"]
            if d is None:
                d = len(vec)
            elif len(vec) != d:
                raise EmbeddingError(
                    f"row {line_no}: dimension {len(vec)} != first row's {d}"
                )
            ids.append(str(obj["id"]))
            rows.append(vec)
    if d is None:
        raise EmbeddingError("empty jsonl embedding file")
    return _finish(ids, np.asarray(rows, dtype=np.float64))


@dataclass
class AlignmentReport:
    corpus_only: int
    embedding_only: int


def align(corpus: CleanCorpus, emb: EmbeddingMatrix):
    """Restrict both sides to the shared ids, in corpus order.

    Returns (aligned_corpus, aligned_embeddings, report). An empty
    intersection is fatal: nothing downstream could run.
    """
    emb_index = {i: row for row, i in enumerate(emb.ids)}
    keep_records = [r for r in corpus.records if r.record_id in emb_index]
    if not keep_records:
        raise EmbeddingError("no overlap between corpus ids and embedding ids")
    rows = [emb_index[r.record_id] for r in keep_records]
    report = AlignmentReport(
        corpus_only=len(corpus.records) - len(keep_records),
        embedding_only=emb.n - len(keep_records),
    )
    aligned_corpus = CleanCorpus(
        records=keep_records, window=corpus.window, provenance=dict(corpus.provenance)
    )
    aligned_emb = EmbeddingMatrix(
        ids=[r.record_id for r in keep_records],
        vectors=emb.vectors[rows].copy(),
        nonstandard_dim=emb.nonstandard_dim,
    )
    return aligned_corpus, aligned_emb, report


def subsample(emb: EmbeddingMatrix, fraction: float, seed: int) -> EmbeddingMatrix:
    """ceil(fraction * n) rows without replacement, original order kept."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    m = math.ceil(fraction * emb.n)
    if m == emb.n:
        return EmbeddingMatrix(list(emb.ids), emb.vectors.copy(), emb.nonstandard_dim)
    rng = Xoshiro256StarStar(seed)
    rows = rng.sample_indices(emb.n, m)
    return EmbeddingMatrix(
        ids=[emb.ids[i] for i in rows],
        vectors=emb.vectors[rows].copy(),
        nonstandard_dim=emb.nonstandard_dim,
    )
