"""Grid search over reduction and density parameters, maximizing DBCV.

Each trial subsamples the embeddings with its own trial-indexed seed
(base_seed + trial), reduces, clusters, and scores. Trials whose DBCV is
undefined (degenerate clusterings, impossible parameter combinations)
rank below every defined trial instead of aborting the search, so
degenerate grid corners are harmless.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .cluster import ClusteringError, DensityParams, dbcv, density_cluster
from .embedstore import EmbeddingMatrix, subsample
from .reduce import pca_fit, pca_transform

GRID_KEYS = ("metric", "min_cluster_size", "min_samples", "reduce_k", "selection")


class TuneError(Exception):
    pass


@dataclass
class TrialResult:
    trial: int
    params: dict
    dbcv: float | None  # None marks an undefined score
    cluster_count: int
    outlier_fraction: float
    seed: int
    duration_ms: float
    note: str = ""

    @property
    def defined(self) -> bool:
        return self.dbcv is not None


def enumerate_grid(grid: dict[str, list]) -> list[dict]:
    """Cartesian product in deterministic lexicographic key order."""
    if not grid:
        raise TuneError("empty grid")
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise TuneError(f"unknown grid keys: {sorted(unknown)}")
    keys = sorted(grid)
    combos = []
    for values in product(*(grid[k] for k in keys)):
        combos.append(dict(zip(keys, values)))
    return combos


def run_trial(emb: EmbeddingMatrix, params: dict, fraction: float, seed: int, trial: int) -> TrialResult:
    started = time.perf_counter()

    def finish(score, clusters, outlier_frac, note=""):
        return TrialResult(
            trial=trial,
            params=params,
            dbcv=score,
            cluster_count=clusters,
            outlier_fraction=outlier_frac,
            seed=seed,
            duration_ms=(time.perf_counter() - started) * 1000.0,
            note=note,
        )

    try:
        density = DensityParams(
            min_cluster_size=int(params.get("min_cluster_size", 100)),
            min_samples=int(params.get("min_samples", 10)),
            metric=str(params.get("metric", "euclidean")),
            selection=str(params.get("selection", "leaf")),
        )
    except ValueError as exc:
        return finish(None, 0, 1.0, note=f"invalid params: {exc}")

    sample = subsample(emb, fraction, seed)
    X = sample.vectors.astype(np.float64)
    k = params.get("reduce_k")
    if k is not None:
        k = int(k)
        try:
            proj = pca_fit(X, k)
        except ValueError as exc:
            return finish(None, 0, 1.0, note=f"reduction failed: {exc}")
        X = pca_transform(proj, X)

    try:
        _, assignment = density_cluster(X, density)
    except ClusteringError as exc:
        return finish(None, 0, 1.0, note=f"clustering failed: {exc}")
    outlier_frac = float((assignment.labels < 0).mean())
    try:
        score = dbcv(X, assignment.labels, metric=density.metric)
    except ClusteringError as exc:
        return finish(None, assignment.n_clusters, outlier_frac, note=f"dbcv undefined: {exc}")
    return finish(score, assignment.n_clusters, outlier_frac)


def grid_search(
    emb: EmbeddingMatrix,
    grid: dict[str, list],
    subsample_fraction: float = 0.25,
    base_seed: int = 0,
    workers: int = 1,
) -> tuple[TrialResult, list[TrialResult]]:
    """Evaluate the full grid; best defined trial wins, earliest on ties.

    Trial i draws its subsample with seed base_seed + i, so any single
    trial can be replayed in isolation.
    """
    if not 0.0 < subsample_fraction <= 1.0:
        raise TuneError(f"subsample fraction must be in (0, 1], got {subsample_fraction}")
    combos = enumerate_grid(grid)

    def job(i_params):
        i, params = i_params
        return run_trial(emb, params, subsample_fraction, base_seed + i, i)

    jobs = list(enumerate(combos))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(j) for j in jobs]
    results.sort(key=lambda r: r.trial)

    defined = [r for r in results if r.defined]
    if not defined:
        raise TuneError("no valid configuration: every trial had undefined DBCV")
    best = max(defined, key=lambda r: (r.dbcv, -r.trial))
    return best, results


def trials_to_csv(results: list[TrialResult]) -> str:
    """Flat CSV of the full trial table, one row per combination."""
    param_keys = sorted({k for r in results for k in r.params})
    header = ["trial"] + param_keys + ["dbcv", "clusters", "outlier_fraction", "seed", "ms"]
    lines = [",".join(header)]
    for r in results:
        row = [str(r.trial)]
        row += [str(r.params.get(k, "")) for k in param_keys]
        row.append("" if r.dbcv is None else f"{r.dbcv:.12g}")
        row += [str(r.cluster_count), f"{r.outlier_fraction:.6g}", str(r.seed), f"{r.duration_ms:.3f}"]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
