"""Clustering algorithms and validity indices.

Dense O(n^2) distance handling throughout: at desk scale (n up to ~20k,
kept there by subsampling) correctness and oracle-checkability beat
nearest-neighbor tricks. Every operation fixes its tie-breaks so repeated
runs, and independent implementations, agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Xoshiro256StarStar

OUTLIER = -1


class ClusteringError(Exception):
    pass


@dataclass
class ClusterAssignment:
    """Per-row labels: -1 for outliers, 0..C-1 ordered by decreasing size."""

    labels: np.ndarray
    n_clusters: int

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0], minlength=self.n_clusters)


@dataclass
class CondensedTree:
    """Cluster hierarchy after pruning components below min_cluster_size.

    Node 0 is the root; `parent[0] == -1`. Lambda values are 1/distance,
    so they grow as the hierarchy descends.
    """

    parent: np.ndarray  # (K,) int, -1 for root
    birth_lambda: np.ndarray  # (K,) float
    death_lambda: np.ndarray  # (K,) float
    size: np.ndarray  # (K,) int, points present at birth
    stability: np.ndarray  # (K,) float
    is_leaf: np.ndarray  # (K,) bool
    selected: np.ndarray  # (K,) bool, set by extraction


@dataclass
class DensityParams:
    min_cluster_size: int
    min_samples: int
    metric: str = "euclidean"
    selection: str = "leaf"

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.min_samples > self.min_cluster_size:
            raise ValueError("min_samples must not exceed min_cluster_size")
        if self.metric not in ("euclidean", "cosine"):
            raise ValueError(f"unsupported metric: {self.metric!r}")
        if self.selection not in ("leaf", "eom"):
            raise ValueError(f"unsupported selection: {self.selection!r}")


def pairwise_distances(X: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Dense symmetric distance matrix; `cosine` means angular (1 - cos)."""
    X = np.asarray(X, dtype=np.float64)
    if metric == "euclidean":
        sq = np.sum(X * X, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.clip(d2, 0.0, None, out=d2)
        np.fill_diagonal(d2, 0.0)
        return np.sqrt(d2)
    if metric == "cosine":
        norms = np.linalg.norm(X, axis=1)
        norms[norms == 0] = 1.0
        unit = X / norms[:, None]
        sim = unit @ unit.T
        np.clip(sim, -1.0, 1.0, out=sim)
        d = 1.0 - sim
        np.fill_diagonal(d, 0.0)
        np.clip(d, 0.0, None, out=d)
        return d
    raise ValueError(f"unsupported metric: {metric!r}")


# ---------------------------------------------------------------------------
# k-means


def _renumber_by_size(labels: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    """Relabel clusters 0..C-1 by decreasing size, ties by first member row."""
    old_ids = [int(c) for c in np.unique(labels) if c >= 0]
    order = []
    for c in old_ids:
        members = np.nonzero(labels == c)[0]
        order.append((-members.size, int(members[0]), c))
    order.sort()
    mapping = {c: new for new, (_, _, c) in enumerate(order)}
    out = np.full_like(labels, OUTLIER)
    for c, new in mapping.items():
        out[labels == c] = new
    perm = np.array([c for _, _, c in order], dtype=np.intp)
    return out, len(old_ids), perm


def kmeans(
    X: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-6,
    inertia_history: list | None = None,
) -> tuple[ClusterAssignment, np.ndarray]:
    """Lloyd iterations from k-means++ seeding on the pinned generator.

    Empty clusters are repaired by reseeding onto the point currently
    farthest from its assigned centroid. Converged when the largest
    centroid shift drops below `tol`. Pass a list as `inertia_history` to
    observe the per-iteration objective.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ClusteringError(f"k={k} out of range for n={n}")

    rng = Xoshiro256StarStar(seed)
    centroids = _kmeans_pp_init(X, k, rng)
    prev_inertia = math.inf

    for _ in range(max_iter):
        labels, point_d2, counts = _assign_with_repair(X, centroids, k)

        inertia = float(point_d2.sum())
        if inertia > prev_inertia * (1 + 1e-12) + 1e-12:
            raise ClusteringError("internal error: inertia increased during Lloyd step")
        prev_inertia = inertia
        if inertia_history is not None:
            inertia_history.append(inertia)

        new_centroids = np.zeros_like(centroids)
        np.add.at(new_centroids, labels, X)
        new_centroids /= counts[:, None]
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < tol:
            break

    labels, _, _ = _assign_with_repair(X, centroids, k)
    relabeled, n_clusters, perm = _renumber_by_size(labels)
    return ClusterAssignment(relabeled, n_clusters), centroids[perm]


def _assign_with_repair(X: np.ndarray, centroids: np.ndarray, k: int):
    """Nearest-centroid assignment, reseeding empty clusters in place."""
    n = X.shape[0]
    d2 = _sq_dists_to_centroids(X, centroids)
    labels = np.argmin(d2, axis=1)
    point_d2 = d2[np.arange(n), labels]
    while True:
        counts = np.bincount(labels, minlength=k)
        empties = np.nonzero(counts == 0)[0]
        if empties.size == 0:
            return labels, point_d2, counts
        c = int(empties[0])
        far = int(np.argmax(point_d2))
        centroids[c] = X[far]
        labels[far] = c
        point_d2[far] = 0.0


def _kmeans_pp_init(X: np.ndarray, k: int, rng: Xoshiro256StarStar) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[rng.randbelow(n)]
    if k == 1:
        return centroids
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = rng.randbelow(n)
        else:
            idx = rng.weighted_index(np.cumsum(d2))
        centroids[j] = X[idx]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _sq_dists_to_centroids(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    sq_x = np.sum(X * X, axis=1)[:, None]
    sq_c = np.sum(centroids * centroids, axis=1)[None, :]
    d2 = sq_x + sq_c - 2.0 * (X @ centroids.T)
    np.clip(d2, 0.0, None, out=d2)
    return d2


def silhouette(X: np.ndarray, labels: np.ndarray, metric: str = "euclidean") -> float:
    """Mean per-point (b - a) / max(a, b) over non-outlier points.

    Singleton clusters score 0; identical a and b score 0 by convention.
    """
    labels = np.asarray(labels)
    keep = labels >= 0
    kept_labels = labels[keep]
    clusters = np.unique(kept_labels)
    if clusters.size < 2:
        raise ClusteringError("silhouette needs at least 2 clusters")

    D = pairwise_distances(np.asarray(X)[keep], metric)
    m = kept_labels.size
    own_idx = np.searchsorted(clusters, kept_labels)
    sums = np.stack([D[:, kept_labels == c].sum(axis=1) for c in clusters], axis=1)
    sizes = np.array([(kept_labels == c).sum() for c in clusters], dtype=np.float64)

    rows = np.arange(m)
    own_size = sizes[own_idx]
    a = np.where(own_size > 1, sums[rows, own_idx] / np.maximum(own_size - 1, 1), 0.0)
    means = sums / sizes[None, :]
    means[rows, own_idx] = np.inf
    b = means.min(axis=1)

    denom = np.maximum(a, b)
    scores = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    scores = np.where(own_size == 1, 0.0, scores)  # singleton convention
    return float(scores.mean())


def select_k(
    X: np.ndarray,
    k_range: tuple[int, int] = (2, 60),
    seed: int = 0,
) -> tuple[int, dict[int, float]]:
    """Silhouette-maximizing k over the inclusive range; ties take smallest k."""
    lo, hi = k_range
    n = np.asarray(X).shape[0]
    if lo < 2 or hi > n or lo > hi:
        raise ClusteringError(f"k range [{lo}, {hi}] invalid for n={n}")
    scores: dict[int, float] = {}
    for k in range(lo, hi + 1):
        assignment, _ = kmeans(X, k, seed)
        scores[k] = silhouette(X, assignment.labels)
    best = max(scores, key=lambda k: (scores[k], -k))
    return best, scores


# ---------------------------------------------------------------------------
# density-based hierarchy


def core_distances(X: np.ndarray, min_samples: int, metric: str = "euclidean") -> np.ndarray:
    """Distance to each point's min_samples-th nearest neighbor (self excluded)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n <= min_samples:
        raise ClusteringError(f"need more than min_samples={min_samples} points, got {n}")
    D = pairwise_distances(X, metric)
    # self-distance 0 occupies one of the first min_samples slots
    part = np.partition(D, min_samples, axis=1)
    return part[:, min_samples]


def mutual_reachability(X: np.ndarray, core: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """mr(a, b) = max(core(a), core(b), dist(a, b)), as a dense matrix."""
    D = pairwise_distances(X, metric)
    core = np.asarray(core, dtype=np.float64)
    np.maximum(D, core[:, None], out=D)
    np.maximum(D, core[None, :], out=D)
    np.fill_diagonal(D, 0.0)
    return D


def build_mst(weights: np.ndarray) -> np.ndarray:
    """Minimum spanning tree of a dense symmetric weight matrix (Prim).

    Returns (n-1, 3) rows [u, v, w]. Equal-weight frontier edges are broken
    by the smaller sorted endpoint index pair, making the tree unique.
    """
    n = weights.shape[0]
    if n < 2:
        raise ClusteringError("MST needs at least 2 points")
    in_tree = np.zeros(n, dtype=bool)
    best_w = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=np.intp)
    in_tree[0] = True
    best_w[1:] = weights[0, 1:]
    best_from[1:] = 0
    edges = np.empty((n - 1, 3), dtype=np.float64)

    idx = np.arange(n)
    for step in range(n - 1):
        out = ~in_tree
        cand = idx[out]
        w = best_w[cand]
        frm = best_from[cand]
        lo = np.minimum(frm, cand)
        hi = np.maximum(frm, cand)
        pick = cand[np.lexsort((hi, lo, w))[0]]
        edges[step] = (best_from[pick], pick, best_w[pick])
        in_tree[pick] = True

        out[pick] = False
        rest = idx[out]
        if rest.size == 0:
            break
        new_w = weights[pick, rest]
        old_w = best_w[rest]
        new_lo = np.minimum(pick, rest)
        new_hi = np.maximum(pick, rest)
        old_lo = np.minimum(best_from[rest], rest)
        old_hi = np.maximum(best_from[rest], rest)
        better = new_w < old_w
        tie = (new_w == old_w) & (
            (new_lo < old_lo) | ((new_lo == old_lo) & (new_hi < old_hi))
        )
        upd = better | tie
        best_w[rest[upd]] = new_w[upd]
        best_from[rest[upd]] = pick
    return edges


def _single_linkage(edges: np.ndarray, n: int):
    """Union-find agglomeration of sorted MST edges into a merge table."""
    u = edges[:, 0].astype(np.intp)
    v = edges[:, 1].astype(np.intp)
    w = edges[:, 2]
    order = np.lexsort((np.maximum(u, v), np.minimum(u, v), w))

    parent = np.arange(2 * n - 1, dtype=np.intp)
    size = np.ones(2 * n - 1, dtype=np.int64)
    left = np.empty(n - 1, dtype=np.intp)
    right = np.empty(n - 1, dtype=np.intp)
    dist = np.empty(n - 1, dtype=np.float64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    nxt = n
    for e in order:
        ra, rb = find(u[e]), find(v[e])
        left[nxt - n] = ra
        right[nxt - n] = rb
        dist[nxt - n] = w[e]
        size[nxt] = size[ra] + size[rb]
        parent[ra] = parent[rb] = nxt
        nxt += 1
    return left, right, dist, size


def _points_under(node: int, n: int, left: np.ndarray, right: np.ndarray) -> list[int]:
    stack, points = [node], []
    while stack:
        cur = stack.pop()
        if cur < n:
            points.append(cur)
        else:
            stack.append(left[cur - n])
            stack.append(right[cur - n])
    return points


def condense_and_extract(
    mst: np.ndarray,
    min_cluster_size: int,
    selection: str = "leaf",
) -> tuple[CondensedTree, ClusterAssignment]:
    """Condense the single-linkage hierarchy and extract flat clusters.

    Splits that shed a component smaller than `min_cluster_size` keep the
    surviving side in the same condensed cluster; shed points become
    outlier candidates at the shedding density level. `leaf` selects the
    condensed tree's leaves, `eom` maximizes stability bottom-up; the root
    is never selected, so a split-free hierarchy labels everything -1.
    """
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    if selection not in ("leaf", "eom"):
        raise ValueError(f"unsupported selection: {selection!r}")
    n = mst.shape[0] + 1
    if n < min_cluster_size:
        tree = CondensedTree(
            parent=np.array([-1], dtype=np.intp),
            birth_lambda=np.zeros(1),
            death_lambda=np.zeros(1),
            size=np.array([n], dtype=np.int64),
            stability=np.zeros(1),
            is_leaf=np.ones(1, dtype=bool),
            selected=np.zeros(1, dtype=bool),
        )
        return tree, ClusterAssignment(np.full(n, OUTLIER, dtype=np.int64), 0)

    left, right, dist, size = _single_linkage(mst, n)
    root = 2 * n - 2

    parents = [-1]
    births = [0.0]
    sizes = [n]
    children: list[list[int]] = [[]]
    point_rows: list[tuple[int, int, float]] = []  # (cluster, point, lambda)
    deaths = [0.0]

    work = [(root, 0)]
    while work:
        node, cluster = work.pop()
        cur = node
        while True:
            l, r = left[cur - n], right[cur - n]
            d = dist[cur - n]
            lam = math.inf if d <= 0.0 else 1.0 / d
            sl = size[l] if l >= n else 1
            sr = size[r] if r >= n else 1
            if sl >= min_cluster_size and sr >= min_cluster_size:
                for child, csize in ((l, sl), (r, sr)):
                    cid = len(parents)
                    parents.append(cluster)
                    births.append(lam)
                    sizes.append(int(csize))
                    children.append([])
                    deaths.append(lam)
                    children[cluster].append(cid)
                    work.append((child, cid))
                deaths[cluster] = lam
                break
            if sl < min_cluster_size and sr < min_cluster_size:
                for p in _points_under(l, n, left, right):
                    point_rows.append((cluster, p, lam))
                for p in _points_under(r, n, left, right):
                    point_rows.append((cluster, p, lam))
                deaths[cluster] = lam
                break
            big, small = (l, r) if sl >= min_cluster_size else (r, l)
            for p in _points_under(small, n, left, right):
                point_rows.append((cluster, p, lam))
            cur = big

    k = len(parents)
    stability = np.zeros(k)
    for cluster, _, lam in point_rows:
        stability[cluster] += lam - births[cluster]
    for cid in range(1, k):
        stability[parents[cid]] += (births[cid] - births[parents[cid]]) * sizes[cid]

    is_leaf = np.array([not children[c] for c in range(k)], dtype=bool)
    selected = _select_clusters(selection, k, children, stability)

    labels = _label_points(n, k, point_rows, parents, selected)
    relabeled, n_clusters, _ = _renumber_by_size(labels)

    tree = CondensedTree(
        parent=np.array(parents, dtype=np.intp),
        birth_lambda=np.array(births),
        death_lambda=np.array(deaths),
        size=np.array(sizes, dtype=np.int64),
        stability=stability,
        is_leaf=is_leaf,
        selected=selected,
    )
    return tree, ClusterAssignment(relabeled, n_clusters)


def _select_clusters(
    selection: str, k: int, children: list[list[int]], stability: np.ndarray
) -> np.ndarray:
    selected = np.zeros(k, dtype=bool)
    if k == 1:  # root never selected: no splits means no clusters
        return selected
    if selection == "leaf":
        for c in range(1, k):
            if not children[c]:
                selected[c] = True
        return selected

    # excess of mass: bottom-up, keep a parent that beats its children's sum
    subtree = np.zeros(k)
    chosen: list[list[int]] = [[] for _ in range(k)]
    for c in range(k - 1, -1, -1):
        kids = children[c]
        if not kids:
            subtree[c] = stability[c]
            chosen[c] = [c]
            continue
        child_sum = sum(subtree[kid] for kid in kids)
        merged = [x for kid in kids for x in chosen[kid]]
        if c != 0 and stability[c] >= child_sum:
            subtree[c] = stability[c]
            chosen[c] = [c]
        else:
            subtree[c] = child_sum
            chosen[c] = merged
    for c in chosen[0]:
        if c != 0:
            selected[c] = True
    return selected


def _label_points(
    n: int,
    k: int,
    point_rows: list[tuple[int, int, float]],
    parents: list[int],
    selected: np.ndarray,
) -> np.ndarray:
    resolve: dict[int, int] = {}

    def nearest_selected(c: int) -> int:
        path = []
        cur = c
        while cur != -1 and cur not in resolve:
            if selected[cur]:
                resolve[cur] = cur
                break
            path.append(cur)
            cur = parents[cur]
        target = resolve.get(cur, OUTLIER) if cur != -1 else OUTLIER
        for p in path:
            resolve[p] = target
        return resolve.get(c, target)

    labels = np.full(n, OUTLIER, dtype=np.int64)
    for cluster, point, _ in point_rows:
        owner = nearest_selected(cluster)
        if owner != OUTLIER:
            labels[point] = owner
    return labels


def density_cluster(
    X: np.ndarray, params: DensityParams
) -> tuple[CondensedTree, ClusterAssignment]:
    """Full density pipeline: cores, mutual reachability, MST, condense."""
    core = core_distances(X, params.min_samples, params.metric)
    mr = mutual_reachability(X, core, params.metric)
    mst = build_mst(mr)
    return condense_and_extract(mst, params.min_cluster_size, params.selection)


# ---------------------------------------------------------------------------
# density-based cluster validity


def _all_points_core_distances(D: np.ndarray, dim: int) -> np.ndarray:
    """Inverse-distance power mean within a cluster, in log space.

    apts(p) = ( mean_q (1/d(p,q))^dim )^(-1/dim); any zero distance pins
    the value to 0. Log-space evaluation avoids overflow for large dim.
    """
    m = D.shape[0]
    out = np.zeros(m)
    for i in range(m):
        d = np.delete(D[i], i)
        if np.any(d <= 0.0):
            out[i] = 0.0
            continue
        logs = -dim * np.log(d)
        peak = logs.max()
        lme = peak + math.log(np.mean(np.exp(logs - peak)))
        out[i] = math.exp(-lme / dim)
    return out


def _internal_nodes(mst: np.ndarray, m: int) -> np.ndarray:
    degree = np.zeros(m, dtype=np.int64)
    for u, v, _ in mst:
        degree[int(u)] += 1
        degree[int(v)] += 1
    internal = np.nonzero(degree >= 2)[0]
    return internal if internal.size else np.arange(m)


def dbcv(X: np.ndarray, labels: np.ndarray, metric: str = "euclidean") -> float:
    """Density-based cluster validity in [-1, 1].

    Within-cluster sparseness is the largest mutual-reachability edge
    between internal nodes of the cluster's MST; separation is the least
    mutual-reachability distance between internal nodes of two clusters.
    Outliers contribute nothing but stay in the weight denominator.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    n_total = labels.size
    dim = X.shape[1]

    cluster_ids = [int(c) for c in np.unique(labels) if c >= 0]
    members = {c: np.nonzero(labels == c)[0] for c in cluster_ids}
    valid = [c for c in cluster_ids if members[c].size >= 2]
    if len(valid) < 2:
        raise ClusteringError("undefined validity: need >= 2 clusters of size >= 2")

    apts: dict[int, np.ndarray] = {}
    sparseness: dict[int, float] = {}
    internals: dict[int, np.ndarray] = {}
    for c in valid:
        pts = X[members[c]]
        D = pairwise_distances(pts, metric)
        a = _all_points_core_distances(D, dim)
        apts[c] = a
        mrd = np.maximum(D, np.maximum(a[:, None], a[None, :]))
        np.fill_diagonal(mrd, 0.0)
        mst = build_mst(mrd)
        internal = _internal_nodes(mst, pts.shape[0])
        internals[c] = internal
        internal_set = set(int(x) for x in internal)
        weights = [w for u, v, w in mst if int(u) in internal_set and int(v) in internal_set]
        sparseness[c] = float(max(weights)) if weights else float(mst[:, 2].max())

    separation: dict[int, float] = {c: math.inf for c in valid}
    for i, ci in enumerate(valid):
        pi = X[members[ci]][internals[ci]]
        ai = apts[ci][internals[ci]]
        for cj in valid[i + 1 :]:
            pj = X[members[cj]][internals[cj]]
            aj = apts[cj][internals[cj]]
            cross = _cross_distances(pi, pj, metric)
            reach = np.maximum(cross, np.maximum(ai[:, None], aj[None, :]))
            d = float(reach.min())
            separation[ci] = min(separation[ci], d)
            separation[cj] = min(separation[cj], d)

    score = 0.0
    for c in valid:
        sep, spr = separation[c], sparseness[c]
        denom = max(sep, spr)
        validity = 0.0 if denom <= 0.0 or not math.isfinite(denom) else (sep - spr) / denom
        score += (members[c].size / n_total) * validity
    return float(score)


def _cross_distances(A: np.ndarray, B: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        sq_a = np.sum(A * A, axis=1)[:, None]
        sq_b = np.sum(B * B, axis=1)[None, :]
        d2 = sq_a + sq_b - 2.0 * (A @ B.T)
        np.clip(d2, 0.0, None, out=d2)
        return np.sqrt(d2)
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    sim = (A / na[:, None]) @ (B / nb[:, None]).T
    np.clip(sim, -1.0, 1.0, out=sim)
    return 1.0 - sim
