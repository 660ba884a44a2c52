"""Clustering walkthrough: k-means feasibility scan, density clustering, DBCV.

Mirrors the two-stage modeling approach: a quick k-means + silhouette scan
to see whether the data clusters at all, then the density-based hierarchy
with leaf extraction for the fine-grained structure, scored by DBCV.
"""

import numpy as np

from topicflux import (
    DensityParams,
    dbcv,
    density_cluster,
    kmeans,
    pca_fit,
    pca_transform,
    select_k,
    silhouette,
)

rng = np.random.default_rng(7)

# Five well-separated blobs in 20 dimensions, plus background noise.
centers = rng.normal(0, 8, (5, 20))
X = np.vstack([c + rng.normal(0, 0.6, (120, 20)) for c in centers])
noise = rng.uniform(X.min(), X.max(), (60, 20))
data = np.vstack([X, noise])

# 1. Feasibility scan: maximize silhouette over a k range.
best_k, scores = select_k(data, (2, 8), seed=1)
print("silhouette per k:", {k: round(s, 3) for k, s in scores.items()})
print("best k:", best_k)

assignment, centroids = kmeans(data, best_k, seed=1)
print("k-means sizes:", assignment.sizes(), "silhouette:", round(silhouette(data, assignment.labels), 3))

# 2. Reduce before density clustering (here 20 -> 5 keeps nearly all variance).
projection = pca_fit(data, 5)
reduced = pca_transform(projection, data)
print("\nexplained variance (5 comps):", round(projection.explained_variance_ratio.sum(), 4))

# 3. Density clustering with leaf selection: noise points become outliers
#    (label -1) instead of polluting the clusters.
params = DensityParams(min_cluster_size=40, min_samples=15, metric="euclidean", selection="leaf")
tree, dense = density_cluster(reduced, params)
print("density clusters:", dense.n_clusters, "sizes:", dense.sizes())
print("outliers:", int((dense.labels < 0).sum()), "of", len(data))

# 4. The condensed hierarchy behind those labels.
print("\ncondensed tree nodes:", tree.parent.size, "leaves:", int(tree.is_leaf.sum()))
for c in np.nonzero(tree.selected)[0]:
    print(f"  node {c}: size {tree.size[c]}, stability {tree.stability[c]:.2f}")

# 5. Validity: the planted labeling should score clearly above a shuffled one.
score = dbcv(reduced, dense.labels)
shuffled = dbcv(reduced, rng.permutation(dense.labels))
print(f"\nDBCV planted {score:.3f} vs shuffled {shuffled:.3f}")
