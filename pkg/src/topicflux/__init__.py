"""topicflux: temporal topic mining over embedded document corpora.

Pipeline: ingest -> embedstore -> reduce -> cluster (+ tune) -> represent
-> dynamics -> stats, bundled by persistence and served read-only by
service. See README.md for the tour and demos/ for runnable walkthroughs.
"""

from .cluster import (
    ClusterAssignment,
    CondensedTree,
    DensityParams,
    build_mst,
    condense_and_extract,
    core_distances,
    dbcv,
    density_cluster,
    kmeans,
    mutual_reachability,
    select_k,
    silhouette,
)
from .dynamics import OverlaySeries, TopicTimeSeries, assign_bins, build_series, interval_median
from .embedstore import EmbeddingMatrix, align, load_embeddings, save_embeddings, subsample
from .ingest import (
    CleanCorpus,
    CorpusProfile,
    CorpusRecord,
    PrecisionDate,
    deduplicate,
    detect_language,
    filter_records,
    parse_metadata,
    prepare_corpus,
    profile_corpus,
)
from .persistence import TopicModel, load_model, save_model
from .reduce import Projection, pca_fit, pca_transform
from .represent import (
    ClassTfIdfModel,
    TopicCard,
    Vocabulary,
    build_class_counts,
    class_tfidf,
    search_topics,
    tokenize,
    top_terms,
)
from .stats import KruskalWallisResult, chi2_sf, kruskal_wallis, rank_with_ties, test_topic_windows
from .tune import TrialResult, grid_search

__version__ = "0.1.0"
