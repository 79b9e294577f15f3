"""Clustering and graph primitives used by the embedding and hybrid detectors."""
from .fuzzy import FuzzyResult, fuzzy_cmeans, gk_norm_matrix, gustafson_kessel, harden, memberships_from_distances
from .graph import SimilarityGraph, connected_components, jaccard, jarvis_patrick, modularity, newman_communities
from .optics import OpticsResult, optics
from .partition import KMeansResult, kmeans, knn_classify, silhouette

harden_memberships = harden

__all__ = [
    "FuzzyResult",
    "KMeansResult",
    "OpticsResult",
    "SimilarityGraph",
    "connected_components",
    "fuzzy_cmeans",
    "gk_norm_matrix",
    "gustafson_kessel",
    "harden",
    "harden_memberships",
    "jaccard",
    "jarvis_patrick",
    "kmeans",
    "knn_classify",
    "memberships_from_distances",
    "modularity",
    "newman_communities",
    "optics",
    "silhouette",
]
