"""Multivariate clustering methods applied to index feature matrices."""

from .base import Partition, relabel_by_appearance
from .hierarchical import (Dendrogram, LinkageKind, cut, hclust, hcluster,
                           pairwise_distances)
from .kernels import KernelSpec, check_psd, kernel_matrix, median_heuristic
from .kmeans import (InitKind, kernel_kmeans, kkmeans, kmeans, kmeanspp_init,
                     whiten)
from .methods import MethodSpec, default_methods, parse_method_name, format_method_name
from .spectral import spectral_cluster, spectral_embedding

__all__ = [
    "Partition", "relabel_by_appearance", "Dendrogram", "LinkageKind", "cut",
    "hclust", "hcluster", "pairwise_distances", "KernelSpec", "check_psd",
    "kernel_matrix", "median_heuristic", "InitKind", "kernel_kmeans", "kkmeans",
    "kmeans", "kmeanspp_init", "whiten", "MethodSpec", "default_methods",
    "parse_method_name", "format_method_name", "spectral_cluster",
    "spectral_embedding",
]
