from __future__ import annotations

import numpy as np
from scipy import linalg

from ..errors import NumericalFailure
from .base import Partition, as_matrix, check_k, make_rng
from .kernels import KernelSpec, kernel_matrix
from .kmeans import kmeans


def spectral_embedding(A: np.ndarray, k: int) -> np.ndarray:
    """Row-normalized top-``k`` eigenvectors of ``D^-1/2 A D^-1/2``."""
    deg = A.sum(axis=1)
    # isolated points get a tiny self-degree so the normalization stays finite
    deg = np.where(deg > 0, deg, np.finfo(float).tiny)
    inv_sqrt = 1.0 / np.sqrt(deg)
    M = inv_sqrt[:, None] * A * inv_sqrt[None, :]
    n = A.shape[0]
    try:
        _, vecs = linalg.eigh((M + M.T) / 2, subset_by_index=[n - k, n - 1])
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    U = vecs[:, ::-1]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(norms > 0, norms, 1.0)


def spectral_cluster(X, k: int, spec: KernelSpec = KernelSpec(), seed=None) -> Partition:
    """Normalized spectral clustering followed by Euclidean k-means.

    The affinity is the kernel matrix of ``spec`` with its diagonal zeroed.
    """
    X = as_matrix(X)
    k = check_k(k, X.shape[0])
    A = kernel_matrix(X, spec)
    np.fill_diagonal(A, 0.0)
    U = spectral_embedding(A, k)
    part = kmeans(U, k, seed=make_rng(seed))
    return Partition(part.assign, k)
