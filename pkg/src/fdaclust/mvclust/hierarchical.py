"""Agglomerative hierarchical clustering with Lance-Williams updates."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from .base import Partition, as_matrix, check_k, relabel_by_appearance


class LinkageKind(str, enum.Enum):
    SINGLE = "single"
    COMPLETE = "complete"
    AVERAGE = "average"
    CENTROID = "centroid"
    WARD_D2 = "ward.D2"


# these two are updated on squared distances, heights reported as square roots
_SQUARED = {LinkageKind.CENTROID, LinkageKind.WARD_D2}


def pairwise_distances(X) -> np.ndarray:
    """Euclidean distance matrix between the rows of ``X``."""
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise InvalidArgument("need at least two rows")
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    D = np.sqrt(sq)
    np.fill_diagonal(D, 0.0)
    return D


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Merge history of an agglomeration.

    ``merges`` has one row ``(left, right, height, size)`` per step. Leaves
    are nodes ``0..n-1``; the cluster created at step ``s`` is node ``n + s``.
    Heights are monotone except possibly for centroid linkage.
    """

    merges: np.ndarray
    n: int
    linkage: LinkageKind

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]


def _check_distance_matrix(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InvalidArgument("distance matrix must be square")
    if D.shape[0] < 1:
        raise InvalidArgument("empty distance matrix")
    if not np.allclose(D, D.T, rtol=0, atol=1e-12 * max(1.0, np.abs(D).max())):
        raise InvalidArgument("distance matrix must be symmetric")
    if np.any(D < 0) or not np.all(np.isfinite(D)):
        raise InvalidArgument("distances must be finite and non-negative")
    return D


def hcluster(D, linkage="complete") -> Dendrogram:
    """Agglomerate from a distance matrix.

    Single, complete and average linkage update the distances themselves;
    centroid and ``ward.D2`` update squared distances and report square-rooted
    heights, which is what R's ``hclust(method="ward.D2")`` does.
    """
    linkage = LinkageKind(linkage)
    D = _check_distance_matrix(D)
    n = D.shape[0]
    work = D ** 2 if linkage in _SQUARED else D.copy()
    np.fill_diagonal(work, np.inf)
    size = np.ones(n)
    node = np.arange(n)
    alive = np.ones(n, dtype=bool)
    merges = np.empty((max(n - 1, 0), 4))

    for step in range(n - 1):
        flat = int(np.argmin(work))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        dij = work[i, j]
        ni, nj = size[i], size[j]
        dki, dkj = work[i], work[j]
        if linkage is LinkageKind.SINGLE:
            new = np.minimum(dki, dkj)
        elif linkage is LinkageKind.COMPLETE:
            new = np.maximum(dki, dkj)
        elif linkage is LinkageKind.AVERAGE:
            new = (ni * dki + nj * dkj) / (ni + nj)
        elif linkage is LinkageKind.CENTROID:
            new = (ni * dki + nj * dkj) / (ni + nj) - ni * nj * dij / (ni + nj) ** 2
        else:
            nk = size
            new = ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk)

        height = np.sqrt(max(dij, 0.0)) if linkage in _SQUARED else dij
        a, b = sorted((node[i], node[j]))
        merges[step] = (a, b, height, ni + nj)

        # cluster i absorbs j
        new[~alive] = np.inf
        new[i] = np.inf
        work[i, :] = new
        work[:, i] = new
        work[j, :] = np.inf
        work[:, j] = np.inf
        alive[j] = False
        size[i] = ni + nj
        node[i] = n + step

    return Dendrogram(merges, n, linkage)


def cut(dend: Dendrogram, k: int) -> Partition:
    """Partition into ``k`` clusters by undoing the last ``k - 1`` merges.

    For monotone dendrograms these are the ``k - 1`` tallest merges.
    """
    n = dend.n
    k = check_k(k, n)
    parent = np.arange(2 * n - 1)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n - k):
        a, b = int(dend.merges[step, 0]), int(dend.merges[step, 1])
        parent[find(a)] = n + step
        parent[find(b)] = n + step
    roots = np.array([find(i) for i in range(n)])
    return Partition(relabel_by_appearance(roots), k)


def hclust(X, k: int, linkage="complete") -> Partition:
    """Convenience wrapper: Euclidean distances, agglomerate, cut at ``k``."""
    return cut(hcluster(pairwise_distances(X), linkage), k)
