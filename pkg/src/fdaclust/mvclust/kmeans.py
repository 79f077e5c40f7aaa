"""Lloyd k-means (Euclidean or Mahalanobis) and kernel k-means.

Both algorithms run the same batch Lloyd loop; they differ only in how the
squared distance from a point to a cluster mean is obtained (from
coordinates, or from kernel entries alone). Feeding kernel k-means the
linear kernel therefore reproduces Euclidean k-means partition for
partition.

Before any random draw the items are put in a canonical order (by squared
distance to the overall mean), so permuting the input rows permutes the
output assignment and nothing else, and an orthogonal change of
coordinates does not change which items the RNG picks.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy import linalg

from ..errors import InvalidArgument, NumericalFailure
from .base import Partition, as_matrix, check_k, make_rng, relabel_by_appearance
from .hierarchical import cut, hcluster
from .kernels import KernelSpec, check_psd, kernel_matrix

MAX_ITER = 100
N_INIT = 10


class InitKind(str, enum.Enum):
    RANDOM_PARTITION = "randomPartition"
    FORGY = "forgy"
    KMEANS_PP = "kmeansPlusPlus"
    WARD = "wardInit"
    KMEANS = "kmeansInit"
    KERNEL_KMEANS = "kernelKmeansInit"


_DETERMINISTIC_INITS = {InitKind.WARD, InitKind.KMEANS, InitKind.KERNEL_KMEANS}


class _Euclidean:
    def __init__(self, X):
        self.X = X
        self.n = X.shape[0]

    def centrality(self):
        c = self.X - self.X.mean(axis=0)
        return (c ** 2).sum(axis=1)

    def to_points(self, idx):
        diff = self.X[:, None, :] - self.X[None, idx, :]
        return (diff ** 2).sum(axis=2)

    def to_means(self, assign, k):
        sizes = np.bincount(assign, minlength=k)
        sums = np.zeros((k, self.X.shape[1]))
        np.add.at(sums, assign, self.X)
        out = np.full((self.n, k), np.inf)
        ok = sizes > 0
        means = sums[ok] / sizes[ok, None]
        out[:, ok] = ((self.X[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        return out


class _Kernel:
    def __init__(self, K):
        self.K = K
        self.n = K.shape[0]
        self.diag = np.diag(K).copy()

    def centrality(self):
        return self.diag - 2.0 * self.K.mean(axis=1) + self.K.mean()

    def to_points(self, idx):
        idx = np.asarray(idx)
        return self.diag[:, None] + self.diag[None, idx] - 2.0 * self.K[:, idx]

    def to_means(self, assign, k):
        sizes = np.bincount(assign, minlength=k)
        H = np.zeros((self.n, k))
        H[np.arange(self.n), assign] = 1.0
        out = np.full((self.n, k), np.inf)
        ok = sizes > 0
        H = H[:, ok] / sizes[ok]
        KH = self.K @ H
        within = np.einsum("ic,ic->c", H, KH)
        out[:, ok] = self.diag[:, None] - 2.0 * KH + within[None, :]
        return out


def _wcss(dist, assign):
    return float(dist[np.arange(assign.size), assign].sum())


def _repair_empty(assign, dist, k):
    """Give every empty cluster the point farthest from its own mean."""
    assign = assign.copy()
    sizes = np.bincount(assign, minlength=k)
    for c in np.flatnonzero(sizes == 0):
        own = dist[np.arange(assign.size), assign]
        movable = sizes[assign] > 1
        if not movable.any():
            break
        cand = np.where(movable, own, -np.inf)
        i = int(np.argmax(cand))
        sizes[assign[i]] -= 1
        assign[i] = c
        sizes[c] = 1
    return assign


def _lloyd(geom, assign, k, max_iter):
    """Batch Lloyd iterations from an initial assignment.

    Returns ``(assign, objective, history, n_iter)`` where ``history`` holds
    the within-cluster sum of squares at the start of every iteration.
    """
    dist = geom.to_means(assign, k)
    assign = _repair_empty(assign, dist, k)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        dist = geom.to_means(assign, k)
        history.append(_wcss(dist, assign))
        new = np.argmin(dist, axis=1)
        # keep the current cluster on exact ties, avoids flip-flopping
        keep = dist[np.arange(new.size), assign] <= dist[np.arange(new.size), new]
        new = np.where(keep, assign, new)
        new = _repair_empty(new, dist, k)
        if np.array_equal(new, assign):
            break
        assign = new
    dist = geom.to_means(assign, k)
    objective = _wcss(dist, assign)
    if not history or objective < history[-1]:
        history.append(objective)
    return assign, objective, tuple(history), n_iter


def _kmeanspp(geom, k, rng):
    n = geom.n
    centers = [int(rng.integers(n))]
    closest = geom.to_points([centers[0]])[:, 0]
    for _ in range(1, k):
        closest = np.maximum(closest, 0.0)
        total = closest.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            rest = np.setdiff1d(np.arange(n), centers)
            nxt = int(rng.choice(rest))
        else:
            nxt = int(rng.choice(n, p=closest / total))
        centers.append(nxt)
        closest = np.minimum(closest, geom.to_points([nxt])[:, 0])
    return np.array(centers)


def _assign_to_seeds(geom, seeds, k):
    dist = geom.to_points(seeds)
    return np.argmin(dist, axis=1)


def _initial_assignment(geom, k, init, rng, X=None):
    n = geom.n
    if init is InitKind.RANDOM_PARTITION:
        return rng.integers(0, k, size=n)
    if init is InitKind.FORGY:
        return _assign_to_seeds(geom, rng.choice(n, size=k, replace=False), k)
    if init is InitKind.KMEANS_PP:
        return _assign_to_seeds(geom, _kmeanspp(geom, k, rng), k)
    if init is InitKind.WARD:
        D = np.sqrt(np.maximum(geom.to_points(np.arange(n)), 0.0))
        D = (D + D.T) / 2
        np.fill_diagonal(D, 0.0)
        return cut(hcluster(D, "ward.D2"), k).assign.copy()
    if X is None:
        raise InvalidArgument(f"init {init.value!r} needs the feature matrix")
    if init is InitKind.KMEANS:
        return kmeans(X, k, seed=rng).assign.copy()
    return kkmeans(X, k, KernelSpec.gaussian(), seed=rng).assign.copy()


def _run(geom, k, init, seed, n_init, max_iter, X=None):
    """Canonical ordering, restarts, and mapping back to input order."""
    rng = make_rng(seed)
    order = np.argsort(geom.centrality(), kind="stable")
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    if isinstance(geom, _Euclidean):
        g = _Euclidean(geom.X[order])
        Xo = g.X
    else:
        g = _Kernel(geom.K[np.ix_(order, order)])
        Xo = None if X is None else X[order]
    runs = 1 if init in _DETERMINISTIC_INITS else max(1, int(n_init))
    best = None
    for _ in range(runs):
        start = _initial_assignment(g, k, init, rng, Xo)
        result = _lloyd(g, np.asarray(start, dtype=np.int64), k, max_iter)
        if best is None or result[1] < best[1]:
            best = result
    assign, objective, history, n_iter = best
    return Partition(relabel_by_appearance(assign[inv]), k, objective, history, n_iter)


def kmeanspp_init(X, k: int, seed=None) -> np.ndarray:
    """Indices of ``k`` k-means++ seed points.

    The first is drawn uniformly, each next one with probability
    proportional to its squared distance to the nearest seed chosen so far.
    """
    X = as_matrix(X)
    k = check_k(k, X.shape[0])
    return _kmeanspp(_Euclidean(X), k, make_rng(seed))


def whiten(X, ridge: float = 1e-8) -> np.ndarray:
    """Map rows to coordinates with identity sample covariance.

    ``z = L^{-1} (x - mean)`` with ``L`` the Cholesky factor of the
    covariance after adding ``ridge * trace / p`` to its diagonal.
    """
    X = as_matrix(X)
    n, p = X.shape
    if n < 2:
        raise InvalidArgument("need at least two rows to estimate a covariance")
    cov = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
    cov = cov + ridge * max(np.trace(cov) / p, np.finfo(float).tiny) * np.eye(p)
    try:
        L = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"covariance is singular after regularization: {exc}") from exc
    return linalg.solve_triangular(L, (X - X.mean(axis=0)).T, lower=True).T


def kmeans(X, k: int, init="kmeansPlusPlus", metric: str = "euclidean", seed=None,
           n_init: int = N_INIT, max_iter: int = MAX_ITER) -> Partition:
    """Lloyd k-means with ``n_init`` restarts, keeping the lowest objective.

    ``metric='mahalanobis'`` whitens the features with the Cholesky factor
    of their covariance and then runs Euclidean k-means.
    """
    X = as_matrix(X)
    k = check_k(k, X.shape[0])
    init = InitKind(init)
    if metric == "mahalanobis":
        Z = whiten(X)
    elif metric == "euclidean":
        Z = X
    else:
        raise InvalidArgument(f"unknown metric {metric!r}")
    return _run(_Euclidean(Z), k, init, seed, n_init, max_iter, X=Z)


def kernel_kmeans(K, k: int, init="kmeansPlusPlus", seed=None, n_init: int = N_INIT,
                  max_iter: int = MAX_ITER, X=None, check: bool = True) -> Partition:
    """Kernel k-means on a precomputed kernel matrix.

    Feature-space squared distances to cluster means are
    ``K_ii - 2 mean_j K_ij + mean_jl K_jl`` over the members of a cluster.
    """
    K = np.asarray(K, dtype=float)
    if check:
        check_psd(K)
    k = check_k(k, K.shape[0])
    init = InitKind(init)
    if init is InitKind.KERNEL_KMEANS:
        raise InvalidArgument("kernel k-means cannot be initialized by itself")
    return _run(_Kernel(K), k, init, seed, n_init, max_iter,
                X=None if X is None else as_matrix(X))


def kkmeans(X, k: int, spec: KernelSpec = KernelSpec(), init="kmeansPlusPlus", seed=None,
            n_init: int = N_INIT, max_iter: int = MAX_ITER) -> Partition:
    """Kernel k-means on the rows of ``X`` with the kernel ``spec``."""
    X = as_matrix(X)
    K = kernel_matrix(X, spec)
    return kernel_kmeans(K, k, init, seed, n_init, max_iter, X=X,
                         check=not spec.guaranteed_psd)
