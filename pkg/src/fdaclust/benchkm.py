"""Reference curve-clustering methods used as benchmarks.

* Functional k-means with the L2 distance or the truncated Mahalanobis
  distance ``d_K`` built from the empirical functional principal
  components.
* Test-based k-means, which allocates each curve to a center from a
  parallelism statistic ``T`` and a mean-equality statistic ``W``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import FunctionalSample, Grid
from .errors import DegeneratePair, InvalidArgument, NumericalFailure
from .mvclust.base import Partition, check_k, make_rng, relabel_by_appearance
from .mvclust.hierarchical import hclust
from .mvclust.kmeans import kmeans, kmeanspp_init

log = logging.getLogger(__name__)

EIGEN_RTOL = 1e-12
# residual spread below this fraction of the curve magnitude counts as constant
ROUNDOFF_RTOL = 1e-12


def quadrature_weights(grid) -> np.ndarray:
    """Trapezoidal rule weights on the grid points."""
    t = grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=float)
    w = np.zeros_like(t)
    dt = np.diff(t)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def _values(sample) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(sample, FunctionalSample):
        return sample.values, sample.grid.points
    X = np.asarray(sample, dtype=float)
    if X.ndim != 2:
        raise InvalidArgument("expected an (n, m) array of curves")
    return X, np.linspace(0.0, 1.0, X.shape[1])


def l2_distance(x, y, grid) -> float:
    """``||x - y||`` in L2 by trapezoidal quadrature."""
    w = quadrature_weights(grid)
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(np.sqrt(np.sum(w * d * d)))


# ---------------------------------------------------------------- FPCA

@dataclass(frozen=True)
class FPCADecomposition:
    """Eigen-decomposition of the empirical covariance operator.

    ``eigenfunctions[l]`` is ``phi_l`` on the grid, orthonormal under the
    trapezoidal weights ``weights``.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    mean: np.ndarray
    weights: np.ndarray

    @classmethod
    def fit(cls, sample) -> "FPCADecomposition":
        X, t = _values(sample)
        if X.shape[0] < 2:
            raise InvalidArgument("FPCA needs at least two curves")
        w = quadrature_weights(t)
        if np.any(w <= 0):
            raise InvalidArgument("grid points must be strictly increasing")
        sw = np.sqrt(w)
        C = np.cov(X, rowvar=False, ddof=1)
        # symmetric form of the discretized integral operator
        lam, V = np.linalg.eigh(sw[:, None] * C * sw[None, :])
        order = np.argsort(lam)[::-1]
        lam = np.clip(lam[order], 0.0, None)
        phi = (V[:, order] / sw[:, None]).T
        return cls(lam, phi, X.mean(axis=0), w)

    def scores(self, X, num: Optional[int] = None) -> np.ndarray:
        """Inner products ``<x - mean, phi_l>`` for the first ``num`` components."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        phi = self.eigenfunctions if num is None else self.eigenfunctions[:num]
        return (X - self.mean) @ (self.weights[:, None] * phi.T)

    def reconstruct(self, scores) -> np.ndarray:
        scores = np.atleast_2d(scores)
        return self.mean + scores @ self.eigenfunctions[:scores.shape[1]]

    @property
    def rank(self) -> int:
        lam = self.eigenvalues
        return int(np.count_nonzero(lam > EIGEN_RTOL * max(lam[0], 0.0))) if lam[0] > 0 else 0

    def check_truncation(self, K: int) -> None:
        if not 1 <= K <= self.eigenvalues.size:
            raise InvalidArgument(f"K must be in [1, {self.eigenvalues.size}], got {K}")
        if K > self.rank:
            raise NumericalFailure(
                f"eigenvalue {K} is below {EIGEN_RTOL:g} times the largest; K too large")

    def mahalanobis_coordinates(self, X, K: int) -> np.ndarray:
        """Scores divided by ``sqrt(lambda_l)``; Euclidean distance between
        these coordinates is ``d_K``."""
        self.check_truncation(K)
        return self.scores(X, K) / np.sqrt(self.eigenvalues[:K])


def dk_distance(x, y, fpca: FPCADecomposition, K: int) -> float:
    """Truncated Mahalanobis distance ``sqrt(sum_l <x-y, phi_l>^2 / lambda_l)``."""
    fpca.check_truncation(K)
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    proj = (fpca.weights * d) @ fpca.eigenfunctions[:K].T
    return float(np.sqrt(np.sum(proj ** 2 / fpca.eigenvalues[:K])))


# ----------------------------------------------------- functional k-means

@dataclass(frozen=True)
class FKMDistance:
    """``FKMDistance('L2')`` or ``FKMDistance('dK', K)``."""

    kind: str = "L2"
    K: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("L2", "dK"):
            raise InvalidArgument(f"unknown functional distance {self.kind!r}")
        if self.kind == "dK" and (self.K is None or int(self.K) < 1):
            raise InvalidArgument("the truncated Mahalanobis distance needs K >= 1")

    @classmethod
    def parse(cls, text: str) -> "FKMDistance":
        """``'L2'`` or ``'dK:<K>'``."""
        text = text.strip()
        if text.upper() == "L2":
            return cls("L2")
        head, _, num = text.partition(":")
        if head.lower() == "dk" and num.strip().isdigit():
            return cls("dK", int(num))
        raise InvalidArgument(f"cannot parse functional distance {text!r}")

    @property
    def name(self) -> str:
        return "fkm-L2" if self.kind == "L2" else f"fkm-dK:{self.K}"


def fkmeans(sample, k: int, distance="L2", seed=None, n_init: int = 10,
            max_iter: int = 100) -> Partition:
    """Lloyd k-means on curves with pointwise-mean centroids.

    Both distances are Euclidean in suitable coordinates (``sqrt(w) * x``
    for L2, whitened FPCA scores for ``d_K``), and the pointwise mean of
    curves maps to the mean of those coordinates, so the Lloyd engine of
    :func:`~fdaclust.mvclust.kmeans` runs unchanged. The FPCA is computed
    once from the whole sample.
    """
    dist = FKMDistance.parse(distance) if isinstance(distance, str) else distance
    X, t = _values(sample)
    k = check_k(k, X.shape[0])
    if dist.kind == "L2":
        Y = X * np.sqrt(quadrature_weights(t))[None, :]
    else:
        Y = FPCADecomposition.fit(sample).mahalanobis_coordinates(X, dist.K)
    return kmeans(Y, k, seed=seed, n_init=n_init, max_iter=max_iter)


# ---------------------------------------------------- test-based k-means

@dataclass(frozen=True)
class TBConfig:
    """Settings of test-based k-means.

    window : odd number of grid points in each augmented ANOVA cell.
    gamma : rejection threshold for ``T`` and ``W``.
    max_iter : cap on reallocation rounds.
    """

    window: int = 5
    gamma: float = 1.65
    max_iter: int = 50

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 3 or self.window % 2 == 0:
            raise InvalidArgument(f"window must be an odd integer >= 3, got {self.window}")
        if not self.gamma > 0:
            raise InvalidArgument(f"gamma must be positive, got {self.gamma}")
        if self.max_iter < 1:
            raise InvalidArgument("max_iter must be at least 1")


class TBInit(str, enum.Enum):
    RANDOM = "random"
    KMEANS = "kmeansInit"
    WARD = "wardInit"
    KMEANS_PP = "kmeansPlusPlus"


def _window_matrix(r: int, window: int) -> np.ndarray:
    """``M[j, s] = 1`` if grid point ``s`` belongs to cell ``j``
    (``|j - s| <= (window - 1) / 2``, clipped at the ends)."""
    half = (window - 1) // 2
    idx = np.arange(r)
    return (np.abs(idx[:, None] - idx[None, :]) <= half).astype(float)


def _t_statistic(resid: np.ndarray, window: int, scale=None) -> np.ndarray:
    """Vectorized ``T`` over the last axis of ``resid``.

    ``scale`` is the magnitude of the curves the residuals came from;
    residuals that are constant up to rounding relative to it get ``T = 0``.
    """
    r = resid.shape[-1]
    if r < window + 4:
        raise InvalidArgument(f"need at least window + 4 = {window + 4} grid points, got {r}")
    M = _window_matrix(r, window)
    sizes = M.sum(axis=1)
    N = sizes.sum()
    cell_sum = resid @ M.T
    cell_sq = (resid ** 2) @ M.T
    cell_mean = cell_sum / sizes
    grand = cell_sum.sum(axis=-1, keepdims=True) / N
    mst = (sizes * (cell_mean - grand) ** 2).sum(axis=-1) / (r - 1)
    mse = (cell_sq - sizes * cell_mean ** 2).sum(axis=-1) / (N - r)
    d = np.diff(resid, axis=-1)
    # (xi_s - xi_{s-1}) (xi_{s+2} - xi_{s+1}) for s = 2..r-2 (1-based)
    tau2 = (d[..., :r - 3] ** 2 * d[..., 2:] ** 2).sum(axis=-1) / (4.0 * (r - 3))
    mag = scale
    scale = np.sqrt(2.0 * window * (2 * window - 1) / (3.0 * (window - 1)))
    num = np.abs(np.sqrt(r) * (mst - mse))
    # round-off level numerators count as exact zeros
    num = np.where(num <= 1e-12 * np.sqrt(r) * (np.abs(mst) + np.abs(mse) + 1e-300), 0.0, num)
    tau = np.sqrt(tau2)
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.where(tau > 0, num / (tau * scale), np.where(num == 0, 0.0, np.inf))
    if mag is not None:
        spread = resid.max(axis=-1) - resid.min(axis=-1)
        T = np.where(spread <= ROUNDOFF_RTOL * mag, 0.0, T)
    return T


def tb_parallelism_T(curve, center, config: TBConfig = TBConfig()) -> float:
    """Parallelism statistic of the residual ``curve - center``.

    The residuals form a one-way ANOVA whose cell ``j`` holds the residuals
    at the ``window`` grid points around ``j``. ``T = |sqrt(r) (MST - MSE)|
    / (tau sqrt(2 w (2w - 1) / (3 (w - 1))))`` with ``w`` the window and
    ``tau^2`` a difference-based variance estimate. A residual with
    ``tau = 0`` gives ``T = 0`` when ``MST = MSE`` and ``inf`` otherwise.
    """
    x = np.asarray(curve, dtype=float)
    c = np.asarray(center, dtype=float)
    resid = x - c
    if resid.ndim != 1:
        raise InvalidArgument("curve and center must be 1-D and share the grid")
    mag = max(np.abs(x).max(), np.abs(c).max())
    return float(_t_statistic(resid, config.window, mag))


def _w_statistic(X: np.ndarray, C: np.ndarray):
    r = X.shape[-1]
    num = np.abs(X.mean(axis=-1) - C.mean(axis=-1))
    var = (X.var(axis=-1, ddof=1) + C.var(axis=-1, ddof=1)) / r
    return num, var


def tb_mean_W(curve, center) -> float:
    """Two-sample t statistic ``|mean(x) - mean(c)| / sqrt((V(x) + V(c)) / r)``.

    Raises :class:`DegeneratePair` when both variances vanish.
    """
    x = np.asarray(curve, dtype=float)
    c = np.asarray(center, dtype=float)
    if x.shape != c.shape or x.ndim != 1 or x.size < 2:
        raise InvalidArgument("curve and center must be 1-D, of equal length >= 2")
    num, var = _w_statistic(x, c)
    if var <= 0:
        raise DegeneratePair("both curve and center are constant")
    return float(num / np.sqrt(var))


def psi_scores(T: np.ndarray, W: np.ndarray, gamma: float) -> np.ndarray:
    """Allocation scores ``Psi`` of one curve against each center.

    * at least two ``T < gamma`` and at most one ``W < gamma``: ``Psi = W``
    * at least two ``W < gamma`` and at most one ``T < gamma``: ``Psi = T``
    * otherwise ``Psi = T / (2 max T) + W / (2 max W)``
    """
    T = np.asarray(T, dtype=float)
    W = np.asarray(W, dtype=float)
    nt = int(np.count_nonzero(T < gamma))
    nw = int(np.count_nonzero(W < gamma))
    if nt >= 2 and nw <= 1:
        return W.copy()
    if nw >= 2 and nt <= 1:
        return T.copy()
    return 0.5 * _normalized(T) + 0.5 * _normalized(W)


def _normalized(v: np.ndarray) -> np.ndarray:
    finite = v[np.isfinite(v)]
    top = finite.max() if finite.size else 0.0
    if top <= 0:
        return np.where(np.isfinite(v), 0.0, 1.0)
    return np.where(np.isfinite(v), v / top, np.inf)


def _initial_centers(X, k, init, rng):
    n = X.shape[0]
    if init is TBInit.RANDOM:
        return X[rng.choice(n, size=k, replace=False)].copy()
    if init is TBInit.KMEANS_PP:
        return X[kmeanspp_init(X, k, rng)].copy()
    if init is TBInit.KMEANS:
        # one Lloyd step from random seeds
        assign = kmeans(X, k, init="forgy", seed=rng, n_init=1, max_iter=1).assign
    else:
        assign = hclust(X, k, "ward.D2").assign
    return np.vstack([X[assign == p].mean(axis=0) for p in range(k)])


def _allocate(X, centers, config, current):
    resid = X[:, None, :] - centers[None, :, :]
    mag = np.maximum(np.abs(X).max(axis=1)[:, None], np.abs(centers).max(axis=1)[None, :])
    T = _t_statistic(resid, config.window, mag)
    num, var = _w_statistic(X[:, None, :], centers[None, :, :])
    degenerate = var <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        W = np.where(degenerate, np.inf, num / np.sqrt(np.where(degenerate, 1.0, var)))
    if degenerate.all():
        raise NumericalFailure("every (curve, center) pair is degenerate")
    assign = current.copy()
    for i in range(X.shape[0]):
        ok = ~degenerate[i]
        if not ok.any():
            continue
        psi = np.full(centers.shape[0], np.inf)
        psi[ok] = psi_scores(T[i, ok], W[i, ok], config.gamma)
        if np.all(np.isinf(psi)):
            continue
        assign[i] = int(np.argmin(psi))
    return assign


def tb_kmeans(sample, k: int, init="kmeansPlusPlus", config: TBConfig = TBConfig(),
              seed=None) -> Partition:
    """Test-based k-means on raw grid values.

    Centers are pointwise means of their members; a cluster that empties
    keeps its previous center. Stops when the assignment repeats an earlier
    one (fixpoint or cycle) or after ``config.max_iter`` rounds.
    """
    X, _ = _values(sample)
    n = X.shape[0]
    k = check_k(k, n)
    init = TBInit(init)
    if k == 1:
        return Partition(np.zeros(n, dtype=np.int64), 1)
    rng = make_rng(seed)
    centers = _initial_centers(X, k, init, rng)
    assign = _allocate(X, centers, config, np.zeros(n, dtype=np.int64))
    seen = {assign.tobytes()}
    n_iter = 1
    for n_iter in range(1, config.max_iter + 1):
        for p in range(k):
            members = assign == p
            if members.any():
                centers[p] = X[members].mean(axis=0)
        new = _allocate(X, centers, config, assign)
        if new.tobytes() in seen:
            if not np.array_equal(new, assign):
                log.debug("test-based k-means cycled after %d rounds", n_iter)
            assign = new
            break
        seen.add(new.tobytes())
        assign = new
    return Partition(relabel_by_appearance(assign), k, n_iter=n_iter)


def tb_method_name(init) -> str:
    return f"tbkm-{TBInit(init).value}"
