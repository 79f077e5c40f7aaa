"""External (Purity, F-measure, Rand Index) and internal (silhouette)
cluster validation, and silhouette-based choice of the number of clusters.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .mvclust.base import Partition, as_matrix, make_rng
from .mvclust.hierarchical import pairwise_distances

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalReport:
    purity: float
    fmeasure: float
    rand: float
    time_seconds: float = 0.0


@dataclass(frozen=True)
class KSelection:
    candidates: tuple
    mean_silhouettes: tuple
    chosen: int
    missing: tuple = field(default=())


def _labels(x):
    if isinstance(x, Partition):
        return x.assign
    return np.asarray(x)


def contingency(pred, truth) -> np.ndarray:
    """Counts ``n_ij`` of items in cluster ``i`` and class ``j``."""
    pred, truth = _labels(pred), _labels(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise InvalidArgument(
            f"partition and labels differ in length ({pred.shape} vs {truth.shape})")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max() + 1 if p.size else 0, t.max() + 1 if t.size else 0),
                     dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def purity(pred, truth) -> float:
    """Fraction of items that belong to the majority class of their cluster."""
    table = contingency(pred, truth)
    return float(table.max(axis=1).sum() / table.sum())


def fmeasure(pred, truth) -> float:
    """Class-size weighted best-match F-measure.

    ``F = sum_j (|class j| / n) max_i 2 P_ij R_ij / (P_ij + R_ij)`` with
    precision ``P_ij = n_ij / |cluster i|`` and recall ``R_ij = n_ij / |class j|``.
    """
    table = contingency(pred, truth).astype(float)
    n = table.sum()
    cluster_sizes = table.sum(axis=1, keepdims=True)
    class_sizes = table.sum(axis=0, keepdims=True)
    # 2PR / (P + R) simplifies to 2 n_ij / (|cluster i| + |class j|)
    F = 2 * table / (cluster_sizes + class_sizes)
    return float((class_sizes[0] * F.max(axis=0)).sum() / n)


def rand_index(pred, truth) -> float:
    """Fraction of item pairs on which the two partitions agree."""
    table = contingency(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise InvalidArgument("the Rand index needs at least two items")
    pairs = n * (n - 1) // 2
    both = int((table * (table - 1) // 2).sum())
    same_pred = int((table.sum(axis=1) * (table.sum(axis=1) - 1) // 2).sum())
    same_true = int((table.sum(axis=0) * (table.sum(axis=0) - 1) // 2).sum())
    agree = pairs + 2 * both - same_pred - same_true
    return agree / pairs


def evaluate(pred, truth, time_seconds: float = 0.0) -> EvalReport:
    return EvalReport(purity(pred, truth), fmeasure(pred, truth),
                      rand_index(pred, truth), time_seconds)


def silhouette(X=None, part=None, *, D=None) -> tuple[np.ndarray, float]:
    """Per-item silhouette widths and their mean.

    ``s_i = (b_i - a_i) / max(a_i, b_i)`` with ``a_i`` the mean distance to
    the rest of its cluster and ``b_i`` the smallest mean distance to another
    cluster. Items in singleton clusters get ``s_i = 0``. Pass either the
    data ``X`` (Euclidean distances) or a distance matrix ``D=``.
    """
    if D is None:
        D = pairwise_distances(as_matrix(X))
    D = np.asarray(D, dtype=float)
    assign = _labels(part)
    if assign.shape != (D.shape[0],):
        raise InvalidArgument("partition length does not match the data")
    ids, assign = np.unique(assign, return_inverse=True)
    k = ids.size
    if k < 2:
        raise InvalidArgument("the silhouette needs at least two clusters")
    n = assign.size
    H = np.zeros((n, k))
    H[np.arange(n), assign] = 1.0
    sizes = H.sum(axis=0)
    sums = D @ H
    own = sizes[assign]
    a = np.where(own > 1, sums[np.arange(n), assign] / np.maximum(own - 1, 1), 0.0)
    mean_other = sums / sizes[None, :]
    mean_other[np.arange(n), assign] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.divide(b - a, denom, out=np.zeros(n), where=denom > 0)
    s[own == 1] = 0.0
    return s, float(s.mean())


def select_k(X, cluster: Callable, candidates: Sequence[int] = (2, 3, 4, 5, 6),
             seed=None) -> KSelection:
    """Pick the candidate ``k`` with the largest mean silhouette.

    ``cluster(X, k, seed)`` must return a :class:`Partition`. Candidates
    whose clustering fails are skipped and listed in ``missing``. Ties go
    to the smallest ``k``.
    """
    X = as_matrix(X)
    n = X.shape[0]
    candidates = tuple(int(c) for c in candidates)
    if not candidates:
        raise InvalidArgument("no candidate values of k")
    for c in candidates:
        if not 2 <= c <= n - 1:
            raise InvalidArgument(f"candidate k={c} outside [2, {n - 1}]")
    D = pairwise_distances(X)
    seeds = np.random.SeedSequence(
        make_rng(seed).integers(2 ** 63)).spawn(len(candidates))
    scores, missing = [], []
    for c, ss in zip(candidates, seeds):
        try:
            part = cluster(X, c, np.random.default_rng(ss))
            scores.append(silhouette(part=part, D=D)[1])
        except (InvalidArgument, NumericalFailure) as exc:
            log.info("k=%d skipped: %s", c, exc)
            scores.append(float("nan"))
            missing.append(c)
    arr = np.array(scores)
    if np.all(np.isnan(arr)):
        raise NumericalFailure("clustering failed for every candidate k")
    best = float(np.nanmax(arr))
    chosen = min(c for c, s in zip(candidates, arr) if s == best)
    return KSelection(candidates, tuple(scores), chosen, tuple(missing))
