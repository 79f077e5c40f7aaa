from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidArgument


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster assignment of ``n`` items into ``k`` clusters.

    ``assign[i]`` is in ``range(k)``. Iterative methods also fill in the
    final objective value and its per-iteration history.
    """

    assign: np.ndarray
    k: int
    objective: Optional[float] = None
    history: tuple = field(default=(), repr=False)
    n_iter: int = 0

    def __post_init__(self):
        a = np.asarray(self.assign, dtype=np.int64)
        if a.ndim != 1:
            raise InvalidArgument("assignment must be 1-D")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise InvalidArgument("cluster ids must lie in [0, k)")
        a.setflags(write=False)
        object.__setattr__(self, "assign", a)

    @property
    def n(self) -> int:
        return self.assign.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assign, minlength=self.k)

    @property
    def n_nonempty(self) -> int:
        return int(np.count_nonzero(self.sizes))

    def __len__(self):
        return self.n


def relabel_by_appearance(assign) -> np.ndarray:
    """Rename cluster ids so they appear in increasing order of first use."""
    assign = np.asarray(assign)
    _, first = np.unique(assign, return_index=True)
    order = np.argsort(first, kind="stable")
    mapping = np.empty(order.size, dtype=np.int64)
    mapping[order] = np.arange(order.size)
    _, inverse = np.unique(assign, return_inverse=True)
    return mapping[inverse]


def as_matrix(X) -> np.ndarray:
    X = getattr(X, "values", X)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidArgument("expected an (n, p) data matrix")
    if not np.all(np.isfinite(X)):
        raise InvalidArgument("data matrix contains non-finite values")
    return X


def check_k(k, n):
    if int(k) != k or k < 1:
        raise InvalidArgument(f"k must be a positive integer, got {k!r}")
    if k > n:
        raise InvalidArgument(f"k={k} exceeds the number of items n={n}")
    return int(k)


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
