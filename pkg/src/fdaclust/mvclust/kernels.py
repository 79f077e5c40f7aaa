from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import InvalidArgument
from .base import as_matrix


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and parameters.

    ``gaussian``: ``exp(-|x - y|^2 / (2 sigma^2))``; ``sigma=None`` means the
    median of the non-zero pairwise distances of the data at hand.
    ``polynomial``: ``(scale <x, y> + offset) ** degree``.
    ``linear``: ``<x, y>``.
    """

    kind: str = "gaussian"
    sigma: Optional[float] = None
    degree: int = 2
    scale: float = 1.0
    offset: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "polynomial", "linear"):
            raise InvalidArgument(f"unknown kernel {self.kind!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise InvalidArgument("sigma must be positive")
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidArgument("degree must be an integer >= 1")

    @classmethod
    def gaussian(cls, sigma=None):
        return cls("gaussian", sigma=sigma)

    @classmethod
    def polynomial(cls, degree=2, scale=1.0, offset=1.0):
        return cls("polynomial", degree=degree, scale=scale, offset=offset)

    @classmethod
    def linear(cls):
        return cls("linear")

    @property
    def guaranteed_psd(self) -> bool:
        return self.kind != "polynomial"


def _sq_dists(X):
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(sq, 0.0)
    return sq


def median_heuristic(X) -> float:
    """Median of the non-zero pairwise Euclidean distances (1.0 if none)."""
    X = as_matrix(X)
    d = np.sqrt(_sq_dists(X)[np.triu_indices(X.shape[0], 1)])
    d = d[d > 0]
    return float(np.median(d)) if d.size else 1.0


def kernel_matrix(X, spec: KernelSpec = KernelSpec()) -> np.ndarray:
    X = as_matrix(X)
    if spec.kind == "linear":
        return X @ X.T
    if spec.kind == "polynomial":
        return (spec.scale * (X @ X.T) + spec.offset) ** spec.degree
    sigma = spec.sigma if spec.sigma is not None else median_heuristic(X)
    return np.exp(-_sq_dists(X) / (2.0 * sigma ** 2))


def check_psd(K: np.ndarray, rtol: float = 1e-8):
    """Raise :class:`InvalidArgument` unless ``K`` is symmetric PSD."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidArgument("kernel matrix must be square")
    scale = max(1.0, float(np.abs(K).max()))
    if not np.allclose(K, K.T, rtol=0, atol=1e-10 * scale):
        raise InvalidArgument("kernel matrix must be symmetric")
    eig = np.linalg.eigvalsh((K + K.T) / 2)
    if eig[0] < -rtol * max(eig[-1], 0.0) and eig[0] < 0:
        raise InvalidArgument(
            f"kernel matrix is not positive semidefinite "
            f"(min eigenvalue {eig[0]:.3e}, max {eig[-1]:.3e})")
