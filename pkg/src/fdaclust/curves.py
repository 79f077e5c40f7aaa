"""Discretized curve samples and cubic B-spline smoothing.

A :class:`FunctionalSample` holds ``n`` curves observed on a shared grid.
:func:`smooth` fits every curve by least squares in a cubic B-spline basis
and evaluates the fitted spline together with its first and second
derivatives back on the original grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from .errors import InvalidArgument, NumericalFailure

DEGREE = 3


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing, finite sample locations ``t_1 < ... < t_m``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1:
            raise InvalidArgument("grid points must be a 1-D array")
        if pts.size < 4:
            raise InvalidArgument(f"grid needs at least 4 points, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise InvalidArgument("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def linspace(cls, start: float, stop: float, num: int) -> "Grid":
        return cls(np.linspace(start, stop, num))

    @property
    def m(self) -> int:
        return self.points.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.m == other.m and np.array_equal(self.points, other.points))

    def __len__(self):
        return self.m


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """``n`` curves evaluated on a common :class:`Grid`.

    Parameters
    ----------
    values : array_like, shape (n, m)
        Row ``i`` is curve ``x_i`` on the grid.
    grid : Grid
    labels : array_like of int, optional
        True class ids, used only for external validation.
    """

    values: np.ndarray
    grid: Grid
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise InvalidArgument("values must be a 2-D (n, m) array")
        if vals.shape[1] != self.grid.m:
            raise InvalidArgument(
                f"values have {vals.shape[1]} columns but the grid has "
                f"{self.grid.m} points")
        if vals.shape[0] < 2:
            raise InvalidArgument("a functional sample needs at least 2 curves")
        object.__setattr__(self, "values", vals)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (vals.shape[0],):
                raise InvalidArgument(
                    f"labels must have length {vals.shape[0]}, got {labels.shape}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def subset(self, rows) -> "FunctionalSample":
        rows = np.asarray(rows)
        labels = None if self.labels is None else self.labels[rows]
        return FunctionalSample(self.values[rows], self.grid, labels)


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    """Cubic B-spline basis on an open knot vector over the grid span."""

    grid: Grid
    interior_knots: np.ndarray
    degree: int = DEGREE
    knots: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        inner = np.asarray(self.interior_knots, dtype=float)
        lo, hi = self.grid.span
        if np.any(np.diff(inner) < 0):
            raise InvalidArgument("interior knots must be non-decreasing")
        if inner.size and (inner[0] <= lo or inner[-1] >= hi):
            raise InvalidArgument("interior knots must lie inside the grid span")
        object.__setattr__(self, "interior_knots", inner)
        full = np.concatenate([np.full(self.degree + 1, lo), inner,
                               np.full(self.degree + 1, hi)])
        object.__setattr__(self, "knots", full)

    @property
    def num_basis(self) -> int:
        return self.interior_knots.size + self.degree + 1

    def design(self, x=None, nu: int = 0) -> np.ndarray:
        """Matrix of basis functions (or their ``nu``-th derivative) at ``x``.

        Row ``j`` holds every basis function evaluated at ``x[j]``; ``x``
        defaults to the grid.
        """
        x = self.grid.points if x is None else np.asarray(x, dtype=float)
        spl = BSpline(self.knots, np.eye(self.num_basis), self.degree)
        if nu:
            spl = spl.derivative(nu)
        return spl(x)


@dataclass(frozen=True, eq=False)
class SmoothedTriple:
    """A smoothed sample with its first and second derivatives."""

    data: FunctionalSample
    d1: FunctionalSample
    d2: FunctionalSample
    coefficients: Optional[np.ndarray] = None

    @property
    def grid(self) -> Grid:
        return self.data.grid

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def labels(self):
        return self.data.labels

    def source(self, tag: str) -> FunctionalSample:
        """Return the curves for data-source tag ``'_'``, ``'d'`` or ``'d2'``."""
        try:
            return {"_": self.data, "d": self.d1, "d2": self.d2}[tag]
        except KeyError:
            raise InvalidArgument(f"unknown data source {tag!r}") from None


def default_num_basis(m: int) -> int:
    """Default basis size, ``max(4, m // 3)``."""
    return max(4, m // 3)


def make_basis(grid: Grid, num_basis: Optional[int] = None) -> BSplineBasis:
    """Open uniform cubic B-spline basis with ``num_basis`` functions.

    Interior knots are equispaced over ``[t_1, t_m]``.
    """
    if num_basis is None:
        num_basis = default_num_basis(grid.m)
    num_basis = int(num_basis)
    if not DEGREE + 1 <= num_basis <= grid.m:
        raise InvalidArgument(
            f"num_basis must be in [{DEGREE + 1}, {grid.m}], got {num_basis}")
    lo, hi = grid.span
    n_inner = num_basis - DEGREE - 1
    inner = np.linspace(lo, hi, n_inner + 2)[1:-1]
    return BSplineBasis(grid, inner)


def fit_coefficients(values: np.ndarray, design: np.ndarray) -> np.ndarray:
    """Least-squares spline coefficients for every row of ``values``.

    Solved through an economic QR factorization of the design matrix.
    Returns an array of shape ``(n, K)``.
    """
    q, r = linalg.qr(design, mode="economic")
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(design.shape) * np.finfo(float).eps
    if diag.min() <= tol:
        raise NumericalFailure(
            "B-spline design matrix is rank deficient "
            f"(min |R_jj| = {diag.min():.3e}, tolerance {tol:.3e}); "
            "reduce num_basis or check the knot placement")
    rhs = q.T @ values.T
    return linalg.solve_triangular(r, rhs).T


def smooth(sample: FunctionalSample,
           basis: Optional[BSplineBasis] = None) -> SmoothedTriple:
    """Fit each curve by least squares and evaluate value, d/dt and d2/dt2.

    Derivatives come from differentiating the fitted spline, not from
    finite differences. Labels and the grid object are carried over.
    """
    if basis is None:
        basis = make_basis(sample.grid)
    if not basis.grid.same_as(sample.grid):
        raise InvalidArgument("basis was built for a different grid")
    coef = fit_coefficients(sample.values, basis.design())
    grid = sample.grid
    out = [FunctionalSample(coef @ basis.design(nu=nu).T, grid, sample.labels)
           for nu in (0, 1, 2)]
    return SmoothedTriple(*out, coefficients=coef)
