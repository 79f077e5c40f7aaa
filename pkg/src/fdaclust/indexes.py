"""Epigraph / hypograph indexes and the multivariate feature matrices built
from them.

All four indexes are computed on the discretized curves, replacing the
Lebesgue measure of a time set by the fraction of grid points in it.
Comparisons are inclusive, so a curve lies inside its own epigraph and
hypograph and ties at a grid point count for both. Values closer than a
small relative tolerance are treated as tied, so curves that agree up to
floating-point round-off (e.g. derivatives of vertically shifted curves)
are not ordered by rounding noise.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .curves import FunctionalSample, SmoothedTriple
from .errors import InvalidArgument

ADMISSIBILITY_THRESHOLD = 1e-5

# relative (to the largest absolute value in the sample) tie tolerance
TIE_RTOL = 1e-9

# bound on the size of the (rows, n, m) comparison block in the EI/HI kernels
_BLOCK_ELEMENTS = 4_000_000


class IndexKind(str, enum.Enum):
    EI = "EI"
    HI = "HI"
    MEI = "MEI"
    MHI = "MHI"


class DataSource(str, enum.Enum):
    ORIGINAL = "_"
    D1 = "d"
    D2 = "d2"

    @property
    def prefix(self) -> str:
        """Column-name prefix as used in result tables (``''``, ``'d'``, ``'d2'``)."""
        return "" if self is DataSource.ORIGINAL else self.value


SOURCE_ORDER = (DataSource.ORIGINAL, DataSource.D1, DataSource.D2)
FAMILIES = ("EIHI", "MEI")

_SOURCES_RE = re.compile(r"^(_)?(d(?!2))?(d2)?$")


def _tie_tol(values: np.ndarray) -> float:
    return TIE_RTOL * float(np.max(np.abs(values))) if values.size else 0.0


def _ge_counts_total(values: np.ndarray) -> np.ndarray:
    """``sum_t #{j : x_j(t) >= x_i(t)}`` for every curve ``i`` (integers)."""
    n, m = values.shape
    tol = _tie_tol(values)
    total = np.zeros(n, dtype=np.int64)
    for col in values.T:
        s = np.sort(col)
        total += n - np.searchsorted(s, col - tol, side="left")
    return total


def _le_counts_total(values: np.ndarray) -> np.ndarray:
    n, m = values.shape
    tol = _tie_tol(values)
    total = np.zeros(n, dtype=np.int64)
    for col in values.T:
        s = np.sort(col)
        total += np.searchsorted(s, col + tol, side="right")
    return total


def _contained_counts(values: np.ndarray, above: bool) -> np.ndarray:
    """Number of curves lying entirely above (or below) each curve."""
    n, m = values.shape
    tol = _tie_tol(values)
    out = np.empty(n, dtype=np.int64)
    step = max(1, _BLOCK_ELEMENTS // max(1, n * m))
    for start in range(0, n, step):
        block = values[start:start + step, None, :]
        if above:
            inside = (values[None, :, :] >= block - tol).all(axis=2)
        else:
            inside = (values[None, :, :] <= block + tol).all(axis=2)
        out[start:start + step] = inside.sum(axis=1)
    return out


def compute_index(kind, sample) -> np.ndarray:
    """Index of every curve with respect to the sample it belongs to.

    Parameters
    ----------
    kind : IndexKind or str
        One of ``EI``, ``HI``, ``MEI``, ``MHI``.
    sample : FunctionalSample or array_like, shape (n, m)

    Returns
    -------
    ndarray, shape (n,)
        ``EI  = 1 - #{j : x_j >= x_i everywhere} / n``
        ``HI  = #{j : x_j <= x_i everywhere} / n``
        ``MEI = 1 - sum_j #{t : x_j(t) >= x_i(t)} / (n m)``
        ``MHI = sum_j #{t : x_j(t) <= x_i(t)} / (n m)``
    """
    kind = IndexKind(kind)
    values = sample.values if isinstance(sample, FunctionalSample) else np.asarray(sample, float)
    if values.ndim != 2 or values.shape[0] < 1:
        raise InvalidArgument("expected an (n, m) array of curves")
    n, m = values.shape
    if kind is IndexKind.EI:
        return (n - _contained_counts(values, above=True)) / n
    if kind is IndexKind.HI:
        return _contained_counts(values, above=False) / n
    if kind is IndexKind.MEI:
        return (n * m - _ge_counts_total(values)) / (n * m)
    return _le_counts_total(values) / (n * m)


def _check_same_grid(samples: Sequence[FunctionalSample]):
    ref = samples[0]
    for s in samples[1:]:
        if not ref.grid.same_as(s.grid) or s.n != ref.n:
            raise InvalidArgument("data sources do not share the grid and sample size")


@dataclass(frozen=True)
class ComboSpec:
    """Which data sources feed which index families.

    Printed and parsed as ``'<sources>.<families>'``, e.g. ``'_.EIHI'``,
    ``'dd2.MEI'`` or ``'_dd2.EIHIMEI'``.
    """

    sources: tuple
    families: frozenset

    def __post_init__(self):
        srcs = tuple(DataSource(s) for s in self.sources)
        if not srcs:
            raise InvalidArgument("a combination needs at least one data source")
        if len(set(srcs)) != len(srcs):
            raise InvalidArgument("repeated data source")
        srcs = tuple(s for s in SOURCE_ORDER if s in srcs)
        fams = frozenset(self.families)
        if not fams or not fams <= set(FAMILIES):
            raise InvalidArgument(f"families must be a non-empty subset of {FAMILIES}")
        if fams == {"MEI"} and len(srcs) < 2:
            raise InvalidArgument("MEI-only combinations need at least two data sources")
        object.__setattr__(self, "sources", srcs)
        object.__setattr__(self, "families", fams)

    @classmethod
    def parse(cls, text: str) -> "ComboSpec":
        text = text.strip()
        src_part, sep, fam_part = text.rpartition(".")
        match = _SOURCES_RE.match(src_part) if sep else None
        if not match or not src_part:
            raise InvalidArgument(f"cannot parse combination {text!r}")
        sources = [SOURCE_ORDER[i] for i, g in enumerate(match.groups()) if g]
        families = {"EIHI": {"EIHI"}, "MEI": {"MEI"},
                    "EIHIMEI": {"EIHI", "MEI"}}.get(fam_part)
        if families is None:
            raise InvalidArgument(f"unknown index family {fam_part!r} in {text!r}")
        return cls(tuple(sources), frozenset(families))

    @property
    def source_label(self) -> str:
        return "".join(s.value for s in self.sources)

    @property
    def family_label(self) -> str:
        return "".join(f for f in FAMILIES if f in self.families)

    @property
    def columns(self) -> list:
        cols = []
        for src in self.sources:
            if "EIHI" in self.families:
                cols += [(IndexKind.EI, src), (IndexKind.HI, src)]
            if "MEI" in self.families:
                cols.append((IndexKind.MEI, src))
        return cols

    @property
    def num_columns(self) -> int:
        return len(self.sources) * (2 * ("EIHI" in self.families)
                                    + ("MEI" in self.families))

    def __str__(self):
        return f"{self.source_label}.{self.family_label}"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """``n x p`` matrix of index values with a descriptor per column."""

    values: np.ndarray
    columns: tuple
    combo: ComboSpec

    @property
    def column_names(self) -> list[str]:
        return [f"{src.prefix}{kind.value}" for kind, src in self.columns]

    @property
    def shape(self):
        return self.values.shape


def enumerate_combos() -> list[ComboSpec]:
    """The eighteen index combinations in a fixed order.

    ``EIHI`` and ``EIHIMEI`` on each of the seven non-empty source subsets,
    then ``MEI`` on the four subsets with at least two sources.
    """
    subsets = [c for r in (1, 2, 3) for c in combinations(SOURCE_ORDER, r)]
    combos = [ComboSpec(s, frozenset({"EIHI"})) for s in subsets]
    combos += [ComboSpec(s, frozenset({"EIHI", "MEI"})) for s in subsets]
    combos += [ComboSpec(s, frozenset({"MEI"})) for s in subsets if len(s) > 1]
    return combos


def assemble_features(triple: SmoothedTriple, combo) -> FeatureMatrix:
    """Evaluate the indexes requested by ``combo`` column by column.

    ``MHI`` is never emitted: it is ``MEI + 1/n`` on tie-free samples.
    """
    if isinstance(combo, str):
        combo = ComboSpec.parse(combo)
    samples = [triple.source(s.value) for s in combo.sources]
    _check_same_grid(samples)
    cache = {}
    cols = []
    for kind, src in combo.columns:
        key = (kind, src)
        if key not in cache:
            cache[key] = compute_index(kind, triple.source(src.value))
        cols.append(cache[key])
    values = np.column_stack(cols)
    return FeatureMatrix(values, tuple(combo.columns), combo)


def admissibility(features) -> tuple[bool, str]:
    """Admissibility verdict with a short reason.

    A matrix is admissible when ``|det(cov(Y))| > 1e-5`` with the unbiased
    (``n - 1``) covariance of its columns.
    """
    y = features.values if isinstance(features, FeatureMatrix) else np.asarray(features, float)
    n, p = y.shape
    if n <= p:
        return False, "insufficient rows"
    cov = np.atleast_2d(np.cov(y, rowvar=False, ddof=1))
    det = abs(float(np.linalg.det(cov)))
    if det > ADMISSIBILITY_THRESHOLD:
        return True, ""
    return False, f"ill-conditioned: |det(cov)| = {det:.3g} <= {ADMISSIBILITY_THRESHOLD:g}"


def admissible(features) -> bool:
    return admissibility(features)[0]
