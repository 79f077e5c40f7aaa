"""CSV ingestion and report/plot writers."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ..curves import FunctionalSample, Grid
from ..errors import InvalidArgument

LABEL_COLUMN = "label"


class CSVFormatError(InvalidArgument):
    """Malformed curve file; the message names the offending row/column."""


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def ingest_csv(path, header: Optional[bool] = None) -> FunctionalSample:
    """Read curves stored one per row.

    Parameters
    ----------
    path : str or Path
    header : bool, optional
        Whether the first row holds the grid values (and possibly the
        ``label`` column name). ``None`` detects it: the first row is a
        header when one of its cells is not a number. A purely numeric
        header therefore has to be requested with ``header=True``.

    Returns
    -------
    FunctionalSample
        Grid from the header, or ``0, 1, ..., m-1`` without one. A column
        named ``label`` becomes the labels (integers when all of them are,
        otherwise strings) and is not part of the curves.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh))
                if r and any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError(f"{path}: no data")
    first = [c.strip() for c in rows[0][1]]
    if header is None:
        header = not all(_is_number(c) for c in first)
    label_col = None
    grid_vals = None
    if header:
        names = first
        if LABEL_COLUMN in names:
            label_col = names.index(LABEL_COLUMN)
        grid_cells = [(j, c) for j, c in enumerate(names) if j != label_col]
        try:
            grid_vals = [float(c) for _, c in grid_cells]
        except ValueError:
            bad = next(j for j, c in grid_cells if not _is_number(c))
            raise CSVFormatError(
                f"{path}: row {rows[0][0]}, column {bad + 1}: header cell "
                f"{names[bad]!r} is not a grid value") from None
        rows = rows[1:]
        width = len(names)
    else:
        width = len(first)
    if not rows:
        raise CSVFormatError(f"{path}: header but no curves")
    values, labels = [], []
    for lineno, row in rows:
        if len(row) != width:
            raise CSVFormatError(
                f"{path}: row {lineno} has {len(row)} fields, expected {width}")
        vals = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == label_col:
                labels.append(cell)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise CSVFormatError(
                    f"{path}: row {lineno}, column {j + 1}: cannot parse {cell!r} "
                    f"as a number") from None
            if not math.isfinite(v):
                raise CSVFormatError(
                    f"{path}: row {lineno}, column {j + 1}: non-finite value {cell!r}")
            vals.append(v)
        values.append(vals)
    values = np.array(values)
    m = values.shape[1]
    grid = Grid(np.array(grid_vals)) if grid_vals is not None else Grid(np.arange(m, dtype=float))
    lab = None
    if label_col is not None:
        lab = np.array([int(x) for x in labels]) if all(
            x.lstrip("-").isdigit() for x in labels) else np.array(labels)
    return FunctionalSample(values, grid, lab)


def write_sample_csv(sample: FunctionalSample, path) -> None:
    """Write curves with a grid header row and, if present, a ``label`` column.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_sample(sample, path)
        return
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        _write_sample(sample, fh)


def _write_sample(sample: FunctionalSample, fh) -> None:
    w = csv.writer(fh)
    head = [repr(float(t)) for t in sample.grid.points]
    if sample.labels is not None:
        head.append(LABEL_COLUMN)
    w.writerow(head)
    for i, row in enumerate(sample.values):
        out = [repr(float(v)) for v in row]
        if sample.labels is not None:
            out.append(str(sample.labels[i]))
        w.writerow(out)


def _fmt(v, digits=3) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def format_table(header: Sequence[str], rows: Iterable[Sequence], digits: int = 3) -> str:
    """Aligned plain-text table; floats rounded, NaN shown as ``NA``."""
    cells = [[_fmt(v, digits) for v in r] for r in rows]
    widths = [max([len(h)] + [len(r[j]) for r in cells]) for j, h in enumerate(header)]
    line = lambda r: "  ".join(c.ljust(w) if j == 0 else c.rjust(w)
                               for j, (c, w) in enumerate(zip(r, widths))).rstrip()
    out = [line(header), line(["-" * w for w in widths])]
    out += [line(r) for r in cells]
    return "\n".join(out)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow(["NA" if isinstance(v, float) and math.isnan(v) else v for v in r])


def plot_scenario(triple, features, path, title: str = "") -> None:
    """SVG with the smoothed curves, derivatives and (EI, HI) / MEI scatter plots."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = triple.labels
    groups = np.unique(labels) if labels is not None else np.array([0])
    colors = plt.get_cmap("tab10")
    fig, axes = plt.subplots(2, 3, figsize=(12, 7))
    t = triple.grid.points
    for ax, tag, name in zip(axes[0], ("_", "d", "d2"), ("curves", "first derivatives",
                                                        "second derivatives")):
        vals = triple.source(tag).values
        for gi, g in enumerate(groups):
            rows = vals if labels is None else vals[labels == g]
            ax.plot(t, rows.T, color=colors(gi % 10), lw=0.5, alpha=0.6)
        ax.set_title(name)
    for ax, tag in zip(axes[1], ("_", "d", "d2")):
        cols = features.get(tag)
        if cols is None:
            ax.axis("off")
            continue
        for gi, g in enumerate(groups):
            m = slice(None) if labels is None else labels == g
            ax.scatter(cols[0][m], cols[1][m], s=8, color=colors(gi % 10))
        ax.set_xlabel("EI")
        ax.set_ylabel("HI")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
