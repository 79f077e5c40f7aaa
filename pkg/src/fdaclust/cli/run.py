"""Monte Carlo driver: scenario grids, benchmarks and cluster-count selection."""

from __future__ import annotations

import logging
import math
import time
import zlib
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ..benchkm import FKMDistance, TBConfig, TBInit, fkmeans, tb_kmeans, tb_method_name
from ..curves import FunctionalSample, make_basis, smooth
from ..errors import InvalidArgument, NumericalFailure
from ..indexes import ComboSpec, admissibility, assemble_features, enumerate_combos
from ..metrics import KSelection, evaluate, select_k
from ..mvclust import MethodSpec, default_methods, format_method_name, kmeans
from ..simgen import get_scenario, gen_scenario

log = logging.getLogger(__name__)

DEFAULT_BENCH = ("fkm-L2", "fkm-dK:2", "fkm-dK:3") + tuple(
    tb_method_name(i) for i in TBInit)


@dataclass(frozen=True)
class RunConfig:
    """What to run.

    Exactly one of ``scenario`` (a simulation catalog name) and ``input``
    (a :class:`FunctionalSample` or CSV path, clustered once) is set.
    ``k=None`` uses the number of groups of the scenario or the number of
    distinct labels; ``k='auto'`` picks it by silhouette for every cell.
    ``methods`` entries are method keys (``'kmeans'``, ``'kmeans:mahalanobis'``,
    ``'kkmeans:polynomial'``) and ``combos`` entries combination strings.
    """

    scenario: Optional[str] = None
    input: object = None
    replications: int = 100
    k: Union[int, str, None] = None
    methods: Optional[tuple] = None
    combos: Optional[tuple] = None
    basis_size: Optional[int] = None
    kernel_params: dict = field(default_factory=dict, compare=False, hash=False)
    seed: int = 0
    per_group: Optional[int] = None
    workers: int = 1
    gamma: float = 1.65
    window: int = 5
    candidates: tuple = (2, 3, 4, 5, 6)

    def __post_init__(self):
        if (self.scenario is None) == (self.input is None):
            raise InvalidArgument("give exactly one of scenario and input")
        if int(self.replications) < 1:
            raise InvalidArgument("replications must be at least 1")
        if self.k is not None and self.k != "auto" and int(self.k) < 2:
            raise InvalidArgument("k must be at least 2 (or 'auto')")
        if self.scenario is not None:
            get_scenario(self.scenario)

    def method_specs(self) -> list[MethodSpec]:
        if not self.methods:
            return default_methods(self.kernel_params)
        out = []
        for text in self.methods:
            spec = MethodSpec.parse(text)
            out.append(MethodSpec(spec.name, spec.variant, spec.init, dict(self.kernel_params)))
        return out

    def combo_specs(self) -> list[ComboSpec]:
        if not self.combos:
            return enumerate_combos()
        return [ComboSpec.parse(c) for c in self.combos]


@dataclass(frozen=True)
class ReportRow:
    name: str
    variant: str
    purity: float
    fmeasure: float
    rand: float
    time: float
    ok: int = 0
    reason: str = ""


@dataclass(frozen=True)
class RunReport:
    """Rows ranked by mean Rand index (missing cells last, with a reason)."""

    rows: tuple
    replications: int
    title: str = ""

    HEADER = ("method", "variant", "purity", "fmeasure", "rand", "time", "ok", "reason")

    def row(self, name: str, variant: Optional[str] = None) -> ReportRow:
        for r in self.rows:
            if r.name == name and (variant is None or r.variant == variant):
                return r
        raise KeyError(name)

    def as_tuples(self):
        return [(r.name, r.variant, r.purity, r.fmeasure, r.rand, r.time, r.ok, r.reason)
                for r in self.rows]


def _sort_rows(rows) -> tuple:
    def key(r):
        missing = math.isnan(r.rand)
        return (missing, 0.0 if missing else -r.rand, r.name, r.variant)
    return tuple(sorted(rows, key=key))


def replication_seed(master: int, rep: int, *tags: str) -> np.random.SeedSequence:
    """Counter-based seed for replication ``rep`` and a named cell.

    The key only depends on the replication number and the cell name, so
    adding or dropping cells leaves the other cells' streams unchanged.
    """
    key = (int(rep),) + tuple(zlib.crc32(t.encode()) for t in tags)
    return np.random.SeedSequence(int(master), spawn_key=key)


def cell_rng(master, rep, *tags) -> np.random.Generator:
    """Generator seeded by :func:`replication_seed`."""
    return np.random.default_rng(replication_seed(master, rep, *tags))


def load_sample(config: RunConfig, rep: int) -> FunctionalSample:
    if config.scenario is not None:
        spec = get_scenario(config.scenario, config.per_group)
        return gen_scenario(spec, seed=replication_seed(config.seed, rep, "data"))
    if isinstance(config.input, FunctionalSample):
        return config.input
    from .io import ingest_csv
    return ingest_csv(config.input)


def target_k(config: RunConfig, sample: FunctionalSample):
    if config.k == "auto":
        return "auto"
    if config.k is not None:
        return int(config.k)
    if config.scenario is not None:
        return get_scenario(config.scenario).k
    if sample.labels is None:
        raise InvalidArgument("k is required for unlabeled input")
    return int(np.unique(sample.labels).size)


def _cluster_timed(run, X, k, rng, candidates):
    if k == "auto":
        sel = select_k(X, lambda Z, c, r: run(Z, c, r), candidates, seed=rng)
        k = sel.chosen
    t0 = time.perf_counter()
    part = run(X, k, rng)
    return part, time.perf_counter() - t0


def _one_replication(config: RunConfig, rep: int) -> dict:
    """``{(name, variant): (purity, fmeasure, rand, time) or reason string}``."""
    sample = load_sample(config, rep)
    if sample.labels is None:
        raise InvalidArgument("external validation needs labelled curves")
    k = target_k(config, sample)
    triple = smooth(sample, make_basis(sample.grid, config.basis_size))
    methods = config.method_specs()
    out = {}
    for combo in config.combo_specs():
        F = assemble_features(triple, combo)
        ok, reason = admissibility(F)
        for m in methods:
            cell = (format_method_name(m, combo), m.key.split(":", 1)[1])
            if not ok:
                out[cell] = f"inadmissible: {reason}"
                continue
            try:
                part, secs = _cluster_timed(m.run, F.values, k,
                                            cell_rng(config.seed, rep, m.key, str(combo)),
                                            config.candidates)
                e = evaluate(part, sample.labels)
                out[cell] = (e.purity, e.fmeasure, e.rand, secs)
            except (InvalidArgument, NumericalFailure) as exc:
                out[cell] = f"{type(exc).__name__}: {exc}"
    return out


def _aggregate(per_rep: Sequence[dict], reps: int, title: str) -> RunReport:
    cells = {}
    for res in per_rep:
        for key, val in res.items():
            cells.setdefault(key, []).append(val)
    rows = []
    for (name, variant), vals in cells.items():
        good = [v for v in vals if not isinstance(v, str)]
        bad = Counter(v for v in vals if isinstance(v, str))
        reason = "; ".join(f"{msg} ({c}/{len(vals)})" for msg, c in bad.most_common())
        if good:
            arr = np.array(good)
            means = arr.mean(axis=0)
            rows.append(ReportRow(name, variant, *map(float, means), len(good), reason))
        else:
            nan = float("nan")
            rows.append(ReportRow(name, variant, nan, nan, nan, nan, 0, reason or "failed"))
    return RunReport(_sort_rows(rows), reps, title)


def _map_reps(fn, config: RunConfig):
    reps = range(int(config.replications)) if config.scenario is not None else range(1)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(fn, [config] * len(reps), reps))
    return [fn(config, r) for r in reps]


def _title(config: RunConfig) -> str:
    return get_scenario(config.scenario).name if config.scenario else str(config.input)


def run_scenario(config: RunConfig) -> RunReport:
    """Mean Purity, F-measure, Rand index and clustering time of every
    (method, combination) cell over the replications.

    Inadmissible combinations and failed runs are recorded per cell; a
    cell that never succeeded becomes an ``NA`` row carrying the reason.
    """
    per_rep = _map_reps(_one_replication, config)
    n = len(per_rep)
    return _aggregate(per_rep, n, _title(config))


# ------------------------------------------------------------- benchmarks

def _bench_replication(config: RunConfig, rep: int, names=None) -> dict:
    sample = load_sample(config, rep)
    if sample.labels is None:
        raise InvalidArgument("external validation needs labelled curves")
    k = target_k(config, sample)
    if k == "auto":
        raise InvalidArgument("benchmark methods need a fixed k")
    smoothed = None
    tb_cfg = TBConfig(window=config.window, gamma=config.gamma)
    out = {}
    for name in names or config.methods or DEFAULT_BENCH:
        rng = cell_rng(config.seed, rep, name)
        try:
            t0 = time.perf_counter()
            if name.startswith("fkm-"):
                if smoothed is None:
                    smoothed = smooth(sample, make_basis(sample.grid, config.basis_size)).data
                t0 = time.perf_counter()
                part = fkmeans(smoothed, k, FKMDistance.parse(name[4:]), seed=rng)
            elif name.startswith("tbkm-"):
                part = tb_kmeans(sample, k, name[5:], tb_cfg, seed=rng)
            else:
                raise InvalidArgument(f"unknown benchmark method {name!r}")
            secs = time.perf_counter() - t0
            e = evaluate(part, sample.labels)
            out[(name, "")] = (e.purity, e.fmeasure, e.rand, secs)
        except (InvalidArgument, NumericalFailure) as exc:
            if "unknown benchmark" in str(exc):
                raise
            out[(name, "")] = f"{type(exc).__name__}: {exc}"
    return out


def run_bench(config: RunConfig) -> RunReport:
    """Functional k-means and test-based k-means over the replications.

    ``config.methods`` takes benchmark names (``fkm-L2``, ``fkm-dK:<K>``,
    ``tbkm-<init>``); functional k-means works on the smoothed curves,
    test-based k-means on the raw grid values.
    """
    per_rep = _map_reps(_bench_replication, config)
    return _aggregate(per_rep, len(per_rep), _title(config))


# ------------------------------------------------------------ select k

@dataclass(frozen=True)
class SelectKReport:
    candidates: tuple
    counts: dict
    selections: tuple
    combo: str

    @property
    def replications(self) -> int:
        return len(self.selections)


def _default_combo(config: RunConfig) -> ComboSpec:
    if config.combos:
        return ComboSpec.parse(config.combos[0])
    if config.scenario is not None:
        return ComboSpec.parse(get_scenario(config.scenario).default_combo)
    return ComboSpec.parse("_.EIHI")


def _select_k_replication(config: RunConfig, rep: int) -> KSelection:
    sample = load_sample(config, rep)
    triple = smooth(sample, make_basis(sample.grid, config.basis_size))
    F = assemble_features(triple, _default_combo(config))
    run = lambda X, k, rng: kmeans(X, k, seed=rng)
    return select_k(F.values, run, config.candidates, seed=cell_rng(config.seed, rep, "select-k"))


def select_k_cmd(config: RunConfig) -> SelectKReport:
    """Silhouette choice of ``k`` per replication with k-means on the
    scenario's default combination; returns the histogram of choices."""
    sels = tuple(_map_reps(_select_k_replication, config))
    counts = Counter(s.chosen for s in sels)
    cands = tuple(int(c) for c in config.candidates)
    return SelectKReport(cands, {c: counts.get(c, 0) for c in cands}, sels,
                         str(_default_combo(config)))
