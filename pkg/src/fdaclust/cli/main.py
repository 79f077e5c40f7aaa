"""Command-line entry point.

Every option can also come from a ``--config`` file of ``key = value``
lines (``#`` starts a comment) using the long option names without the
dashes, e.g. ``scenario = S 1-4`` or ``basis-size = 10``. Options given
on the command line win over the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..curves import make_basis, smooth
from ..errors import InvalidArgument, NumericalFailure
from ..indexes import (ComboSpec, DataSource, IndexKind, admissibility, assemble_features,
                       compute_index, enumerate_combos)
from ..metrics import evaluate, select_k
from ..mvclust import MethodSpec
from ..simgen import gen_scenario, get_scenario
from .io import format_table, ingest_csv, plot_scenario, write_csv, write_sample_csv
from .run import (DEFAULT_BENCH, RunConfig, RunReport, load_sample, cell_rng,
                  replication_seed, run_bench, run_scenario, select_k_cmd, target_k)

log = logging.getLogger("fdaclust")

# options that a config file may set, with their argparse destinations
_CONFIG_KEYS = {
    "scenario": "scenario", "input": "input", "reps": "reps", "k": "k", "seed": "seed",
    "basis-size": "basis_size", "methods": "methods", "combos": "combos",
    "gamma": "gamma", "window": "window", "out": "out", "per-group": "per_group",
    "workers": "workers", "candidates": "candidates", "sigma": "sigma",
    "degree": "degree", "header": "header", "eps": "eps",
}

def read_config(path) -> dict:
    """Parse a flat ``key = value`` file into argparse destinations."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-")
        if not sep or key not in _CONFIG_KEYS:
            raise InvalidArgument(f"{path}:{lineno}: cannot use {raw.strip()!r}")
        out[_CONFIG_KEYS[key]] = value.strip()
    return out

def _csv_list(text):
    if text is None:
        return None
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    return tuple(items) or None

def _k_value(text):
    if text is None:
        return None
    return "auto" if str(text) == "auto" else int(text)

def _add_common(p, *, scenario=True, grid=True):
    if scenario:
        p.add_argument("--scenario", help="simulation scenario, e.g. 'S 1-4'")
        p.add_argument("--input", help="CSV file with one curve per row")
        p.add_argument("--header", choices=("auto", "yes", "no"),
                       help="whether the CSV's first row is the grid (default: auto)")
        p.add_argument("--reps", type=int, help="Monte Carlo replications (default 100)")
        p.add_argument("--per-group", type=int, help="curves per group (default 50)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="output directory for CSV and SVG files")
    if grid:
        p.add_argument("--k", help="number of clusters, or 'auto'")
        p.add_argument("--basis-size", type=int, help="number of cubic B-spline functions")
        p.add_argument("--workers", type=int, help="parallel replications (default 1)")

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdaclust",
        description="Cluster curves through epigraph/hypograph indexes.")
    parser.add_argument("--config", help="key = value file with default options")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write one replication of a scenario as CSV")
    p.add_argument("--scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--per-group", type=int)
    p.add_argument("--eps", choices=("curve", "point"),
                   help="noise draw for Models 13-21 (default: curve)")
    p.add_argument("--out", help="CSV path (default: standard output)")

    p = sub.add_parser("run", help="(method x combination) grid with mean metrics")
    _add_common(p)
    p.add_argument("--methods", help="comma list, e.g. kmeans,kkmeans:polynomial,ward.D2")
    p.add_argument("--combos", help="comma list, e.g. _.EIHI,dd2.MEI")
    p.add_argument("--sigma", type=float, help="gaussian kernel width (default: median heuristic)")
    p.add_argument("--degree", type=int, help="polynomial kernel degree (default 2)")
    p.add_argument("--plot", action="store_true", help="also write an SVG of the first replication")

    p = sub.add_parser("cluster", help="one method on one combination of one dataset")
    _add_common(p)
    p.add_argument("--methods", help="method key, e.g. kmeans:mahalanobis (default kmeans)")
    p.add_argument("--combos", help="index combination (default _.EIHI)")
    p.add_argument("--sigma", type=float)
    p.add_argument("--degree", type=int)

    p = sub.add_parser("select-k", help="silhouette choice of the number of clusters")
    _add_common(p)
    p.add_argument("--combos", help="index combination (default: the scenario's)")
    p.add_argument("--candidates", help="comma list of k values (default 2,3,4,5,6)")

    p = sub.add_parser("bench", help="functional and test-based k-means")
    _add_common(p)
    p.add_argument("--methods", help=f"comma list (default {','.join(DEFAULT_BENCH)})")
    p.add_argument("--gamma", type=float, help="test-based k-means threshold (default 1.65)")
    p.add_argument("--window", type=int, help="test-based k-means window (default 5)")

    sub.add_parser("combos", help="list the index combinations")
    return parser

def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        for dest, value in read_config(args.config).items():
            if getattr(args, dest, None) is None and hasattr(args, dest):
                setattr(args, dest, value)
    return args

def _header_flag(args):
    h = getattr(args, "header", None)
    return {None: None, "auto": None, "yes": True, "no": False}[h]

def _config(args, **extra) -> RunConfig:
    kernel = {}
    if getattr(args, "sigma", None) is not None:
        kernel["sigma"] = float(args.sigma)
    if getattr(args, "degree", None) is not None:
        kernel["degree"] = int(args.degree)
    source = None
    if args.input is not None:
        source = ingest_csv(args.input, _header_flag(args))
    kw = dict(
        scenario=args.scenario if source is None else None,
        input=source,
        replications=int(args.reps) if args.reps is not None else 100,
        k=_k_value(args.k),
        methods=_csv_list(getattr(args, "methods", None)),
        combos=_csv_list(getattr(args, "combos", None)),
        basis_size=int(args.basis_size) if args.basis_size is not None else None,
        kernel_params=kernel,
        seed=int(args.seed) if args.seed is not None else 0,
        per_group=int(args.per_group) if args.per_group is not None else None,
        workers=int(args.workers) if args.workers is not None else 1,
    )
    if getattr(args, "gamma", None) is not None:
        kw["gamma"] = float(args.gamma)
    if getattr(args, "window", None) is not None:
        kw["window"] = int(args.window)
    if getattr(args, "candidates", None) is not None:
        kw["candidates"] = tuple(int(c) for c in _csv_list(args.candidates))
    kw.update(extra)
    return RunConfig(**kw)

def _out_dir(args):
    if not args.out:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d

def _slug(title: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in title).strip("_") or "input"

def _emit_report(report: RunReport, args, stem: str) -> None:
    print(f"# {report.title}: mean over {report.replications} replication(s)")
    print(format_table(RunReport.HEADER, report.as_tuples()))
    d = _out_dir(args)
    if d is not None:
        path = d / f"{stem}_{_slug(report.title)}.csv"
        write_csv(path, RunReport.HEADER, report.as_tuples())
        print(f"wrote {path}")

def cmd_simulate(args) -> int:
    if not args.scenario:
        raise InvalidArgument("simulate needs --scenario")
    per_group = int(args.per_group) if args.per_group is not None else None
    seed = int(args.seed) if args.seed is not None else 0
    sample = gen_scenario(get_scenario(args.scenario, per_group), seed, eps=args.eps or "curve")
    write_sample_csv(sample, args.out or sys.stdout)
    return 0

def cmd_run(args) -> int:
    config = _config(args)
    report = run_scenario(config)
    _emit_report(report, args, "run")
    d = _out_dir(args)
    if args.plot and d is not None:
        _plot(config, d)
    return 0

def _plot(config: RunConfig, d: Path) -> None:
    if config.scenario is not None:
        sample = gen_scenario(get_scenario(config.scenario, config.per_group),
                              replication_seed(config.seed, 0, "data"))
        title = get_scenario(config.scenario).name
    else:
        sample, title = config.input, "input"
    triple = smooth(sample, make_basis(sample.grid, config.basis_size))
    feats = {}
    for src in DataSource:
        data = triple.source(src.value)
        feats[src.value] = (compute_index(IndexKind.EI, data), compute_index(IndexKind.HI, data))
    path = d / f"curves_{_slug(title)}.svg"
    plot_scenario(triple, feats, path, title)
    print(f"wrote {path}")

def cmd_cluster(args) -> int:
    if args.input is None and args.scenario is None:
        raise InvalidArgument("cluster needs --input or --scenario")
    config = _config(args, replications=1)
    sample = load_sample(config, 0)
    method = MethodSpec.parse((config.methods or ("kmeans",))[0])
    combo = config.combo_specs()[0] if config.combos else ComboSpec.parse("_.EIHI")
    if config.k is None and sample.labels is None:
        raise InvalidArgument("cluster needs --k for unlabeled input")
    k = target_k(config, sample)
    triple = smooth(sample, make_basis(sample.grid, config.basis_size))
    F = assemble_features(triple, combo)
    ok, reason = admissibility(F)
    if not ok:
        log.warning("%s is not admissible (%s); clustering anyway", combo, reason)
    rng = cell_rng(config.seed, 0, method.key, str(combo))
    if k == "auto":
        k = select_k(F.values, method.run, config.candidates, seed=rng).chosen
    part = method.run(F.values, k, rng)
    print(f"# {method.name}.{combo} ({method.variant}), k={k}")
    rows = [(i, int(a)) for i, a in enumerate(part.assign)]
    if sample.labels is not None:
        e = evaluate(part, sample.labels)
        print(f"purity={e.purity:.3f} fmeasure={e.fmeasure:.3f} rand={e.rand:.3f}")
    d = _out_dir(args)
    if d is not None:
        path = d / "assignment.csv"
        write_csv(path, ("curve", "cluster"), rows)
        print(f"wrote {path}")
    else:
        print(format_table(("curve", "cluster"), rows))
    return 0

def cmd_select_k(args) -> int:
    report = select_k_cmd(_config(args))
    print(f"# silhouette choice of k with kmeans.{report.combo}, "
          f"{report.replications} replication(s)")
    rows = [(c, report.counts[c]) for c in report.candidates]
    print(format_table(("k", "count"), rows))
    d = _out_dir(args)
    if d is not None:
        path = d / "select_k.csv"
        write_csv(path, ("k", "count"), rows)
        print(f"wrote {path}")
    return 0

def cmd_bench(args) -> int:
    report = run_bench(_config(args))
    _emit_report(report, args, "bench")
    return 0

def cmd_combos(args) -> int:
    for c in enumerate_combos():
        print(f"{c}\t{','.join(src.prefix + kind.value for kind, src in c.columns)}")
    return 0

_COMMANDS = {"simulate": cmd_simulate, "run": cmd_run, "cluster": cmd_cluster,
             "select-k": cmd_select_k, "bench": cmd_bench, "combos": cmd_combos}

def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (InvalidArgument, NumericalFailure, OSError) as exc:
        print(f"fdaclust: error: {exc}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
