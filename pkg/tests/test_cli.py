import io
import math

import numpy as np
import pytest

from fdaclust import FunctionalSample, Grid, InvalidArgument
from fdaclust.cli.io import CSVFormatError, format_table, ingest_csv, write_sample_csv
from fdaclust.cli.main import main, parse_args, read_config
from fdaclust.cli.run import (RunConfig, RunReport, ReportRow, _sort_rows, cell_rng,
                              replication_seed, run_bench, run_scenario, select_k_cmd)
from fdaclust.mvclust import parse_method_name
from fdaclust.simgen import gen_scenario, get_scenario

from conftest import two_blobs


def small(**kw):
    base = dict(scenario="S 1-4", replications=2, per_group=12, seed=3,
                methods=("kmeans", "ward.D2"), combos=("_.EIHI", "dd2.MEI"))
    base.update(kw)
    return RunConfig(**base)


class TestIngest:
    def test_growth_shape(self, tmp_path):
        ages = np.linspace(1, 18, 31)
        X = np.random.default_rng(0).normal(100, 10, (93, 31)).cumsum(axis=1)
        p = tmp_path / "growth.csv"
        p.write_text(",".join(repr(float(a)) for a in ages) + "\n"
                     + "\n".join(",".join(repr(float(v)) for v in row) for row in X) + "\n")
        # a purely numeric grid row has to be declared
        assert ingest_csv(p).n == 94
        s = ingest_csv(p, header=True)
        assert s.n == 93 and s.m == 31 and s.labels is None
        np.testing.assert_array_equal(s.grid.points, ages)
        np.testing.assert_array_equal(s.values, X)

    def test_label_column(self, tmp_path):
        p = tmp_path / "lab.csv"
        p.write_text("0,0.5,label,1,2\n1,2,3,4,5\n5,6,7,8,9\n")
        s = ingest_csv(p)
        assert s.m == 4 and s.labels.tolist() == [3, 7]
        assert s.grid.points.tolist() == [0, 0.5, 1, 2]
        np.testing.assert_array_equal(s.values, [[1, 2, 4, 5], [5, 6, 8, 9]])

    def test_string_labels(self, tmp_path):
        p = tmp_path / "lab.csv"
        p.write_text("0,1,2,3,label\n1,2,3,4,north\n5,6,7,8,south\n")
        assert ingest_csv(p).labels.tolist() == ["north", "south"]

    def test_no_header(self, tmp_path):
        p = tmp_path / "raw.csv"
        p.write_text("1,2,3,4\n5,6,7,8\n9,8,7,6\n")
        s = ingest_csv(p)
        assert s.n == 3 and s.grid.points.tolist() == [0, 1, 2, 3]
        s = ingest_csv(p, header=True)
        assert s.n == 2 and s.grid.points.tolist() == [1, 2, 3, 4]

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("0,1,2,3\n1,2,3,4\n1,2,3\n")
        with pytest.raises(CSVFormatError, match="row 3 has 3 fields, expected 4"):
            ingest_csv(p)

    def test_non_numeric(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("0,1,2,3\n1,2,x,4\n")
        with pytest.raises(CSVFormatError, match="row 2, column 3"):
            ingest_csv(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("0,1,two,3\n1,2,3,4\n")
        with pytest.raises(CSVFormatError, match="column 3"):
            ingest_csv(p)

    def test_empty(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("\n")
        with pytest.raises(CSVFormatError):
            ingest_csv(p)

    def test_round_trip(self, tmp_path):
        s = gen_scenario("S 10-12", seed=1)
        p = tmp_path / "s.csv"
        write_sample_csv(s, p)
        back = ingest_csv(p)
        np.testing.assert_array_equal(back.values, s.values)
        np.testing.assert_array_equal(back.grid.points, s.grid.points)
        np.testing.assert_array_equal(back.labels, s.labels)

    def test_write_to_stream(self):
        buf = io.StringIO()
        write_sample_csv(FunctionalSample(np.eye(4)[:2], Grid.linspace(0, 1, 4)), buf)
        assert buf.getvalue().splitlines()[0].startswith("0.0,")


class TestReports:
    def test_deterministic(self):
        a, b = run_scenario(small()), run_scenario(small())
        strip = lambda rep: [(r.name, r.variant, repr(r.purity), repr(r.fmeasure),
                              repr(r.rand), r.ok, r.reason) for r in rep.rows]
        assert strip(a) == strip(b)

    def test_combo_filter(self):
        rep = run_scenario(small(combos=("dd2.MEI",)))
        assert {str(parse_method_name(r.name)[1]) for r in rep.rows} == {"dd2.MEI"}
        assert len(rep.rows) == 2

    def test_names_round_trip(self):
        for r in run_scenario(small()).rows:
            name, combo = parse_method_name(r.name)
            assert f"{name}.{combo}" == r.name

    def test_sorted_by_rand(self):
        rand = [r.rand for r in run_scenario(small()).rows if not math.isnan(r.rand)]
        assert rand == sorted(rand, reverse=True)

    def test_inadmissible_cells_reported(self):
        rep = run_scenario(small(scenario="S 13-14-15", per_group=8, combos=("_dd2.MEI",),
                                 methods=("kmeans",), replications=1))
        row = rep.rows[0]
        assert math.isnan(row.rand) and row.ok == 0 and "inadmissible" in row.reason

    def test_sort_missing_last(self):
        nan = float("nan")
        rows = [ReportRow("b", "", nan, nan, nan, nan, 0, "x"),
                ReportRow("c", "", .5, .5, .7, 0, 1), ReportRow("a", "", .5, .5, .7, 0, 1)]
        assert [r.name for r in _sort_rows(rows)] == ["a", "c", "b"]

    def test_seed_streams_independent_of_other_cells(self):
        a = cell_rng(0, 3, "kmeans:euclidean", "_.EIHI").integers(1 << 30, size=4)
        b = cell_rng(0, 3, "kmeans:euclidean", "_.EIHI").integers(1 << 30, size=4)
        c = cell_rng(0, 3, "kmeans:euclidean", "d.EIHI").integers(1 << 30, size=4)
        assert a.tolist() == b.tolist() != c.tolist()
        assert replication_seed(0, 1, "data").spawn_key != replication_seed(0, 2, "data").spawn_key

    def test_adding_methods_keeps_cells(self):
        one = run_scenario(small(methods=("kmeans",)))
        two = run_scenario(small(methods=("kmeans", "spc")))
        assert one.row("kmeans._.EIHI").rand == two.row("kmeans._.EIHI").rand

    def test_config_validation(self):
        with pytest.raises(InvalidArgument):
            RunConfig()
        with pytest.raises(InvalidArgument):
            RunConfig(scenario="S 1-4", replications=0)
        with pytest.raises(InvalidArgument):
            RunConfig(scenario="S 1-4", k=1)

    def test_input_sample(self, rng):
        X, y = two_blobs(rng, n_per=15)
        t = np.linspace(0, 1, 20)
        sample = FunctionalSample(X[:, :1] + X[:, 1:] * t, Grid(t), y)
        rep = run_scenario(RunConfig(input=sample, methods=("kmeans",), combos=("_.EIHI",)))
        assert rep.replications == 1 and rep.rows[0].rand == 1.0
        auto = run_scenario(RunConfig(input=sample, k="auto", methods=("kmeans",),
                                      combos=("_.EIHI",)))
        assert auto.rows[0].ok == 1

    def test_bench(self):
        rep = run_bench(small(methods=("fkm-L2", "tbkm-random")))
        assert {r.name for r in rep.rows} == {"fkm-L2", "tbkm-random"}
        with pytest.raises(InvalidArgument):
            run_bench(small(methods=("nope",)))

    def test_format_table_na(self):
        out = format_table(("a", "b"), [("x", float("nan")), ("yy", 0.12345)])
        assert "NA" in out and "0.123" in out


class TestSelectK:
    def test_histogram_sums_to_reps(self):
        rep = select_k_cmd(small(replications=3, combos=None))
        assert sum(rep.counts.values()) == rep.replications == 3
        assert rep.combo == get_scenario("S 1-4").default_combo

    def test_two_blob_fixture(self, rng):
        X, y = two_blobs(rng, n_per=20)
        t = np.linspace(0, 1, 15)
        curves = X[:, :1] + 0.01 * X[:, 1:] * t
        rep = select_k_cmd(RunConfig(input=FunctionalSample(curves, Grid(t), y)))
        assert rep.counts[2] == rep.replications == 1


class TestMain:
    def test_combos(self, capsys):
        assert main(["combos"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 18
        assert lines[0] == "_.EIHI\tEI,HI"

    def test_simulate_then_cluster(self, tmp_path, capsys):
        csv_path = tmp_path / "s.csv"
        assert main(["simulate", "--scenario", "S 1-3", "--seed", "1", "--per-group", "10",
                     "--out", str(csv_path)]) == 0
        assert ingest_csv(csv_path).n == 20
        out_dir = tmp_path / "out"
        assert main(["cluster", "--input", str(csv_path), "--combos", "_d.MEI",
                     "--out", str(out_dir)]) == 0
        text = capsys.readouterr().out
        assert "rand=" in text and (out_dir / "assignment.csv").exists()

    def test_simulate_stdout(self, capsys):
        assert main(["simulate", "--scenario", "S 1-2", "--per-group", "2"]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 5

    def test_run_writes_csv_and_svg(self, tmp_path, capsys):
        assert main(["run", "--scenario", "S 1-4", "--reps", "1", "--per-group", "10",
                     "--methods", "kmeans", "--combos", "_.EIHI", "--plot",
                     "--out", str(tmp_path)]) == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert any(n.endswith(".csv") for n in names) and any(n.endswith(".svg") for n in names)
        assert "kmeans._.EIHI" in capsys.readouterr().out

    def test_select_k_and_bench(self, capsys):
        assert main(["select-k", "--scenario", "S 1-3", "--reps", "2", "--per-group", "10",
                     "--candidates", "2,3"]) == 0
        assert "count" in capsys.readouterr().out
        assert main(["bench", "--scenario", "S 1-4", "--reps", "1", "--per-group", "10",
                     "--methods", "fkm-dK:2", "--gamma", "1.96", "--window", "3"]) == 0
        assert "fkm-dK:2" in capsys.readouterr().out

    def test_errors_exit_two(self, tmp_path, capsys):
        assert main(["run", "--scenario", "S 9-9", "--reps", "1"]) == 2
        assert "unknown scenario" in capsys.readouterr().err
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2,3,4\n1,2\n")
        assert main(["cluster", "--input", str(bad), "--k", "2"]) == 2
        assert "row 2" in capsys.readouterr().err

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# defaults\nscenario = S 1-8\nreps = 7\nbasis-size = 12\n")
        args = parse_args(["--config", str(cfg), "run", "--reps", "3"])
        assert args.scenario == "S 1-8" and int(args.reps) == 3 and int(args.basis_size) == 12

    def test_config_bad_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = red\n")
        with pytest.raises(InvalidArgument, match="bad.cfg:1"):
            read_config(cfg)
