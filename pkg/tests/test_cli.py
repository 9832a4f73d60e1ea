import argparse
from pathlib import Path

import pytest

from aoidrop import RationalThreshold, Scheme
from aoidrop.cli import (
    SweepSpec,
    _parse_grid,
    main,
    parse_probability,
    parse_tau,
    reproduce_figures,
    run_sweep,
    run_validation,
    sweep_rows,
)


class TestParsing:
    def test_probability_decimal_and_fraction(self):
        assert parse_probability("0.7") == 0.7
        assert parse_probability("7/10") == 0.7
        assert parse_probability("2/9") == 2 / 9
        with pytest.raises(argparse.ArgumentTypeError):
            parse_probability("abc")

    def test_tau_forms(self):
        assert parse_tau("3") == 3
        assert parse_tau("40/21") == RationalThreshold(40, 21)

    def test_grid_forms(self):
        assert _parse_grid("0.1,0.5,0.9") == (0.1, 0.5, 0.9)
        assert _parse_grid("0.1:0.3:0.1") == (0.1, 0.2, 0.3)

    def test_sweep_spec_validation(self):
        with pytest.raises(Exception):
            SweepSpec(lam=0.7, q_grid=(), schemes=(Scheme.B0,), sim_slots=0,
                      seed=1, out_path=Path("x.csv"))
        with pytest.raises(Exception):
            SweepSpec(lam=0.7, q_grid=(0.5, 0.4), schemes=(Scheme.B0,),
                      sim_slots=0, seed=1, out_path=Path("x.csv"))
        with pytest.raises(Exception):
            SweepSpec(lam=0.7, q_grid=(0.5, 1.0), schemes=(Scheme.B0,),
                      sim_slots=0, seed=1, out_path=Path("x.csv"))


class TestEvalCommand:
    def test_analytic_only(self, capsys):
        rc = main(["eval", "--scheme", "B0", "--q", "0.5", "--lambda", "0.7"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "aoi_analytic=2.35714286" in out

    def test_with_simulation(self, capsys):
        rc = main(["eval", "--scheme", "P1", "--q", "0.5", "--lambda", "0.7",
                   "--tau", "0", "--slots", "50000", "--seed", "7"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "aoi_sim=" in out and "ci_halfwidth=" in out

    def test_missing_option_is_usage_error(self, capsys):
        rc = main(["eval", "--scheme", "B0", "--q", "0.5"])
        assert rc == 2
        assert "lambda" in capsys.readouterr().err

    def test_tau_arity_error(self, capsys):
        rc = main(["eval", "--scheme", "B0", "--q", "0.5", "--lambda", "0.7", "--tau", "1"])
        assert rc == 2


class TestOptimizeCommand:
    def test_unbounded_partial(self, capsys):
        rc = main(["optimize", "--scheme", "Pinf", "--q", "0.3", "--lambda", "0.7"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "tau_star=40/21" in out
        assert "schedule: 2 x tau=1 + 19 x tau=2 per 21 receptions" in out

    def test_b1_ties_reported(self, capsys):
        rc = main(["optimize", "--scheme", "F1", "--q", "0.5", "--lambda", "1"])
        assert rc == 0
        assert "ties=0,1,2" in capsys.readouterr().out

    def test_non_threshold_scheme_rejected(self, capsys):
        rc = main(["optimize", "--scheme", "AA1", "--q", "0.5", "--lambda", "0.7"])
        assert rc == 2


class TestSweep:
    def test_row_count_and_header(self, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main(["sweep", "--lambda", "0.7", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "scheme,q,lambda,tau_star,aoi_analytic,aoi_sim,ci_halfwidth,seed,slots"
        assert len(lines) == 1 + 63  # 7 schemes x 9 grid points

    def test_byte_identical_reruns(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["sweep", "--lambda", "0.7", "--q-grid", "0.2,0.5,0.8",
                "--slots", "20000", "--seed", "11"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_jobs_do_not_change_output(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["sweep", "--lambda", "0.2", "--q-grid", "0.1,0.3",
                "--slots", "10000", "--seed", "3"]
        assert main(args + ["--out", str(a), "--jobs", "1"]) == 0
        assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unbounded_always_accept_gap_above_lambda(self, tmp_path):
        spec = SweepSpec(lam=0.5, q_grid=(0.4, 0.6), schemes=(Scheme.AAINF,),
                         sim_slots=0, seed=1, out_path=tmp_path / "s.csv")
        rows = run_sweep(spec)
        assert rows[0]["aoi_analytic"] is not None
        assert rows[1]["aoi_analytic"] is None  # q >= lambda: no stationary value
        text = (tmp_path / "s.csv").read_text().splitlines()
        assert text[2].split(",")[4] == ""

    def test_single_point_value(self, tmp_path):
        spec = SweepSpec(lam=0.7, q_grid=(0.5,), schemes=(Scheme.B0,),
                         sim_slots=0, seed=1, out_path=tmp_path / "one.csv")
        rows = run_sweep(spec)
        assert rows[0]["aoi_analytic"] == pytest.approx(2.3571429, abs=1e-7)
        assert "2.35714286" in (tmp_path / "one.csv").read_text()

    def test_rows_sorted_scheme_then_q(self, tmp_path):
        spec = SweepSpec(lam=0.7, q_grid=(0.3, 0.6), schemes=(Scheme.AA1, Scheme.P1),
                         sim_slots=0, seed=1, out_path=tmp_path / "s.csv")
        rows = sweep_rows(spec)
        assert [(r["scheme"], r["q"]) for r in rows] == [
            ("P1", 0.3), ("P1", 0.6), ("AA1", 0.3), ("AA1", 0.6)]


class TestConfigFile:
    def test_config_supplies_defaults_flags_win(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda=0.7\nq=0.5\nscheme=B0\n")
        rc = main(["eval", "--config", str(cfg)])
        assert rc == 0
        assert "aoi_analytic=2.35714286" in capsys.readouterr().out
        # Flag overrides the config value for q.
        rc = main(["eval", "--config", str(cfg), "--q", "0.25"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "q=0.25" in out

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus=1\n")
        rc = main(["eval", "--config", str(cfg), "--scheme", "B0",
                   "--q", "0.5", "--lambda", "0.7"])
        assert rc == 2

    def test_fraction_probability_in_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("lambda=7/10\nq=1/2\nscheme=B0\n")
        assert main(["eval", "--config", str(cfg)]) == 0
        assert "aoi_analytic=2.35714286" in capsys.readouterr().out


class TestFigures:
    def test_reproduction_and_report(self, tmp_path):
        ok, text = reproduce_figures(tmp_path / "figs")
        assert ok
        assert (tmp_path / "figs" / "fig3.csv").exists()
        assert (tmp_path / "figs" / "fig4.csv").exists()
        report = (tmp_path / "figs" / "report.txt").read_text()
        assert "overall: PASS" in report
        assert "F1* within 2% of B0" in report
        assert "AA1 and AAinf coincide" in report
        assert "mixed vs real threshold" in report
        assert "FAIL" not in report

    def test_cli_exit_code(self, tmp_path, capsys):
        rc = main(["figures", "--out", str(tmp_path / "f")])
        assert rc == 0


class TestValidate:
    def test_quick_run_passes(self, tmp_path):
        ok, text = run_validation(tmp_path / "v.txt", sim_slots=200_000, seed=4)
        assert ok
        assert "overall: PASS" in text
        assert (tmp_path / "v.txt").read_text() == text


class TestTraceCommand:
    def test_stdout_trace(self, capsys):
        rc = main(["trace", "--scheme", "F1", "--q", "0.5", "--lambda", "0.5",
                   "--tau", "3", "--slots", "10", "--seed", "1"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "t,S,E,B,D,received,age"
        assert len(lines) == 11

    def test_file_trace(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        rc = main(["trace", "--scheme", "B0", "--q", "0.5", "--lambda", "0.5",
                   "--slots", "10", "--seed", "1", "--out", str(out)])
        assert rc == 0
        assert len(out.read_text().splitlines()) == 11
