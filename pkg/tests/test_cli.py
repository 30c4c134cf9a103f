"""Command-line parsing, dispatch and output format."""

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from cranking.cli import (
    SPECTRUM_FIELDS,
    RunConfig,
    SweepRow,
    UsageError,
    main,
    parse_args,
    spectrum_row,
    write_table,
)

FIG = ["spectrum", "--omega-x", "3", "--omega-y", "2",
       "--omega-min", "0", "--omega-max", "4", "--steps", "400"]


def run_cli(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestParse:
    def test_sweep_config(self):
        cfg = parse_args(FIG)
        assert isinstance(cfg, RunConfig)
        assert cfg.sweep == (0.0, 4.0, 400)
        assert cfg.params.omega_x == 3 and cfg.format == "csv"

    def test_loop_config(self):
        cfg = parse_args(["ep-encircle", "--center", "2", "--radius", "0.05",
                          "--loops", "2", "--direction", "ccw"])
        assert cfg.options["loops"] == 2 and cfg.options["radius"] == 0.05
        assert cfg.format == "json"

    @pytest.mark.parametrize("argv, flag", [
        (["spectrum", "--omega-x", "-1"], "--omega-x"),
        (["spectrum", "--omega-y", "nan"], "--omega-y"),
        (["spectrum", "--omega-min", "0", "--omega-max", "4", "--steps", "1"], "--steps"),
        (["spectrum", "--omega-min", "4", "--omega-max", "0", "--steps", "5"], "--omega-min"),
        (["ep-encircle", "--n-steps", "10"], "--n-steps"),
        (["ep-encircle", "--direction", "up"], "--direction"),
        (["evolve", "--state", "1,2"], "--state"),
        (["spectrum", "--bogus"], "--bogus"),
    ])
    def test_usage_errors(self, argv, flag):
        with pytest.raises(UsageError) as exc:
            parse_args(argv)
        assert flag in str(exc.value)

    def test_partial_sweep(self):
        with pytest.raises(UsageError):
            parse_args(["spectrum", "--omega-min", "0"])

    def test_usage_exit_code(self, capsys):
        code, out, err = run_cli(["spectrum", "--omega-x", "-1"], capsys)
        assert code == 2 and "--omega-x" in err and out == ""

    def test_unknown_command(self, capsys):
        assert run_cli(["plot"], capsys)[0] == 2


class TestWriteTable:
    def test_header_and_lines(self):
        buf = io.StringIO()
        write_table([spectrum_row(3, 2, 1.0)], "csv", buf)
        text = buf.getvalue()
        assert text.split("\n")[0] == ",".join(SPECTRUM_FIELDS)
        assert text.endswith("\n") and "\r" not in text
        assert len(text.splitlines()) == 2

    def test_full_precision(self):
        buf = io.StringIO()
        row = spectrum_row(3, 2, 1.0)
        write_table([row], "csv", buf)
        vals = next(csv.DictReader(io.StringIO(buf.getvalue())))
        assert float(vals["wplus_re"]) == row.wplus_re

    def test_json_round_trip(self):
        rows = [spectrum_row(3, 2, w) for w in (0.0, 1.0, 2.5)]
        buf = io.StringIO()
        write_table(rows, "json", buf)
        back = [SweepRow(**d) for d in json.loads(buf.getvalue())]
        assert back == rows

    def test_critical_row(self):
        row = spectrum_row(3, 2, 2.0)
        assert abs(row.wminus_re) < 1e-12 and abs(row.wminus_im) < 1e-12

    def test_empty_rows(self):
        with pytest.raises(ValueError):
            write_table([], "csv", io.StringIO())


class TestRun:
    def test_figure_sweep(self, capsys):
        code, out, _ = run_cli(FIG, capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 400
        for r in rows:
            W, im, re = float(r["Omega"]), float(r["wminus_im"]), float(r["wminus_re"])
            if 2 < W < 3:
                assert im > 0 and re == 0
            else:
                assert im == 0

    def test_deterministic(self, capsys):
        a = run_cli(FIG, capsys)[1]
        b = run_cli(FIG, capsys)[1]
        assert a == b

    def test_commutators_report(self, capsys):
        code, out, _ = run_cli(["commutators", "--omega-x", "3", "--omega-y", "2", "--Omega", "2.5"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["is_bosonic"] is False
        assert rep["c23"]["re"] == pytest.approx(-1)

    def test_commutator_sweep(self, capsys):
        code, out, _ = run_cli(["commutators", "--omega-min", "0.5", "--omega-max", "3.5", "--steps", "7"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        # grid 0.5, 1.0, ..., 3.5 lands on both critical points
        assert [r["status"] for r in rows] == ["ok", "ok", "ok", "EPTooClose", "ok", "EPTooClose", "ok"]
        assert [r["is_bosonic"] for r in rows] == ["true", "true", "true", "", "false", "", "true"]

    def test_diabolic(self, capsys):
        code, out, _ = run_cli(["diabolic", "--omega", "2"], capsys)
        assert code == 0 and json.loads(out)["n_independent_eigenvectors"] == 2

    def test_module_error_exit_1(self, capsys):
        code, out, err = run_cli(["bogoliubov", "--Omega", "2"], capsys)
        assert code == 1 and err.startswith("EPTooClose")

    def test_no_growth_reported(self, capsys):
        code, out, err = run_cli(["growth", "--Omega", "1"], capsys)
        assert code == 1 and "NoGrowth" in err
        assert json.loads(out)["no_growth"] is True

    def test_growth(self, capsys):
        code, out, _ = run_cli(["growth", "--Omega", "2.5"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["slope"] == pytest.approx(rep["expected_rate"], rel=0.01)

    def test_encircle(self, capsys):
        code, out, _ = run_cli(["ep-encircle", "--center", "2", "--radius", "0.05", "--loops", "2"], capsys)
        rep = json.loads(out)
        assert code == 0 and abs(abs(rep["phase_angle_deg"]) - 180) < 10

    @pytest.mark.parametrize("argv", [
        ["couplings", "--Omega", "1"],
        ["bogoliubov", "--Omega", "1"],
        ["ep-locate"],
        ["ep-scaling", "--quantity", "overlap"],
        ["evolve", "--Omega", "1", "--t", "0.5"],
        ["evolve", "--Omega", "1", "--t", "0.01", "--method", "rk4"],
        ["spectrum", "--format", "json"],
    ])
    def test_commands_succeed(self, argv, capsys):
        code, out, err = run_cli(argv, capsys)
        assert code == 0, err
        assert out

    def test_out_file(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        assert main(FIG + ["--out", str(path)]) == 0
        assert capsys.readouterr().out == ""
        assert path.read_text().count("\n") == 401

    def test_evolve_energy_columns(self, capsys):
        code, out, _ = run_cli(["evolve", "--Omega", "1", "--state", "1,0,0,1", "--t", "2"], capsys)
        r = next(csv.DictReader(io.StringIO(out)))
        assert float(r["energy"]) == pytest.approx(float(r["energy_initial"]), rel=1e-10)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "cranking", "ep-locate"], capture_output=True, text=True)
    assert res.returncode == 0
    assert [e["omega_c"] for e in json.loads(res.stdout)["eps"]] == pytest.approx([2, 3], abs=1e-9)
