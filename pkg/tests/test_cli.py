import json
from pathlib import Path

import pytest

from lpplscan.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def bubble_csv(tmp_path, capsys):
    path = tmp_path / "bubble.csv"
    code, out, _ = run(
        capsys,
        "synth",
        "--regime", "lppl",
        "--params", "t_c=150", "m=0.5", "omega=6.28", "phi=1", "A=8", "B=-0.8", "C=0.05",
        "--grid", "0,139,1",
        "--noise", "0.01",
        "--seed", "7",
        "--out", str(path),
    )
    assert code == 0
    return path


class TestPrice:
    def test_reference_value(self, capsys):
        code, out, _ = run(
            capsys, "price", "--dividend", "100", "--return", "0.08", "--growth", "0.04"
        )
        assert code == 0
        assert out.strip() == "2500"

    def test_no_finite_price_is_domain_error(self, capsys):
        code, out, err = run(
            capsys, "price", "--dividend", "100", "--return", "0.04", "--growth", "0.04"
        )
        assert code == 1
        assert "no finite price" in json.loads(err)["error"]["message"]

    def test_missing_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["price", "--dividend", "100"])
        assert exc.value.code == 2


class TestCascade:
    def test_table_values(self, capsys):
        code, out, _ = run(capsys, "cascade", "--p0", "2", "--rate", "0.02", "--steps", "10")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "time,population,rate,doubling_time"
        doubling = [float(line.split(",")[3]) for line in lines[1:]]
        table = [34.65, 17.33, 8.66, 4.33, 2.17, 1.08, 0.54, 0.27, 0.14, 0.07]
        assert doubling == pytest.approx(table, abs=0.01)

    def test_file_output(self, tmp_path, capsys):
        out_file = tmp_path / "cascade.csv"
        code, _, _ = run(
            capsys, "cascade", "--p0", "2", "--rate", "0.02", "--steps", "3",
            "--out", str(out_file),
        )
        assert code == 0
        assert out_file.read_text().startswith("time,population")


class TestSynth:
    def test_writes_csv_and_truth(self, bubble_csv):
        assert bubble_csv.exists()
        truth = json.loads(bubble_csv.with_suffix(".truth.json").read_text())
        assert truth["regime"] == "lppl"
        assert truth["t_c"] == 150
        header = bubble_csv.read_text().splitlines()[0]
        assert header == "time,price,log_price"

    def test_deterministic_bytes(self, tmp_path, capsys):
        args = [
            "synth", "--regime", "exp", "--params", "rate=0.002", "p0=10",
            "--grid", "0,99,1", "--noise", "0.02", "--seed", "3",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_bad_regime_grid(self, capsys):
        code, _, err = run(
            capsys, "synth", "--regime", "lppl", "--params", "t_c=50",
            "--grid", "0,99,1", "--out", "/tmp/never.csv",
        )
        assert code == 1


class TestFit:
    def test_fit_json(self, bubble_csv, capsys, tmp_path):
        out = tmp_path / "fit.json"
        code, _, _ = run(
            capsys,
            "fit", "--input", str(bubble_csv), "--date-column", "time",
            "--t1", "0", "--t2", "139",
            "--filters", "n_starts=6",
            "--seed", "5",
            "--out", str(out),
        )
        assert code == 0
        blob = json.loads(out.read_text())
        assert blob["params"]["t_c"] == pytest.approx(150.0, abs=10.0)
        assert blob["qualified"] is True
        assert blob["sign"] == "positive_bubble"

    def test_fit_stdout_deterministic(self, bubble_csv, capsys):
        args = [
            "fit", "--input", str(bubble_csv), "--date-column", "time",
            "--t1", "0", "--t2", "139", "--filters", "n_starts=4", "--seed", "5",
        ]
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2

    def test_window_too_small(self, bubble_csv, capsys):
        code, _, err = run(
            capsys,
            "fit", "--input", str(bubble_csv), "--date-column", "time",
            "--t1", "0", "--t2", "5",
        )
        assert code == 1
        assert "fewer than" in json.loads(err)["error"]["message"]

    def test_missing_input_file(self, capsys):
        code, _, err = run(
            capsys, "fit", "--input", "/nonexistent.csv", "--t1", "0", "--t2", "100"
        )
        assert code == 2


class TestScan:
    def test_scan_outputs(self, bubble_csv, tmp_path, capsys):
        out_dir = tmp_path / "rep"
        code, out, _ = run(
            capsys,
            "scan", "--input", str(bubble_csv), "--date-column", "time",
            "--windows", "60,90", "--every", "40",
            "--filters", "n_starts=4",
            "--seed", "5",
            "--out", str(out_dir),
        )
        assert code == 0
        summary = json.loads(out)
        rep = json.loads(Path(summary["report_json"]).read_text())
        assert rep["n_fits"] >= 1
        csv_text = Path(summary["report_csv"]).read_text()
        assert csv_text.startswith("date,alarm,qualified,total")

    def test_scan_deterministic_bytes(self, bubble_csv, tmp_path, capsys):
        dirs = [tmp_path / "r1", tmp_path / "r2"]
        for d in dirs:
            code, _, _ = run(
                capsys,
                "scan", "--input", str(bubble_csv), "--date-column", "time",
                "--windows", "60,90", "--every", "60",
                "--filters", "n_starts=4",
                "--seed", "5", "--out", str(d),
            )
            assert code == 0
        for name in ["bubble_report.json", "bubble_report.csv"]:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    def test_config_file_overlay(self, bubble_csv, tmp_path, capsys):
        cfg = tmp_path / "scan.cfg"
        cfg.write_text("window_lengths = 60,90\nend_every = 60\nn_starts = 4\n")
        code, out, _ = run(
            capsys,
            "scan", "--input", str(bubble_csv), "--date-column", "time",
            "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "r3"),
        )
        assert code == 0
        assert json.loads(out)["n_fits"] >= 1

    def test_bad_config_line(self, bubble_csv, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a key value line\n")
        code, _, err = run(
            capsys, "scan", "--input", str(bubble_csv), "--config", str(cfg)
        )
        assert code == 2


class TestUsage:
    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["price", "--bogus", "1"])
        assert exc.value.code == 2

    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
