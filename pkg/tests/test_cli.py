"""
End-to-end tests of the command-line harness: exit codes, CSV contracts,
figure files, and the reference cache.
"""

import json
import math

import numpy as np
import pytest

from nls_expocol.cli import main


def run_cli(argv):
    """Invoke the CLI in-process; normalize argparse SystemExit to a code."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def write_config(tmp_path, payload, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def csv_lines(path):
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    return text.strip("\n").split("\n")


class TestRunCommand:
    def test_row_count_and_columns(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "test_one", "t_end": 1.0, "stepsizes": [0.01]}
        )
        out = tmp_path / "out"
        code = run_cli(["run", "--config", cfg, "--out", str(out), "--method", "ecm3"])
        assert code == 0

        lines = csv_lines(out / "run.csv")
        assert lines[0] == "t,energy_error,mass_error,fp_iterations"
        assert len(lines) == 101  # header + one row per step
        first = lines[1].split(",")
        assert float(first[0]) == pytest.approx(0.01)
        assert float(lines[-1].split(",")[0]) == pytest.approx(1.0)
        assert (out / "run.png").exists()

    def test_zero_horizon_single_row(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "test_one", "t_end": 0.0})
        out = tmp_path / "out"
        assert run_cli(["run", "--config", cfg, "--out", str(out)]) == 0

        lines = csv_lines(out / "run.csv")
        assert len(lines) == 2
        assert float(lines[1].split(",")[0]) == 0.0

    def test_single_method_commands_reject_two_flags(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "test_one", "t_end": 1.0})
        code = run_cli(
            [
                "run",
                "--config",
                cfg,
                "--out",
                str(tmp_path / "o"),
                "--method",
                "ecm2",
                "--method",
                "ecm3",
            ]
        )
        assert code == 1

    def test_divergent_stepsize_exits_two(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 10.0, "stepsizes": [10.0]}
        )
        code = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 2
        assert "step" in capsys.readouterr().err


class TestDriftCommand:
    def test_outputs(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.01]}
        )
        out = tmp_path / "out"
        assert run_cli(["drift", "--config", cfg, "--out", str(out), "--method", "ecm2"]) == 0

        lines = csv_lines(out / "drift.csv")
        assert lines[0] == "t,energy_error"
        assert len(lines) == 11  # default stride 10 over 100 steps
        assert float(lines[1].split(",")[0]) == pytest.approx(0.1)

        summary = csv_lines(out / "drift_summary.csv")
        assert summary[0] == "max_energy_error,first_half_max,second_half_max"
        assert len(summary) == 2
        total, first, second = (float(v) for v in summary[1].split(","))
        assert total == pytest.approx(max(first, second))
        assert (out / "drift.png").exists()

    def test_stride_override(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "problem": "test_two",
                "t_end": 1.0,
                "stepsizes": [0.01],
                "sample_stride": 50,
            },
        )
        out = tmp_path / "out"
        assert run_cli(["drift", "--config", cfg, "--out", str(out), "--method", "ecm2"]) == 0
        assert len(csv_lines(out / "drift.csv")) == 3


class TestConvergeCommand:
    def test_closed_form_reference(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "plane_wave", "stepsizes": [0.025, 0.0125, 0.00625]}
        )
        out = tmp_path / "out"
        assert run_cli(["converge", "--config", cfg, "--out", str(out)]) == 0

        lines = csv_lines(out / "converge.csv")
        assert lines[0] == "h,error,observed_order"
        assert len(lines) == 4
        rows = [line.split(",") for line in lines[1:]]
        errors = [float(r[1]) for r in rows]
        for i in range(len(rows) - 1):
            expected = math.log2(errors[i] / errors[i + 1])
            assert float(rows[i][2]) == pytest.approx(expected, rel=1e-12)
        assert rows[-1][2] == "nan"
        assert (out / "converge.png").exists()

    def test_missing_reference_exits_three(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1]}
        )
        code = run_cli(["converge", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 3
        assert "reference" in capsys.readouterr().err

    def test_after_reference_command(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1]}
        )
        out = tmp_path / "out"
        assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        assert run_cli(["converge", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "converge.csv").exists()

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "plane_wave", "stepsizes": [0.025, 0.0125]}
        )
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(["converge", "--config", cfg, "--out", str(out)]) == 0
            outputs.append((out / "converge.csv").read_bytes())
        assert outputs[0] == outputs[1]


class TestReferenceCommand:
    def test_cache_hit_and_force(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1]}
        )
        out = tmp_path / "out"

        assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        assert "computed" in capsys.readouterr().out
        cache_files = list((out / "refcache").glob("ref-*.npz"))
        assert len(cache_files) == 1
        stamp = cache_files[0].stat().st_mtime_ns

        assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        assert "cache hit" in capsys.readouterr().out
        assert cache_files[0].stat().st_mtime_ns == stamp

        assert run_cli(["reference", "--config", cfg, "--out", str(out), "--force"]) == 0
        assert "computed" in capsys.readouterr().out
        assert cache_files[0].stat().st_mtime_ns != stamp

    def test_grid_change_misses_cache(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1]}
        )
        assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        cfg64 = write_config(
            tmp_path,
            {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1], "n": 64},
            name="exp64.json",
        )
        assert run_cli(["reference", "--config", cfg64, "--out", str(out)]) == 0
        assert len(list((out / "refcache").glob("ref-*.npz"))) == 2

    def test_corrupt_cache_recomputed_with_warning(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1]}
        )
        out = tmp_path / "out"
        assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        capsys.readouterr()

        cache_file = next((out / "refcache").glob("ref-*.npz"))
        cache_file.write_bytes(b"not an archive")

        with pytest.warns(UserWarning, match="corrupt"):
            assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        assert "computed" in capsys.readouterr().out
        assert run_cli(["converge", "--config", cfg, "--out", str(out)]) == 0

    def test_closed_form_accuracy(self, tmp_path):
        """The cached field for the plane-wave preset matches the closed form."""
        from nls_expocol.config import load_config
        from nls_expocol.grid import SpectralField, l2_norm
        from nls_expocol.problems import build_problem, exact_solution
        from nls_expocol.reference import ensure_reference

        cfg = load_config({"problem": "plane_wave", "stepsizes": [0.025]})
        field, from_cache = ensure_reference(tmp_path / "cache", cfg)
        assert not from_cache
        grid, _ = build_problem(cfg)
        exact = exact_solution(grid, cfg.initial, cfg.lam, cfg.t_end)
        diff = l2_norm(SpectralField.from_coefficients(grid, field.coef - exact.coef))
        assert diff <= 1e-11


class TestCompareCommand:
    def test_method_by_stepsize_table(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "test_two", "t_end": 1.0, "stepsizes": [0.1]}
        )
        out = tmp_path / "out"
        assert run_cli(["reference", "--config", cfg, "--out", str(out)]) == 0
        assert run_cli(["compare", "--config", cfg, "--out", str(out)]) == 0

        lines = csv_lines(out / "compare.csv")
        assert lines[0] == "method,h,error,max_energy_error,wall_clock,mean_fp_iterations"
        assert len(lines) == 5  # 4 preset methods x 1 stepsize
        methods = [line.split(",")[0] for line in lines[1:]]
        assert methods == ["ecm2", "ecm3", "strang", "eavf"]
        for line in lines[1:]:
            cells = line.split(",")
            assert float(cells[4]) > 0.0  # wall clock
        assert (out / "compare.png").exists()

    def test_method_flags_select_subset(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "plane_wave", "stepsizes": [0.025, 0.0125]}
        )
        out = tmp_path / "out"
        code = run_cli(
            [
                "compare",
                "--config",
                cfg,
                "--out",
                str(out),
                "--method",
                "ecm2",
                "--method",
                "strang",
            ]
        )
        assert code == 0
        lines = csv_lines(out / "compare.csv")
        assert len(lines) == 5  # 2 methods x 2 stepsizes
        assert sorted({line.split(",")[0] for line in lines[1:]}) == ["ecm2", "strang"]


class TestExitCodes:
    def test_usage_errors(self, tmp_path):
        assert run_cli([]) == 1
        assert run_cli(["frobnicate"]) == 1
        assert run_cli(["run"]) == 1  # --config required
        assert run_cli(["run", "--config"]) == 1

    def test_missing_config_file(self, tmp_path, capsys):
        code = run_cli(["run", "--config", str(tmp_path / "none.json")])
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_empty_config_file(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("", encoding="utf-8")
        assert run_cli(["run", "--config", str(path)]) == 1

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"problem": "test_one", "zeta": 1})
        assert run_cli(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
        assert "zeta" in capsys.readouterr().err

    def test_override_applies(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "test_one", "t_end": 5.0})
        out = tmp_path / "out"
        code = run_cli(
            [
                "run",
                "--config",
                cfg,
                "--out",
                str(out),
                "--override",
                "t_end=0.5",
                "--override",
                "stepsizes=[0.1]",
            ]
        )
        assert code == 0
        assert len(csv_lines(out / "run.csv")) == 6

    def test_out_flag_beats_config_out_dir(self, tmp_path):
        configured = tmp_path / "from_config"
        flagged = tmp_path / "from_flag"
        cfg = write_config(
            tmp_path,
            {
                "problem": "test_one",
                "t_end": 0.1,
                "stepsizes": [0.1],
                "out_dir": str(configured),
            },
        )
        assert run_cli(["run", "--config", cfg, "--out", str(flagged)]) == 0
        assert (flagged / "run.csv").exists()
        assert not configured.exists()

    def test_config_out_dir_used_without_flag(self, tmp_path):
        configured = tmp_path / "from_config"
        cfg = write_config(
            tmp_path,
            {
                "problem": "test_one",
                "t_end": 0.1,
                "stepsizes": [0.1],
                "out_dir": str(configured),
            },
        )
        assert run_cli(["run", "--config", cfg]) == 0
        assert (configured / "run.csv").exists()
