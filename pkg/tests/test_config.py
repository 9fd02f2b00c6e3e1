"""
Tests for experiment config loading, presets, and expression parsing.
"""

import json
import math

import pytest

from nls_expocol.config import ConfigError, load_config, parse_number
from nls_expocol.problems import preset


class TestParseNumber:
    def test_plain_scalars(self):
        assert parse_number(3) == 3.0
        assert parse_number(-0.5) == -0.5
        assert parse_number("2.5") == 2.5

    def test_expressions(self):
        assert parse_number("4*sqrt(2)*pi") == pytest.approx(4.0 * math.sqrt(2.0) * math.pi)
        assert parse_number("0.1/32") == pytest.approx(0.1 / 32.0)
        assert parse_number("2*pi") == pytest.approx(2.0 * math.pi)
        assert parse_number("pi") == pytest.approx(math.pi)
        assert parse_number("-2") == -2.0
        assert parse_number("(1+2)/4") == 0.75
        assert parse_number("sqrt(2+2)") == 2.0

    def test_division_by_zero(self):
        with pytest.raises(ConfigError):
            parse_number("1/0")

    def test_sqrt_of_negative(self):
        with pytest.raises(ConfigError):
            parse_number("sqrt(-1)")

    @pytest.mark.parametrize(
        "bad",
        ["2**3", "e", "cos(1)", "__import__('os')", "x", "1;2", "[1]", ""],
    )
    def test_rejects_non_arithmetic(self, bad):
        with pytest.raises(ConfigError):
            parse_number(bad)

    def test_rejects_bool_and_none(self):
        with pytest.raises(ConfigError):
            parse_number(True)
        with pytest.raises(ConfigError):
            parse_number(None)


class TestPresets:
    def test_modulated_long_box(self):
        cfg = load_config({"problem": "test_one"})
        assert cfg.lam == -2.0
        assert cfg.n == 128
        assert cfg.dim == 1
        assert cfg.period == pytest.approx(4.0 * math.sqrt(2.0) * math.pi)
        assert cfg.initial == {
            "kind": "modulated_background",
            "base": 0.5,
            "amp": 0.025,
            "mode": 1,
        }

    def test_defocusing_unit_torus(self):
        cfg = load_config({"problem": "test_two"})
        assert cfg.lam == -1.0
        assert cfg.period == pytest.approx(2.0 * math.pi)
        assert cfg.initial["kind"] == "inverse_sin_squared"
        assert set(cfg.methods) == {"ecm2", "ecm3", "strang", "eavf"}

    def test_plane_wave(self):
        cfg = load_config({"problem": "plane_wave"})
        assert cfg.initial["amplitude"] == 0.8
        assert cfg.n == 32
        assert cfg.stepsizes == [0.025, 0.0125, 0.00625, 0.003125]

    def test_preset_copies_are_isolated(self):
        a = preset("test_one")
        a["lambda"] = 99.0
        a["initial"]["base"] = 99.0
        b = preset("test_one")
        assert b["lambda"] == -2.0
        assert b["initial"]["base"] == 0.5

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            preset("test_three")

    def test_user_keys_override_preset(self):
        cfg = load_config({"problem": "test_one", "n": 64, "t_end": 2.0})
        assert cfg.n == 64
        assert cfg.t_end == 2.0
        assert cfg.lam == -2.0  # untouched preset field


class TestCustomProblems:
    def test_minimal_custom(self):
        cfg = load_config(
            {
                "problem": "custom",
                "lambda": 1.0,
                "period": "2*pi",
                "initial": {"kind": "plane_wave", "amplitude": 1.0},
            }
        )
        assert cfg.lam == 1.0
        assert cfg.dim == 1
        assert cfg.n == 128
        assert cfg.methods == ["ecm2"]
        assert cfg.stepsizes == [0.01]

    @pytest.mark.parametrize("missing", ["lambda", "period", "initial"])
    def test_required_fields(self, missing):
        raw = {
            "problem": "custom",
            "lambda": 1.0,
            "period": 6.0,
            "initial": {"kind": "inverse_sin_squared"},
        }
        del raw[missing]
        with pytest.raises(ConfigError, match=missing):
            load_config(raw)


class TestValidation:
    def test_unknown_keys_named(self):
        with pytest.raises(ConfigError, match="stepsize_list"):
            load_config({"problem": "test_one", "stepsize_list": [0.1]})

    def test_problem_required(self):
        with pytest.raises(ConfigError, match="problem"):
            load_config({})

    def test_problem_enum(self):
        with pytest.raises(ConfigError, match="problem"):
            load_config({"problem": "test_three"})

    def test_stepsizes_strictly_decreasing(self):
        with pytest.raises(ConfigError, match="decreasing"):
            load_config({"problem": "test_one", "stepsizes": [0.01, 0.02]})
        with pytest.raises(ConfigError, match="decreasing"):
            load_config({"problem": "test_one", "stepsizes": [0.01, 0.01]})

    def test_stepsizes_positive_nonempty(self):
        with pytest.raises(ConfigError):
            load_config({"problem": "test_one", "stepsizes": [0.1, -0.05]})
        with pytest.raises(ConfigError):
            load_config({"problem": "test_one", "stepsizes": []})

    def test_stepsizes_accept_expressions(self):
        cfg = load_config({"problem": "test_one", "stepsizes": ["0.1/4", "0.1/8"]})
        assert cfg.stepsizes == pytest.approx([0.025, 0.0125])

    def test_methods_validated(self):
        with pytest.raises(ConfigError, match="methods"):
            load_config({"problem": "test_one", "methods": []})
        with pytest.raises(ConfigError, match="methods"):
            load_config({"problem": "test_one", "methods": ["rk4"]})
        with pytest.raises(ConfigError, match="methods"):
            load_config({"problem": "test_one", "methods": ["ecm0"]})

    def test_scalar_bounds(self):
        with pytest.raises(ConfigError, match="t_end"):
            load_config({"problem": "test_one", "t_end": -1.0})
        with pytest.raises(ConfigError, match="alpha"):
            load_config({"problem": "test_one", "alpha": -0.5})
        with pytest.raises(ConfigError, match="sample_stride"):
            load_config({"problem": "test_one", "sample_stride": 0})
        with pytest.raises(ConfigError, match="fp_tol"):
            load_config({"problem": "test_one", "fp_tol": 0.0})
        with pytest.raises(ConfigError, match="fp_max_iter"):
            load_config({"problem": "test_one", "fp_max_iter": 0})
        with pytest.raises(ConfigError, match="out_dir"):
            load_config({"problem": "test_one", "out_dir": 7})

    def test_integer_fields_reject_floats_and_bools(self):
        with pytest.raises(ConfigError, match="'n'"):
            load_config({"problem": "test_one", "n": 64.0})
        with pytest.raises(ConfigError, match="'dim'"):
            load_config({"problem": "test_one", "dim": True})

    def test_initial_kind_whitelist(self):
        with pytest.raises(ConfigError, match="initial.kind"):
            load_config(
                {
                    "problem": "custom",
                    "lambda": 1.0,
                    "period": 6.0,
                    "initial": {"kind": "soliton"},
                }
            )

    def test_initial_unknown_key(self):
        with pytest.raises(ConfigError, match="width"):
            load_config(
                {
                    "problem": "custom",
                    "lambda": 1.0,
                    "period": 6.0,
                    "initial": {"kind": "plane_wave", "amplitude": 1.0, "width": 2},
                }
            )

    def test_initial_numeric_expressions_and_modes(self):
        cfg = load_config(
            {
                "problem": "custom",
                "lambda": 1.0,
                "dim": 2,
                "n": 8,
                "period": 6.0,
                "initial": {"kind": "plane_wave", "amplitude": "1/2", "mode": [1, -2]},
            }
        )
        assert cfg.initial["amplitude"] == 0.5
        assert cfg.initial["mode"] == [1, -2]

    def test_initial_must_be_object(self):
        with pytest.raises(ConfigError, match="initial"):
            load_config({"problem": "custom", "lambda": 1.0, "period": 6.0, "initial": 3})


class TestFileLoading:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(
            json.dumps({"problem": "test_two", "t_end": 1.0, "stepsizes": [0.01]}),
            encoding="utf-8",
        )
        cfg = load_config(path)
        assert cfg.problem == "test_two"
        assert cfg.t_end == 1.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.json")

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "problem": "test_one",\n  oops\n}\n', encoding="utf-8")
        with pytest.raises(ConfigError, match="line 3"):
            load_config(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ConfigError, match="parse error"):
            load_config(path)

    def test_root_must_be_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="object"):
            load_config(path)


class TestOverrides:
    def test_json_values(self):
        cfg = load_config({"problem": "test_one"}, overrides=["n=64", "t_end=2.5"])
        assert cfg.n == 64
        assert cfg.t_end == 2.5

    def test_list_value(self):
        cfg = load_config({"problem": "test_one"}, overrides=["stepsizes=[0.1, 0.05]"])
        assert cfg.stepsizes == [0.1, 0.05]

    def test_expression_value_stays_string_until_parsed(self):
        cfg = load_config({"problem": "test_one"}, overrides=["period=2*pi"])
        assert cfg.period == pytest.approx(2.0 * math.pi)

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="key=value"):
            load_config({"problem": "test_one"}, overrides=["t_end"])

    def test_unknown_override_key(self):
        with pytest.raises(ConfigError, match="horizon"):
            load_config({"problem": "test_one"}, overrides=["horizon=2"])

    def test_override_wins_over_file(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"problem": "test_one", "n": 32}), encoding="utf-8")
        cfg = load_config(path, overrides=["n=16"])
        assert cfg.n == 16
