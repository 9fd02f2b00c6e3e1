"""Experiment configuration: JSON loading, presets, strict validation.

Config files are JSON objects with a flat key set (see
``docs/config-schema.json``).  Numeric values may be given as restricted
arithmetic expressions in strings, e.g. ``"4*sqrt(2)*pi"`` or ``"0.1/32"``;
only numbers, ``pi``, ``sqrt``, ``+ - * /``, and parentheses are allowed.
Unknown keys are rejected.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from pathlib import Path

from .integrators import parse_method
from .problems import INITIAL_KINDS, preset


class ConfigError(Exception):
    """Malformed or inconsistent experiment configuration."""


_KEYS = {
    "problem",
    "lambda",
    "dim",
    "n",
    "period",
    "initial",
    "methods",
    "stepsizes",
    "t_end",
    "alpha",
    "sample_stride",
    "fp_tol",
    "fp_max_iter",
    "out_dir",
}

_PROBLEMS = ("test_one", "test_two", "plane_wave", "custom")

# defaults applied to custom problems; presets carry their own
_CUSTOM_DEFAULTS = {
    "dim": 1,
    "n": 128,
    "t_end": 1.0,
    "methods": ["ecm2"],
    "stepsizes": [0.01],
}


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    problem: str
    lam: float
    dim: int
    n: int
    period: float
    initial: dict
    methods: list[str]
    stepsizes: list[float]
    t_end: float
    alpha: float = 0.0
    sample_stride: int | None = None
    fp_tol: float | None = None
    fp_max_iter: int | None = None
    out_dir: str | None = None

    raw: dict = field(default_factory=dict, repr=False)


def parse_number(value, where: str = "value") -> float:
    """Number from a JSON scalar or a restricted expression string."""
    if isinstance(value, bool):
        raise ConfigError(f"field '{where}': expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            tree = ast.parse(value, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"field '{where}': cannot parse expression {value!r}") from exc
        return _eval_node(tree.body, where, value)
    raise ConfigError(f"field '{where}': expected a number or expression string")


def _eval_node(node, where: str, src: str) -> float:
    import math

    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, where, src)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        a = _eval_node(node.left, where, src)
        b = _eval_node(node.right, where, src)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if b == 0:
            raise ConfigError(f"field '{where}': division by zero in {src!r}")
        return a / b
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
        and not node.keywords
    ):
        v = _eval_node(node.args[0], where, src)
        if v < 0:
            raise ConfigError(f"field '{where}': sqrt of a negative value in {src!r}")
        return math.sqrt(v)
    raise ConfigError(
        f"field '{where}': unsupported expression {src!r} "
        "(allowed: numbers, pi, sqrt, + - * /, parentheses)"
    )


def _parse_override(text: str):
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw_value = text.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    return key, value


def load_config(source, overrides=()) -> ExperimentConfig:
    """Load, merge with preset defaults, and validate a configuration.

    ``source`` is a file path or an already-parsed dictionary;
    ``overrides`` is an iterable of ``key=value`` strings applied on top
    (values parsed as JSON first, then kept as strings for the
    expression-aware fields).
    """
    if isinstance(source, dict):
        raw = dict(source)
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config root must be a JSON object, got {type(raw).__name__}")

    for item in overrides:
        key, value = _parse_override(item)
        raw[key] = value

    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    problem = raw.get("problem")
    if problem is None:
        raise ConfigError("field 'problem' is required")
    if problem not in _PROBLEMS:
        raise ConfigError(f"field 'problem': must be one of {_PROBLEMS}, got {problem!r}")

    if problem == "custom":
        merged = dict(_CUSTOM_DEFAULTS)
        for key in ("lambda", "period", "initial"):
            if key not in raw:
                raise ConfigError(f"field '{key}' is required for custom problems")
    else:
        merged = preset(problem)
    merged.update({k: v for k, v in raw.items() if k != "problem"})

    lam = parse_number(merged["lambda"], "lambda")
    period = parse_number(merged["period"], "period")
    t_end = parse_number(merged.get("t_end", 1.0), "t_end")
    alpha = parse_number(merged.get("alpha", 0.0), "alpha")

    dim = _as_int(merged.get("dim", 1), "dim")
    n = _as_int(merged.get("n", 128), "n")

    initial = merged["initial"]
    if not isinstance(initial, dict):
        raise ConfigError("field 'initial': expected an object")
    initial = _parse_initial(initial)

    methods = merged.get("methods")
    if not isinstance(methods, list) or not methods:
        raise ConfigError("field 'methods': expected a nonempty list")
    for m in methods:
        try:
            parse_method(m)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"field 'methods': {exc}") from exc

    stepsizes_raw = merged.get("stepsizes")
    if not isinstance(stepsizes_raw, list) or not stepsizes_raw:
        raise ConfigError("field 'stepsizes': expected a nonempty list")
    stepsizes = [parse_number(v, "stepsizes") for v in stepsizes_raw]
    if any(h <= 0 for h in stepsizes):
        raise ConfigError("field 'stepsizes': entries must be positive")
    if any(b >= a for a, b in zip(stepsizes, stepsizes[1:])):
        raise ConfigError("field 'stepsizes': entries must be strictly decreasing")

    if t_end < 0:
        raise ConfigError("field 't_end': must be nonnegative")
    if alpha < 0:
        raise ConfigError("field 'alpha': must be nonnegative")

    sample_stride = merged.get("sample_stride")
    if sample_stride is not None:
        sample_stride = _as_int(sample_stride, "sample_stride")
        if sample_stride < 1:
            raise ConfigError("field 'sample_stride': must be at least 1")

    fp_tol = merged.get("fp_tol")
    if fp_tol is not None:
        fp_tol = parse_number(fp_tol, "fp_tol")
        if fp_tol <= 0:
            raise ConfigError("field 'fp_tol': must be positive")

    fp_max_iter = merged.get("fp_max_iter")
    if fp_max_iter is not None:
        fp_max_iter = _as_int(fp_max_iter, "fp_max_iter")
        if fp_max_iter < 1:
            raise ConfigError("field 'fp_max_iter': must be at least 1")

    out_dir = merged.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("field 'out_dir': expected a string")

    return ExperimentConfig(
        problem=problem,
        lam=lam,
        dim=dim,
        n=n,
        period=period,
        initial=initial,
        methods=list(methods),
        stepsizes=stepsizes,
        t_end=t_end,
        alpha=alpha,
        sample_stride=sample_stride,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        out_dir=out_dir,
        raw=dict(raw),
    )


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"field '{where}': expected an integer")
    return value


_INITIAL_NUMERIC = ("base", "amp", "amplitude")


def _parse_initial(spec: dict) -> dict:
    kind = spec.get("kind")
    if kind not in INITIAL_KINDS:
        raise ConfigError(f"field 'initial.kind': must be one of {INITIAL_KINDS}, got {kind!r}")
    out = dict(spec)
    for key in _INITIAL_NUMERIC:
        if key in out:
            out[key] = parse_number(out[key], f"initial.{key}")
    if "mode" in out:
        mode = out["mode"]
        if isinstance(mode, list):
            out["mode"] = [_as_int(m, "initial.mode") for m in mode]
        else:
            out["mode"] = _as_int(mode, "initial.mode")
    extra = sorted(set(out) - {"kind", "mode", *_INITIAL_NUMERIC})
    if extra:
        raise ConfigError(f"unknown initial datum key(s): {', '.join(extra)}")
    return out
