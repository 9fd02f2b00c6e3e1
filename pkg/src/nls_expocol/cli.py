"""Command-line harness: run, converge, drift, compare, reference.

Exit codes: 0 success, 1 usage or configuration error, 2 integrator
divergence, 3 missing reference solution.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .grid import SpectralField, h_alpha_norm
from .integrators import DivergenceError, StepperConfig, integrate, make_stepper
from .problems import build_problem
from .reference import MissingReferenceError, ensure_reference, reference_path, reference_solution
from .report import (
    write_compare_outputs,
    write_converge_outputs,
    write_drift_outputs,
    write_run_outputs,
)

# fp defaults per command; order sweeps need converged stages
_FP_RUN = (1e-16, 5)
_FP_CONVERGE = (1e-14, 50)

_SWEEP_WORKERS = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the harness reserves
    # 2 for integrator divergence, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nls-expocol", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (
        ("run", "integrate once and tabulate conservation over time"),
        ("converge", "stepsize sweep against a reference; errors and observed orders"),
        ("drift", "long-horizon energy deviation for one method"),
        ("compare", "method-by-stepsize error/energy/cost table"),
        ("reference", "compute and cache the reference solution"),
    ):
        p = sub.add_parser(name, help=descr)
        p.add_argument("--config", required=True, help="path to a JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (default from config, else ./out)")
        p.add_argument(
            "--method",
            action="append",
            default=None,
            help="method name (repeatable for compare), overrides the config list",
        )
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="set a top-level config key (repeatable)",
        )
        if name == "reference":
            p.add_argument("--force", action="store_true", help="recompute even on a cache hit")
    return parser


def _fp(cfg: ExperimentConfig, defaults: tuple[float, int]) -> tuple[float, int]:
    tol = cfg.fp_tol if cfg.fp_tol is not None else defaults[0]
    cap = cfg.fp_max_iter if cfg.fp_max_iter is not None else defaults[1]
    return tol, cap


def _single_method(cfg: ExperimentConfig, flag_methods, command: str) -> str:
    if flag_methods:
        if len(flag_methods) > 1:
            raise ConfigError(f"'{command}' takes a single --method")
        return flag_methods[0]
    return cfg.methods[0]


def _stepper_cfg(cfg, method, h, defaults) -> StepperConfig:
    tol, cap = _fp(cfg, defaults)
    return StepperConfig(method, h, fp_tol=tol, fp_max_iter=cap, error_alpha=cfg.alpha)


def _cache_dir(out_dir: Path) -> Path:
    return out_dir / "refcache"


def cmd_run(cfg: ExperimentConfig, out_dir: Path, flag_methods) -> int:
    method = _single_method(cfg, flag_methods, "run")
    grid, u0 = build_problem(cfg)
    stepper = make_stepper(grid, cfg.lam, _stepper_cfg(cfg, method, cfg.stepsizes[0], _FP_RUN))
    record = integrate(u0, stepper, cfg.t_end, sample_stride=cfg.sample_stride or 1)
    path = write_run_outputs(out_dir, record)
    print(f"run: {record.steps} steps of {method} -> {path}")
    return 0


def cmd_drift(cfg: ExperimentConfig, out_dir: Path, flag_methods) -> int:
    method = _single_method(cfg, flag_methods, "drift")
    grid, u0 = build_problem(cfg)
    stepper = make_stepper(grid, cfg.lam, _stepper_cfg(cfg, method, cfg.stepsizes[0], _FP_RUN))
    record = integrate(u0, stepper, cfg.t_end, sample_stride=cfg.sample_stride or 10)
    path = write_drift_outputs(out_dir, record)
    print(f"drift: max |H - H0| = {np.max(record.energy_error()):.6e} -> {path}")
    return 0


def _error_against(cfg: ExperimentConfig, final: SpectralField, ref: SpectralField) -> float:
    diff = SpectralField.from_coefficients(final.grid, final.coef - ref.coef)
    return h_alpha_norm(diff, cfg.alpha)


def cmd_converge(cfg: ExperimentConfig, out_dir: Path, flag_methods) -> int:
    method = _single_method(cfg, flag_methods, "converge")
    grid, u0 = build_problem(cfg)
    ref = reference_solution(_cache_dir(out_dir), cfg, grid)

    def task(h: float) -> float:
        stepper = make_stepper(grid, cfg.lam, _stepper_cfg(cfg, method, h, _FP_CONVERGE))
        record = integrate(u0, stepper, cfg.t_end, sample_stride=10**9)
        return _error_against(cfg, record.final, ref)

    with ThreadPoolExecutor(max_workers=min(_SWEEP_WORKERS, len(cfg.stepsizes))) as pool:
        errors = list(pool.map(task, cfg.stepsizes))

    path = write_converge_outputs(out_dir, method, cfg.t_end, cfg.stepsizes, errors)
    print(f"converge: {method} errors {['%.3e' % e for e in errors]} -> {path}")
    return 0


def cmd_compare(cfg: ExperimentConfig, out_dir: Path, flag_methods) -> int:
    methods = flag_methods or cfg.methods
    grid, u0 = build_problem(cfg)
    ref = reference_solution(_cache_dir(out_dir), cfg, grid)
    tasks = [(m, h) for m in methods for h in cfg.stepsizes]

    def task(mh):
        method, h = mh
        stepper = make_stepper(grid, cfg.lam, _stepper_cfg(cfg, method, h, _FP_RUN))
        record = integrate(u0, stepper, cfg.t_end, sample_stride=1)
        err = _error_against(cfg, record.final, ref)
        mean_iters = float(np.mean(record.fp_iterations[1:])) if record.steps else 0.0
        return (
            method,
            h,
            err,
            float(np.max(record.energy_error())),
            record.wall_clock,
            mean_iters,
        )

    with ThreadPoolExecutor(max_workers=min(_SWEEP_WORKERS, len(tasks))) as pool:
        rows = list(pool.map(task, tasks))

    path = write_compare_outputs(out_dir, rows)
    print(f"compare: {len(rows)} rows -> {path}")
    return 0


def cmd_reference(cfg: ExperimentConfig, out_dir: Path, force: bool) -> int:
    _, from_cache = ensure_reference(_cache_dir(out_dir), cfg, force=force)
    path = reference_path(_cache_dir(out_dir), cfg)
    print(f"reference: {'cache hit' if from_cache else 'computed'} -> {path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides=args.override)
        out_dir = Path(args.out or cfg.out_dir or "out")
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            return cmd_run(cfg, out_dir, args.method)
        if args.command == "drift":
            return cmd_drift(cfg, out_dir, args.method)
        if args.command == "converge":
            return cmd_converge(cfg, out_dir, args.method)
        if args.command == "compare":
            return cmd_compare(cfg, out_dir, args.method)
        return cmd_reference(cfg, out_dir, args.force)
    except ConfigError as exc:
        print(f"nls-expocol: config error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        step = f" (step {exc.step_index})" if exc.step_index is not None else ""
        print(f"nls-expocol: integrator diverged{step}: {exc}", file=sys.stderr)
        return 2
    except MissingReferenceError as exc:
        print(f"nls-expocol: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
