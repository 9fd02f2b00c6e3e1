"""High-accuracy reference solutions with an on-disk cache.

References are computed with the 3-stage exponential collocation method at
a twentieth of the smallest sweep stepsize and tightly converged stages,
then cached under a content hash of the problem identity.  Cache writes go
through a temporary file and an atomic rename.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .grid import SpectralField
from .integrators import StepperConfig, integrate, make_stepper
from .problems import build_problem, exact_solution, has_closed_form

REF_METHOD = "ecm3"
REF_STEP_DIVISOR = 20
REF_FP_TOL = 1e-14
REF_FP_MAX_ITER = 100


class MissingReferenceError(Exception):
    """No cached reference for this problem; run the reference command."""


def reference_stepsize(cfg: ExperimentConfig) -> float:
    return min(cfg.stepsizes) / REF_STEP_DIVISOR


def reference_key(cfg: ExperimentConfig) -> str:
    """Content hash of everything the reference solution depends on."""
    payload = {
        "problem": cfg.problem,
        "lambda": cfg.lam,
        "dim": cfg.dim,
        "n": cfg.n,
        "period": cfg.period,
        "initial": cfg.initial,
        "t_end": cfg.t_end,
        "h_ref": reference_stepsize(cfg),
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def reference_path(cache_dir, cfg: ExperimentConfig) -> Path:
    return Path(cache_dir) / f"ref-{reference_key(cfg)}.npz"


def compute_reference(cfg: ExperimentConfig) -> SpectralField:
    """Integrate the problem to ``t_end`` at the reference settings."""
    grid, u0 = build_problem(cfg)
    stepper = make_stepper(
        grid,
        cfg.lam,
        StepperConfig(
            REF_METHOD,
            reference_stepsize(cfg),
            fp_tol=REF_FP_TOL,
            fp_max_iter=REF_FP_MAX_ITER,
        ),
    )
    # only the endpoint matters; sample nothing in between
    record = integrate(u0, stepper, cfg.t_end, sample_stride=10**9)
    return record.final


def store_reference(path, field: SpectralField, key: str) -> None:
    """Write coefficients atomically (temporary file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, coef=field.coef, key=np.bytes_(key.encode()))
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_reference(cache_dir, cfg: ExperimentConfig, grid) -> SpectralField | None:
    """Cached reference for ``cfg``, or None when absent or corrupt."""
    path = reference_path(cache_dir, cfg)
    if not path.exists():
        return None
    key = reference_key(cfg)
    try:
        with np.load(path) as data:
            stored_key = bytes(data["key"]).decode()
            coef = data["coef"]
        if stored_key != key:
            raise ValueError(f"stored key {stored_key} does not match {key}")
        return SpectralField.from_coefficients(grid, coef)
    except Exception as exc:
        warnings.warn(f"corrupt reference cache {path} ({exc}); recomputing", stacklevel=2)
        return None


def ensure_reference(cache_dir, cfg: ExperimentConfig, force: bool = False):
    """Reference solution, from cache when possible.

    Returns ``(field, from_cache)``; computes and stores on miss or
    corruption, recomputes unconditionally when ``force`` is set.
    """
    grid, _ = build_problem(cfg)
    if not force:
        cached = load_reference(cache_dir, cfg, grid)
        if cached is not None:
            return cached, True
    field = compute_reference(cfg)
    store_reference(reference_path(cache_dir, cfg), field, reference_key(cfg))
    return field, False


def reference_solution(cache_dir, cfg: ExperimentConfig, grid) -> SpectralField:
    """Reference state at ``t_end`` for error measurement.

    Plane-wave data use the closed form; everything else must have been
    cached by the reference command, else :class:`MissingReferenceError`.
    """
    if has_closed_form(cfg.initial):
        return exact_solution(grid, cfg.initial, cfg.lam, cfg.t_end)
    cached = load_reference(cache_dir, cfg, grid)
    if cached is None:
        raise MissingReferenceError(
            f"no cached reference under {cache_dir} for this problem; "
            "run the 'reference' command first"
        )
    return cached
