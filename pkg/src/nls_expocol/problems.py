"""Benchmark problems: initial data, presets, and closed-form solutions."""

from __future__ import annotations

import math

import numpy as np

from .grid import SpectralField, TorusGrid, make_grid

#: Initial-datum kinds understood by :func:`initial_field`.
INITIAL_KINDS = ("modulated_background", "inverse_sin_squared", "plane_wave")


def _mode_vector(mode, dim: int) -> list[int]:
    if isinstance(mode, (int, np.integer)):
        modes = [int(mode)] * dim
    else:
        modes = [int(m) for m in mode]
    if len(modes) != dim:
        raise ValueError(f"mode vector has length {len(modes)}, grid dimension is {dim}")
    return modes


def _wave_phase(grid: TorusGrid, mode) -> np.ndarray:
    modes = _mode_vector(mode, grid.dim)
    coords = grid.meshgrid()
    phase = np.zeros(grid.shape)
    for m, x in zip(modes, coords):
        phase = phase + (2.0 * np.pi * m / grid.period) * x
    return phase


def initial_field(grid: TorusGrid, spec: dict) -> SpectralField:
    """Evaluate an initial-datum spec on the grid.

    Supported kinds:

    * ``modulated_background``: ``base + amp * cos(kappa(mode) . x)``,
      a constant state carrying one small modulated harmonic.
    * ``inverse_sin_squared``: ``1 / (1 + sin(x)^2)`` (coordinates summed
      in higher dimensions), smooth and fully nonlinear.
    * ``plane_wave``: ``amplitude * exp(i kappa(mode) . x)``, the
      single-mode state with a closed-form evolution.
    """
    kind = spec.get("kind")
    if kind == "modulated_background":
        phase = _wave_phase(grid, spec.get("mode", 1))
        values = spec["base"] + spec["amp"] * np.cos(phase)
    elif kind == "inverse_sin_squared":
        s = sum(grid.meshgrid())
        values = 1.0 / (1.0 + np.sin(s) ** 2)
    elif kind == "plane_wave":
        phase = _wave_phase(grid, spec.get("mode", 1))
        values = spec["amplitude"] * np.exp(1j * phase)
    else:
        raise ValueError(f"unknown initial datum kind {kind!r}")
    return SpectralField.from_physical(grid, values)


def has_closed_form(spec: dict) -> bool:
    """True when the datum evolves in closed form (plane waves)."""
    return spec.get("kind") == "plane_wave"


def plane_wave_frequency(grid: TorusGrid, spec: dict, lam: float) -> float:
    """Phase velocity of a plane-wave datum: ``-(|kappa|^2 + lam a^2)``."""
    modes = _mode_vector(spec.get("mode", 1), grid.dim)
    ksq = sum((2.0 * np.pi * m / grid.period) ** 2 for m in modes)
    a = spec["amplitude"]
    return -(ksq + lam * a * a)


def exact_solution(grid: TorusGrid, spec: dict, lam: float, t: float) -> SpectralField:
    """Closed-form state at time ``t`` for data that admit one."""
    if not has_closed_form(spec):
        raise ValueError(f"no closed-form solution for kind {spec.get('kind')!r}")
    omega = plane_wave_frequency(grid, spec, lam)
    phase = _wave_phase(grid, spec.get("mode", 1))
    values = spec["amplitude"] * np.exp(1j * (phase + omega * t))
    return SpectralField.from_physical(grid, values)


#: Preset experiment setups; config loading merges these under user keys.
PRESETS: dict[str, dict] = {
    # weakly modulated constant state on a long box, focusing
    "test_one": {
        "lambda": -2.0,
        "dim": 1,
        "n": 128,
        "period": 4.0 * math.sqrt(2.0) * math.pi,
        "initial": {"kind": "modulated_background", "base": 0.5, "amp": 0.025, "mode": 1},
        "t_end": 10.0,
        "methods": ["ecm2", "ecm3"],
        "stepsizes": [0.02, 0.01],
    },
    # smooth fully nonlinear profile on the unit torus, defocusing
    "test_two": {
        "lambda": -1.0,
        "dim": 1,
        "n": 128,
        "period": 2.0 * math.pi,
        "initial": {"kind": "inverse_sin_squared"},
        "t_end": 10.0,
        "methods": ["ecm2", "ecm3", "strang", "eavf"],
        "stepsizes": [0.003125],
    },
    # single-mode state with closed-form evolution; order measurements
    "plane_wave": {
        "lambda": -2.0,
        "dim": 1,
        "n": 32,
        "period": 2.0 * math.pi,
        "initial": {"kind": "plane_wave", "amplitude": 0.8, "mode": 1},
        "t_end": 1.0,
        "methods": ["ecm2"],
        "stepsizes": [0.025, 0.0125, 0.00625, 0.003125],
    },
}


def preset(name: str) -> dict:
    """Deep copy of a preset's config dictionary."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}")
    import copy

    return copy.deepcopy(PRESETS[name])


def build_problem(cfg) -> tuple[TorusGrid, SpectralField]:
    """Grid and initial state for a loaded experiment config."""
    grid = make_grid(cfg.dim, cfg.n, cfg.period)
    return grid, initial_field(grid, cfg.initial)
