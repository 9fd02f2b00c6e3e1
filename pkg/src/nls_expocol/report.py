"""Delimited output and figure rendering for experiment results.

CSV files are UTF-8 with a header row, comma separators, and floats at 17
significant digits, enough to round-trip doubles exactly.  Each writer has
a figure companion rendering the same data to a PNG next to the CSV.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .integrators import RunRecord


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans have no CSV representation here")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _sample_rows(record: RunRecord):
    # the t=0 sample only stands in when the run took no steps
    start = 0 if len(record.times) == 1 else 1
    e_err = record.energy_error()
    m_err = record.mass_error()
    for i in range(start, len(record.times)):
        yield record.times[i], e_err[i], m_err[i], int(record.fp_iterations[i])


def write_run_outputs(out_dir, record: RunRecord) -> Path:
    """``run.csv`` (+ figure): per-sample conservation and solver effort."""
    rows = list(_sample_rows(record))
    path = write_csv(
        Path(out_dir) / "run.csv",
        ["t", "energy_error", "mass_error", "fp_iterations"],
        rows,
    )
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    t = [r[0] for r in rows]
    ax1.semilogy(t, [max(r[1], 1e-18) for r in rows], label="|H - H0|")
    ax1.semilogy(t, [max(r[2], 1e-18) for r in rows], label="| |u| - |u0| |")
    ax1.set_xlabel("t")
    ax1.set_title(f"{record.method}, h={record.h:g}")
    ax1.legend()
    ax2.plot(t, [r[3] for r in rows])
    ax2.set_xlabel("t")
    ax2.set_ylabel("fixed-point iterations")
    fig.tight_layout()
    fig.savefig(Path(out_dir) / "run.png", dpi=150)
    plt.close(fig)
    return path


def observed_orders(errors) -> list[float]:
    """``log2`` ratios of consecutive errors; nan-padded to input length."""
    orders = []
    for a, b in zip(errors, errors[1:]):
        with np.errstate(divide="ignore", invalid="ignore"):
            orders.append(float(np.log2(a / b)) if b > 0 and a > 0 else float("nan"))
    orders.append(float("nan"))
    return orders


def write_converge_outputs(out_dir, method: str, t_end: float, stepsizes, errors) -> Path:
    """``converge.csv`` (+ figure): error and observed order per stepsize."""
    orders = observed_orders(errors)
    rows = [(h, e, o) for h, e, o in zip(stepsizes, errors, orders)]
    path = write_csv(Path(out_dir) / "converge.csv", ["h", "error", "observed_order"], rows)

    fig, ax = plt.subplots(figsize=(4.5, 3.6))
    steps = [t_end / h for h in stepsizes]
    ax.loglog(steps, errors, "o-", label=method)
    if errors[0] > 0:
        for slope in (2, 4, 6):
            guide = [errors[0] * (steps[0] / s) ** slope for s in steps]
            ax.loglog(steps, guide, "--", linewidth=0.8, label=f"order {slope}")
    ax.set_xlabel("T / h")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(out_dir) / "converge.png", dpi=150)
    plt.close(fig)
    return path


def write_drift_outputs(out_dir, record: RunRecord) -> Path:
    """``drift.csv`` (+ summary and figure): energy deviation over time."""
    rows = [(r[0], r[1]) for r in _sample_rows(record)]
    path = write_csv(Path(out_dir) / "drift.csv", ["t", "energy_error"], rows)

    err = record.energy_error()
    half = record.times <= record.t_end / 2
    first = float(np.max(err[half])) if np.any(half) else 0.0
    second = float(np.max(err))
    write_csv(
        Path(out_dir) / "drift_summary.csv",
        ["max_energy_error", "first_half_max", "second_half_max"],
        [(second, first, float(np.max(err[~half])) if np.any(~half) else 0.0)],
    )

    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    ax.semilogy([r[0] for r in rows], [max(r[1], 1e-18) for r in rows])
    ax.set_xlabel("t")
    ax.set_ylabel("|H - H0|")
    ax.set_title(f"{record.method}, h={record.h:g}")
    fig.tight_layout()
    fig.savefig(Path(out_dir) / "drift.png", dpi=150)
    plt.close(fig)
    return path


def write_compare_outputs(out_dir, rows) -> Path:
    """``compare.csv`` (+ figure): one row per (method, stepsize).

    Row cells: method, h, error, max_energy_error, wall_clock,
    mean_fp_iterations.
    """
    path = write_csv(
        Path(out_dir) / "compare.csv",
        ["method", "h", "error", "max_energy_error", "wall_clock", "mean_fp_iterations"],
        rows,
    )
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    by_method: dict[str, list] = {}
    for method, h, err, *_ in rows:
        by_method.setdefault(method, []).append((h, err))
    for method, data in by_method.items():
        data.sort()
        ax.loglog([d[0] for d in data], [max(d[1], 1e-18) for d in data], "o-", label=method)
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(out_dir) / "compare.png", dpi=150)
    plt.close(fig)
    return path
