"""Evaluation of the phi functions of exponential integrators.

``phi_0(z) = e^z`` and ``phi_{m+1}(z) = (phi_m(z) - 1/m!) / z`` with
``phi_m(0) = 1/m!``; equivalently ``phi_m(z) = sum_n z^n / (n + m)!``.
Arguments here are purely imaginary in the intended use (diagonal of the
Laplacian symbol times ``i h``), but the evaluator accepts any complex z.

Near the origin the raising recurrence cancels catastrophically, so small
arguments go through the Taylor series instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# switch point between the Taylor series and the raising recurrence
_TAYLOR_CUTOFF = 0.5
_TAYLOR_TOL = 1e-20
_TAYLOR_MAX_TERMS = 200


def phi(m: int, z: complex) -> complex:
    """Evaluate ``phi_m`` at a single complex argument."""
    if m < 0:
        raise ValueError(f"order must be nonnegative, got {m}")
    z = complex(z)
    if m == 0:
        return cmath.exp(z)
    if abs(z) < _TAYLOR_CUTOFF:
        return _taylor_scalar(m, z)
    val = cmath.exp(z)
    fact = 1.0
    for j in range(m):
        val = (val - 1.0 / fact) / z
        fact *= j + 1
    return val


def _taylor_scalar(m: int, z: complex) -> complex:
    term = 1.0 / math.factorial(m)
    total = term
    for n in range(1, _TAYLOR_MAX_TERMS):
        term = term * z / (n + m)
        total += term
        if abs(term) < _TAYLOR_TOL:
            break
    return total


@dataclass(frozen=True)
class PhiTable:
    """Values of ``phi_m(args)`` for ``m = 0 .. max_order``.

    ``values[m]`` has the shape of ``args``; row 0 is the plain complex
    exponential of the arguments.
    """

    max_order: int
    args: np.ndarray
    values: np.ndarray

    def row(self, m: int) -> np.ndarray:
        return self.values[m]


def phi_table(args: np.ndarray, max_order: int) -> PhiTable:
    """Tabulate ``phi_0 .. phi_max_order`` over an array of arguments."""
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")
    args = np.asarray(args, dtype=complex)
    values = np.empty((max_order + 1,) + args.shape, dtype=complex)
    values[0] = np.exp(args)
    if max_order == 0:
        return PhiTable(max_order, args, values)

    small = np.abs(args) < _TAYLOR_CUTOFF
    big = ~small

    z_big = args[big]
    val = values[0][big]
    fact = 1.0
    for j in range(max_order):
        val = (val - 1.0 / fact) / z_big
        fact *= j + 1
        values[j + 1][big] = val

    z_small = args[small]
    for m in range(1, max_order + 1):
        values[m][small] = _taylor_array(m, z_small)

    return PhiTable(max_order, args, values)


def _taylor_array(m: int, z: np.ndarray) -> np.ndarray:
    term = np.full(z.shape, 1.0 / math.factorial(m), dtype=complex)
    total = term.copy()
    for n in range(1, _TAYLOR_MAX_TERMS):
        term = term * z / (n + m)
        total += term
        if not np.any(np.abs(term) > _TAYLOR_TOL):
            break
    return total
