"""Collocation tables for exponential collocation stepping.

The time-local ansatz lives in the span of the orthonormal shifted
Legendre polynomials ``psi_j`` on [0, 1].  Interaction of that basis with
the free propagator is captured by averaged-propagator multipliers

    abar_{tau,sigma}(w) = int_0^1 e^{(1-xi) tau w} P(xi tau, sigma) dxi,
    P(a, b) = sum_{j<r} psi_j(a) psi_j(b),

which act mode by mode on the diagonal ``w = i h * lap_symbol``.  With the
monomial expansion ``psi_j(t) = sum_m a[j][m] t^m`` the integral reduces to
phi functions through ``int_0^1 e^{(1-xi) w} xi^m dxi = m! phi_{m+1}(w)``,
so one phi table per stage time covers every multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly

from .grid import TorusGrid
from .phifun import PhiTable, phi_table

# coefficient growth makes the monomial basis useless well before this
MAX_STAGES = 10


def shifted_legendre_coeffs(r: int) -> np.ndarray:
    """Monomial coefficients of the orthonormal shifted Legendre basis.

    Returns an ``(r, r)`` array with ``psi_j(t) = sum_m coeffs[j, m] t^m``,
    orthonormal in ``L^2(0, 1)``: ``psi_j = sqrt(2j+1) P_j(2t - 1)``.
    """
    if r < 1 or r > MAX_STAGES:
        raise ValueError(f"stage count must be between 1 and {MAX_STAGES}, got {r}")
    coeffs = np.zeros((r, r))
    for j in range(r):
        scale = math.sqrt(2 * j + 1)
        for m in range(j + 1):
            coeffs[j, m] = scale * (-1) ** (j - m) * math.comb(j, m) * math.comb(j + m, m)
    return coeffs


def gauss_legendre(r: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1], exact to degree 2r-1."""
    if r < 1:
        raise ValueError(f"need at least one node, got {r}")
    x, w = npleg.leggauss(r)
    return (x + 1.0) / 2.0, w / 2.0


@dataclass(frozen=True)
class CollocationTableau:
    """Nodes, weights, and basis table for an r-stage collocation step."""

    r: int
    nodes: np.ndarray
    weights: np.ndarray
    basis_coeffs: np.ndarray

    def basis_values(self, t) -> np.ndarray:
        """Evaluate all ``psi_j`` at ``t``; shape ``(r,) + shape(t)``."""
        return nppoly.polyval(t, self.basis_coeffs.T)


def make_tableau(r: int) -> CollocationTableau:
    """Build the r-stage tableau (Gauss nodes, weights, Legendre basis)."""
    nodes, weights = gauss_legendre(r)
    return CollocationTableau(r, nodes, weights, shifted_legendre_coeffs(r))


def projection_apply(tableau: CollocationTableau, g, taus) -> np.ndarray:
    """Evaluate the L^2(0,1) projection of ``g`` onto the basis at ``taus``.

    ``g`` is a callable on [0, 1]; the projection coefficients are computed
    with a quadrature sharp for polynomials far beyond degree r, so basis
    polynomials are reproduced to roundoff.
    """
    qx, qw = gauss_legendre(max(32, 2 * tableau.r))
    gq = np.asarray([g(t) for t in qx])
    basis_q = tableau.basis_values(qx)
    coeffs = basis_q @ (qw * gq)
    return coeffs @ tableau.basis_values(np.asarray(taus, dtype=float))


def abar_multiplier(
    tableau: CollocationTableau,
    phi_tab: PhiTable,
    tau: float,
    l: int,
    lap_symbol: np.ndarray,
    h: float,
) -> np.ndarray:
    """Per-mode averaged-propagator multiplier ``abar_{tau, c_l}(i h lap)``.

    ``phi_tab`` must hold orders ``0 .. r`` at arguments
    ``1j * tau * h * lap_symbol``; the caller owns that contract so one
    table can serve all r multipliers sharing a stage time.
    """
    r = tableau.r
    if phi_tab.max_order < r:
        raise ValueError(f"phi table holds orders up to {phi_tab.max_order}, need {r}")
    if phi_tab.values[0].shape != lap_symbol.shape:
        raise ValueError("phi table shape does not match the Laplacian symbol")
    psi_at_cl = tableau.basis_values(tableau.nodes[l])
    out = np.zeros(lap_symbol.shape, dtype=complex)
    for m in range(r):
        w_m = math.factorial(m) * tau**m * float(psi_at_cl @ tableau.basis_coeffs[:, m])
        out += w_m * phi_tab.values[m + 1]
    return out


@dataclass(frozen=True)
class EcmOperatorSet:
    """Diagonal operator tables for one exponential collocation stepsize.

    Attributes:
        h: Stepsize the tables were built for.
        tableau: The collocation tableau used.
        exp_stage: ``e^{c_k h i lap}`` per stage, shape ``(r,) + grid.shape``.
        exp_final: ``e^{h i lap}``, shape ``grid.shape``.
        abar_stage: ``abar_{c_k, c_l}`` multipliers, ``(r, r) + grid.shape``.
        abar_final: ``abar_{1, c_l}`` multipliers, ``(r,) + grid.shape``.
    """

    h: float
    tableau: CollocationTableau
    exp_stage: np.ndarray
    exp_final: np.ndarray
    abar_stage: np.ndarray
    abar_final: np.ndarray


def build_operator_set(grid: TorusGrid, tableau: CollocationTableau, h: float) -> EcmOperatorSet:
    """Precompute all diagonal tables needed by an r-stage step of size h."""
    if not h > 0:
        raise ValueError(f"stepsize must be positive, got {h}")
    r = tableau.r
    lap = grid.lap_symbol
    exp_stage = np.empty((r,) + grid.shape, dtype=complex)
    abar_stage = np.empty((r, r) + grid.shape, dtype=complex)
    abar_final = np.empty((r,) + grid.shape, dtype=complex)

    for k, ck in enumerate(tableau.nodes):
        tab = phi_table(1j * ck * h * lap, r)
        exp_stage[k] = tab.values[0]
        for l in range(r):
            abar_stage[k, l] = abar_multiplier(tableau, tab, ck, l, lap, h)

    tab = phi_table(1j * h * lap, r)
    exp_final = tab.values[0]
    for l in range(r):
        abar_final[l] = abar_multiplier(tableau, tab, 1.0, l, lap, h)

    return EcmOperatorSet(h, tableau, exp_stage, exp_final, abar_stage, abar_final)
