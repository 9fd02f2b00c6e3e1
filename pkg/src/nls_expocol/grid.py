"""Fourier pseudospectral discretization of the d-dimensional periodic torus.

Conventions used throughout:

* The domain is ``[0, L)^d`` sampled at ``n`` equispaced nodes per
  dimension, ``x_j = j L / n``.
* Fourier coefficients are mean-normalized: ``coef = fftn(phys) / n**d``,
  so the coefficient of the zero mode equals the spatial average and a
  pure mode ``exp(i kappa(k) x)`` has coefficient 1 in slot ``k``.
* Physical wavenumbers are ``kappa(k) = 2 pi k / L`` with integer ``k``
  stored in FFT order (``0, 1, ..., n/2 - 1, -n/2, ..., -1``).
* The L2 norm of a field is ``sqrt(sum |coef|^2)``, i.e. the square root
  of the mean of ``|phys|^2`` (Parseval with the normalization above).
"""

from __future__ import annotations

import numpy as np


class TorusGrid:
    """Uniform tensor grid on the torus with its spectral tables.

    Attributes:
        dim: Spatial dimension d.
        n: Number of nodes per dimension (even, at least 4).
        period: Side length L of the torus.
        shape: Array shape of a field, ``(n,) * dim``.
        npoints: Total node count ``n ** dim``.
        x: 1-d node coordinates ``j L / n`` (shared by every dimension).
        wavenumbers: Tuple of d integer wavenumber arrays in FFT order.
        kappa: Tuple of d physical wavenumber arrays ``2 pi k / L``.
        lap_symbol: Laplacian symbol ``-|kappa|^2`` on the full grid,
            shape ``(n,) * dim``, zero at the zero mode.
    """

    def __init__(self, dim: int, n: int, period: float):
        if dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim}")
        if n < 4 or n % 2 != 0:
            raise ValueError(f"n must be even and at least 4, got {n}")
        if not period > 0:
            raise ValueError(f"period must be positive, got {period}")

        self.dim = int(dim)
        self.n = int(n)
        self.period = float(period)
        self.shape = (self.n,) * self.dim
        self.npoints = self.n**self.dim

        self.x = np.arange(self.n) * (self.period / self.n)
        k_int = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        self.wavenumbers = tuple(k_int.copy() for _ in range(self.dim))
        self.kappa = tuple((2.0 * np.pi / self.period) * k for k in self.wavenumbers)

        ksq = np.zeros(self.shape)
        for axis, kap in enumerate(self.kappa):
            ksq = ksq + _along_axis(kap, axis, self.dim) ** 2
        self.ksq = ksq
        self.lap_symbol = -ksq

    def _fft_axes(self, values: np.ndarray) -> tuple[int, ...]:
        # transforms always act on the trailing dim axes so that stacked
        # fields (stages, ensembles) can be pushed through in one call
        return tuple(range(values.ndim - self.dim, values.ndim))

    def fft(self, values: np.ndarray) -> np.ndarray:
        """Forward transform to mean-normalized coefficients."""
        return np.fft.fftn(values, axes=self._fft_axes(values)) / self.npoints

    def ifft(self, coef: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fft`, back to nodal values."""
        return np.fft.ifftn(coef, axes=self._fft_axes(coef)) * self.npoints

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Node coordinates as d broadcast arrays of shape ``shape``."""
        return tuple(np.meshgrid(*(self.x,) * self.dim, indexing="ij"))

    def __repr__(self) -> str:
        return f"TorusGrid(dim={self.dim}, n={self.n}, period={self.period!r})"


def _along_axis(values: np.ndarray, axis: int, dim: int) -> np.ndarray:
    shape = [1] * dim
    shape[axis] = values.size
    return values.reshape(shape)


def make_grid(dim: int, n: int, period: float) -> TorusGrid:
    """Build a :class:`TorusGrid` with dimension, resolution, and period."""
    return TorusGrid(dim, n, period)


class SpectralField:
    """A field on a :class:`TorusGrid` with lazily synchronized representations.

    Either the nodal values or the Fourier coefficients may be supplied;
    the missing representation is computed on first access and cached.
    Fields are treated as immutable: operations return new instances.
    """

    def __init__(self, grid: TorusGrid, phys=None, coef=None):
        if phys is None and coef is None:
            raise ValueError("need at least one of phys or coef")
        self.grid = grid
        self._phys = None if phys is None else self._checked(phys)
        self._coef = None if coef is None else self._checked(coef)

    def _checked(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        return values

    @classmethod
    def from_physical(cls, grid: TorusGrid, values) -> "SpectralField":
        """Wrap nodal values on the grid."""
        return cls(grid, phys=values)

    @classmethod
    def from_coefficients(cls, grid: TorusGrid, coef) -> "SpectralField":
        """Wrap mean-normalized Fourier coefficients on the grid."""
        return cls(grid, coef=coef)

    @property
    def phys(self) -> np.ndarray:
        """Nodal values; computed from coefficients on first access."""
        if self._phys is None:
            self._phys = self.grid.ifft(self._coef)
        return self._phys

    @property
    def coef(self) -> np.ndarray:
        """Fourier coefficients; computed from nodal values on first access."""
        if self._coef is None:
            self._coef = self.grid.fft(self._phys)
        return self._coef

    def __repr__(self) -> str:
        reps = [name for name, arr in (("phys", self._phys), ("coef", self._coef)) if arr is not None]
        return f"SpectralField({self.grid!r}, valid={'+'.join(reps)})"


def to_fourier(f: SpectralField) -> SpectralField:
    """Ensure the coefficient representation is materialized; idempotent."""
    f.coef
    return f


def to_physical(f: SpectralField) -> SpectralField:
    """Ensure the nodal representation is materialized; idempotent."""
    f.phys
    return f


def apply_diagonal(multiplier: np.ndarray, f: SpectralField) -> SpectralField:
    """Apply a Fourier multiplier, entrywise on the coefficients.

    Args:
        multiplier: Array of per-mode factors, same shape as the grid.
        f: Input field.

    Returns:
        New field with coefficients ``multiplier * f.coef``.
    """
    multiplier = np.asarray(multiplier)
    if multiplier.shape != f.grid.shape:
        raise ValueError(
            f"multiplier shape {multiplier.shape} does not match grid shape {f.grid.shape}"
        )
    return SpectralField.from_coefficients(f.grid, multiplier * f.coef)


def h_alpha_norm(f: SpectralField, alpha: float) -> float:
    """Sobolev-type norm of order ``alpha``.

    Computed as ``sqrt(|c_0|^2 + sum_{k != 0} |kappa(k)|^(2 alpha) |c_k|^2)``.
    ``alpha = 0`` recovers the (mean-normalized) L2 norm.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    grid = f.grid
    with np.errstate(divide="ignore"):
        weights = grid.ksq**alpha
    weights[(0,) * grid.dim] = 1.0
    return float(np.sqrt(np.sum(weights * np.abs(f.coef) ** 2)))


def l2_norm(f: SpectralField) -> float:
    """Mean-normalized L2 norm, ``sqrt(mean |phys|^2)``."""
    return float(np.linalg.norm(f.coef))


def mass(f: SpectralField) -> float:
    """L2 norm of the field, conserved by the flow."""
    return l2_norm(f)


def energy(f: SpectralField, lam: float) -> float:
    """Discrete energy of the cubic Schroedinger flow.

    ``H = (1/2) sum_k |kappa(k)|^2 |c_k|^2 + (lam/4) mean(|u|^4)``,
    the spectral quadrature of the continuous energy density
    ``|grad u|^2 / 2 + lam |u|^4 / 4`` averaged over the torus.
    """
    kinetic = 0.5 * np.sum(f.grid.ksq * np.abs(f.coef) ** 2)
    potential = 0.25 * lam * np.mean(np.abs(f.phys) ** 4)
    return float(kinetic + potential)


def nonlinearity(f: SpectralField, lam: float) -> SpectralField:
    """Cubic nonlinear term ``-lam |u|^2 u``, evaluated at the nodes."""
    u = f.phys
    return SpectralField.from_physical(f.grid, -lam * np.abs(u) ** 2 * u)
