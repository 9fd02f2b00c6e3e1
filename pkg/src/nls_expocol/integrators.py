"""Time steppers for the cubic Schroedinger flow ``i u_t + lap u = lam |u|^2 u``.

All steppers advance mean-normalized Fourier coefficients and share the
convention ``u_t = i lap u + i f(u)`` with ``f(u) = -lam |u|^2 u``:

* ``EcmStepper``: r-stage exponential collocation.  Stage values at Gauss
  nodes satisfy a fixed-point system coupling the free flight with
  averaged-propagator multipliers; order 2r.
* ``StrangStepper``: splitting with exact nonlinear phase rotation around
  an exact free flight; order 2.
* ``EavfStepper``: exponential averaged-vector-field step, implicit in the
  endpoint; order 2, dissipation-free linear part.

Implicit steppers solve their systems by Picard iteration started from the
free flight, with a relative-residual stop and divergence guards.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .collocation import build_operator_set, gauss_legendre, make_tableau
from .grid import SpectralField, TorusGrid, energy, mass
from .phifun import phi_table

_DEFAULT_FP_TOL = 1e-16
_DEFAULT_FP_MAX_ITER = 5
# residual floor below which growth is roundoff jitter, not divergence
_DIVERGENCE_FLOOR = 1e-8
_GROWTH_RUN = 3

METHOD_NAMES = ("strang", "eavf") + tuple(f"ecm{r}" for r in range(1, 11))


class DivergenceError(RuntimeError):
    """Picard iteration failed to contract (blow-up or stepsize too large)."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


def parse_method(name: str) -> tuple[str, int]:
    """Split a method name into family and stage count.

    ``"ecm3" -> ("ecm", 3)``; ``"strang"`` and ``"eavf"`` carry no stages.
    """
    if name == "strang":
        return "strang", 0
    if name == "eavf":
        return "eavf", 0
    if name.startswith("ecm"):
        try:
            r = int(name[3:])
        except ValueError:
            raise ValueError(f"unknown method {name!r}") from None
        if not 1 <= r <= 10:
            raise ValueError(f"ecm stage count must be between 1 and 10, got {r}")
        return "ecm", r
    raise ValueError(f"unknown method {name!r}")


@dataclass
class StepperConfig:
    """Method selection and stepping parameters."""

    method: str
    h: float
    fp_tol: float = _DEFAULT_FP_TOL
    fp_max_iter: int = _DEFAULT_FP_MAX_ITER
    error_alpha: float = 0.0

    def __post_init__(self):
        parse_method(self.method)
        if not self.h > 0:
            raise ValueError(f"stepsize must be positive, got {self.h}")
        if not self.fp_tol > 0:
            raise ValueError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise ValueError(f"fp_max_iter must be at least 1, got {self.fp_max_iter}")
        if self.error_alpha < 0:
            raise ValueError(f"error_alpha must be nonnegative, got {self.error_alpha}")


@dataclass(frozen=True)
class StepReport:
    """Per-step diagnostics returned alongside the new state."""

    iterations: int
    residual: float
    energy: float
    mass: float
    residuals: tuple[float, ...] = ()


def _relative_residual(new: np.ndarray, old: np.ndarray, grid_ndim: int) -> float:
    axes = tuple(range(new.ndim - grid_ndim, new.ndim))
    num = np.sqrt(np.sum(np.abs(new - old) ** 2, axis=axes))
    den = np.sqrt(np.sum(np.abs(old) ** 2, axis=axes))
    rel = num / np.maximum(den, 1e-300)
    return float(np.max(rel))


def fixed_point_solve(update, guess: np.ndarray, tol: float, max_iter: int, grid_ndim: int):
    """Picard iteration ``y <- update(y)`` from ``guess``.

    The residual is the relative L2 change per stage (leading axes of the
    iterate are treated as stage indices, trailing ``grid_ndim`` axes as the
    field).  Raises :class:`DivergenceError` on non-finite iterates or when
    the residual grows over three consecutive iterations well above the
    roundoff floor.

    Returns ``(y, iterations, residuals)``.
    """
    y = guess
    residuals: list[float] = []
    for _ in range(max_iter):
        y_new = update(y)
        res = _relative_residual(y_new, y, grid_ndim)
        residuals.append(res)
        if not np.isfinite(res):
            raise DivergenceError("fixed-point iterate became non-finite")
        if (
            len(residuals) > _GROWTH_RUN
            and res > _DIVERGENCE_FLOOR
            and all(
                residuals[-i] > residuals[-i - 1] for i in range(1, _GROWTH_RUN + 1)
            )
        ):
            raise DivergenceError(
                f"fixed-point residual grew over {_GROWTH_RUN} consecutive iterations "
                f"(last {res:.3e}); reduce the stepsize"
            )
        y = y_new
        if res <= tol:
            break
    return y, len(residuals), residuals


class EcmStepper:
    """r-stage exponential collocation step of fixed size h.

    Diagonal tables are built once; each step costs one Picard solve for
    the stage system plus a single update row.
    """

    def __init__(
        self,
        grid: TorusGrid,
        lam: float,
        r: int,
        h: float,
        fp_tol: float = _DEFAULT_FP_TOL,
        fp_max_iter: int = _DEFAULT_FP_MAX_ITER,
    ):
        self.grid = grid
        self.lam = float(lam)
        self.r = int(r)
        self.h = float(h)
        self.fp_tol = float(fp_tol)
        self.fp_max_iter = int(fp_max_iter)
        self.name = f"ecm{r}"

        self.tableau = make_tableau(r)
        self.ops = build_operator_set(grid, self.tableau, self.h)
        c = self.tableau.nodes
        b = self.tableau.weights
        # merged weights: stage row k gets i c_k h b_l abar_{c_k, c_l},
        # the update row gets i h b_l abar_{1, c_l}
        lead = (self.r, self.r) + (1,) * grid.dim
        cb = (c[:, None] * b[None, :]).reshape(lead)
        self._stage_w = 1j * self.h * cb * self.ops.abar_stage
        self._final_w = 1j * self.h * b.reshape((self.r,) + (1,) * grid.dim) * self.ops.abar_final

    def with_h(self, h: float) -> "EcmStepper":
        return EcmStepper(self.grid, self.lam, self.r, h, self.fp_tol, self.fp_max_iter)

    def _nonlin_hat(self, stages_hat: np.ndarray) -> np.ndarray:
        y = self.grid.ifft(stages_hat)
        return self.grid.fft(-self.lam * np.abs(y) ** 2 * y)

    def solve_stages(self, coef: np.ndarray):
        """Solve the stage system for one step from coefficients ``coef``.

        Returns ``(stages_hat, iterations, residuals)``.
        """
        free = self.ops.exp_stage * coef

        def update(y):
            return free + np.einsum("kl...,l...->k...", self._stage_w, self._nonlin_hat(y))

        return fixed_point_solve(update, free, self.fp_tol, self.fp_max_iter, self.grid.dim)

    def step(self, u: SpectralField) -> tuple[SpectralField, StepReport]:
        stages, iterations, residuals = self.solve_stages(u.coef)
        # the update row reuses the nonlinearity at the solved stages
        g = self._nonlin_hat(stages)
        new_coef = self.ops.exp_final * u.coef + np.einsum("l...,l...->...", self._final_w, g)
        out = SpectralField.from_coefficients(self.grid, new_coef)
        report = StepReport(
            iterations=iterations,
            residual=residuals[-1],
            energy=energy(out, self.lam),
            mass=mass(out),
            residuals=tuple(residuals),
        )
        return out, report


class StrangStepper:
    """Strang splitting: half nonlinear rotation, free flight, half rotation."""

    def __init__(self, grid: TorusGrid, lam: float, h: float):
        self.grid = grid
        self.lam = float(lam)
        self.h = float(h)
        self.name = "strang"
        self._linear = np.exp(1j * h * grid.lap_symbol)

    def with_h(self, h: float) -> "StrangStepper":
        return StrangStepper(self.grid, self.lam, h)

    def _half_rotation(self, u: np.ndarray) -> np.ndarray:
        # |u| is invariant under the nonlinear subflow, so the phase
        # rotation is exact
        return u * np.exp(-0.5j * self.lam * self.h * np.abs(u) ** 2)

    def step(self, u: SpectralField) -> tuple[SpectralField, StepReport]:
        v = self._half_rotation(u.phys)
        v = self.grid.ifft(self._linear * self.grid.fft(v))
        v = self._half_rotation(v)
        out = SpectralField.from_physical(self.grid, v)
        report = StepReport(
            iterations=0,
            residual=0.0,
            energy=energy(out, self.lam),
            mass=mass(out),
        )
        return out, report


class EavfStepper:
    """Exponential averaged-vector-field step, implicit in the endpoint.

    ``u1 = e^{i h lap} u0 + i h phi_1(i h lap) int_0^1 f((1-s) u0 + s u1) ds``
    with the average taken by fixed Gauss quadrature in s.
    """

    def __init__(
        self,
        grid: TorusGrid,
        lam: float,
        h: float,
        fp_tol: float = _DEFAULT_FP_TOL,
        fp_max_iter: int = _DEFAULT_FP_MAX_ITER,
        quad_points: int = 4,
    ):
        self.grid = grid
        self.lam = float(lam)
        self.h = float(h)
        self.fp_tol = float(fp_tol)
        self.fp_max_iter = int(fp_max_iter)
        self.quad_points = int(quad_points)
        self.name = "eavf"
        tab = phi_table(1j * h * grid.lap_symbol, 1)
        self._linear = tab.values[0]
        self._phi1 = tab.values[1]
        self._qx, self._qw = gauss_legendre(self.quad_points)

    def with_h(self, h: float) -> "EavfStepper":
        return EavfStepper(
            self.grid, self.lam, h, self.fp_tol, self.fp_max_iter, self.quad_points
        )

    def _averaged_nonlin(self, u0_phys: np.ndarray, u1_phys: np.ndarray) -> np.ndarray:
        avg = np.zeros_like(u0_phys)
        for s, w in zip(self._qx, self._qw):
            v = (1.0 - s) * u0_phys + s * u1_phys
            avg += w * (-self.lam * np.abs(v) ** 2 * v)
        return avg

    def step(self, u: SpectralField) -> tuple[SpectralField, StepReport]:
        uc = u.coef
        up = u.phys
        drift = self._linear * uc

        def update(vc):
            avg = self._averaged_nonlin(up, self.grid.ifft(vc))
            return drift + 1j * self.h * self._phi1 * self.grid.fft(avg)

        vc, iterations, residuals = fixed_point_solve(
            update, drift, self.fp_tol, self.fp_max_iter, self.grid.dim
        )
        out = SpectralField.from_coefficients(self.grid, vc)
        report = StepReport(
            iterations=iterations,
            residual=residuals[-1],
            energy=energy(out, self.lam),
            mass=mass(out),
            residuals=tuple(residuals),
        )
        return out, report


def make_stepper(grid: TorusGrid, lam: float, cfg: StepperConfig):
    """Instantiate the stepper selected by ``cfg.method``."""
    family, r = parse_method(cfg.method)
    if family == "ecm":
        return EcmStepper(grid, lam, r, cfg.h, cfg.fp_tol, cfg.fp_max_iter)
    if family == "strang":
        return StrangStepper(grid, lam, cfg.h)
    return EavfStepper(grid, lam, cfg.h, cfg.fp_tol, cfg.fp_max_iter)


@dataclass
class RunRecord:
    """Sampled history of one integration run.

    Sample 0 is the initial state; later samples are post-step states at
    the configured stride (the final step is always sampled).
    """

    method: str
    h: float
    t_end: float
    times: np.ndarray
    energy: np.ndarray
    mass: np.ndarray
    fp_iterations: np.ndarray
    final: SpectralField
    wall_clock: float
    steps: int = 0

    def energy_error(self) -> np.ndarray:
        return np.abs(self.energy - self.energy[0])

    def mass_error(self) -> np.ndarray:
        return np.abs(self.mass - self.mass[0])


# tolerance for recognizing t_end as a whole number of steps
_WHOLE_STEP_RTOL = 8 * np.finfo(float).eps


def _split_steps(t_end: float, h: float) -> tuple[int, float | None]:
    q = t_end / h
    n = int(round(q))
    if abs(q - n) <= _WHOLE_STEP_RTOL * max(1.0, abs(q)):
        return n, None
    n = int(np.floor(q))
    remainder = t_end - n * h
    if remainder / h <= _WHOLE_STEP_RTOL:
        return n, None
    return n, remainder


def integrate(
    u0: SpectralField,
    stepper,
    t_end: float,
    sample_stride: int = 1,
    observers=(),
) -> RunRecord:
    """Advance ``u0`` to ``t_end`` with a fixed-size stepper.

    ``t_end`` is split into whole steps of ``stepper.h`` plus, when the
    division is not exact, one rebuilt partial step.  Observers are called
    as ``observer(t, field, report)`` after every step.  Step failures are
    re-raised with the offending step index attached.
    """
    if t_end < 0:
        raise ValueError(f"t_end must be nonnegative, got {t_end}")
    if sample_stride < 1:
        raise ValueError(f"sample_stride must be at least 1, got {sample_stride}")

    start = time.perf_counter()
    lam = stepper.lam
    u = u0
    times = [0.0]
    energies = [energy(u0, lam)]
    masses = [mass(u0)]
    iters = [0]

    steps, remainder = _split_steps(t_end, stepper.h)

    def record(t, rep):
        times.append(t)
        energies.append(rep.energy)
        masses.append(rep.mass)
        iters.append(rep.iterations)

    for i in range(steps):
        try:
            u, rep = stepper.step(u)
        except DivergenceError as exc:
            raise DivergenceError(f"step {i}: {exc}", step_index=i) from exc
        t = (i + 1) * stepper.h
        for obs in observers:
            obs(t, u, rep)
        if (i + 1) % sample_stride == 0 or (i == steps - 1 and remainder is None):
            record(t, rep)

    if remainder is not None:
        tail = stepper.with_h(remainder)
        try:
            u, rep = tail.step(u)
        except DivergenceError as exc:
            raise DivergenceError(f"step {steps}: {exc}", step_index=steps) from exc
        for obs in observers:
            obs(t_end, u, rep)
        record(t_end, rep)

    total_steps = steps + (1 if remainder is not None else 0)
    return RunRecord(
        method=stepper.name,
        h=stepper.h,
        t_end=float(t_end),
        times=np.asarray(times),
        energy=np.asarray(energies),
        mass=np.asarray(masses),
        fp_iterations=np.asarray(iters, dtype=int),
        final=u,
        wall_clock=time.perf_counter() - start,
        steps=total_steps,
    )
