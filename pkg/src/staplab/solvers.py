"""Ground-truth evolution operators for three 1D periodic PDEs.

Each step operator advances a state by one macro time step dt = T/L using
internal sub-stepping chosen for stability:

- Burgers  u_t + u u_x = (nu/pi) u_xx   -- finite differences (upwind flux +
  central diffusion), explicit RK2, fixed substep from a CFL bound.
- KdV      u_t + u u_x + u_xxx = 0      -- pseudospectral with 2/3 dealiasing,
  adaptive Dormand-Prince (RK45) in time.
- KS       u_t + u_xx + u_xxxx + u u_x = 0 -- pseudospectral ETDRK4 with the
  linear part treated exactly and phi-coefficients by contour averaging.

Step operators are pure functions; the batched *_values forms advance many
states as rows of one array. For Burgers and KS the row-wise results are
bit-identical to single-state calls (all operations are row-independent),
which lets pool generation batch freely. KdV always integrates one state per
solve: a shared adaptive step would couple rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy.integrate import solve_ivp

from .errors import NumericalBlowup, StepSizeUnderflow

BLOWUP_CAP = 1e6

# CFL constants for the Burgers substep choice: reference advection speed,
# safety factor applied to the stability bound.
_CFL_SPEED = 5.0
_CFL_SAFETY = 0.5


class PdeKind(enum.Enum):
    BURGERS = "burgers"
    KDV = "kdv"
    KS = "ks"


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid: num_points samples of a domain of length X."""

    num_points: int
    domain_length: float

    def __post_init__(self):
        n = self.num_points
        if n <= 0 or (n & (n - 1)) != 0:
            raise ValueError(f"num_points must be a positive power of two, got {n}")
        if self.domain_length <= 0:
            raise ValueError(f"domain_length must be positive, got {self.domain_length}")

    @property
    def spacing(self) -> float:
        return self.domain_length / self.num_points

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.num_points) * self.spacing


@dataclass(eq=False)
class State:
    values: np.ndarray
    grid: SpatialGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.num_points,):
            raise ValueError(
                f"state has {self.values.shape} values for a {self.grid.num_points}-point grid"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("state contains non-finite values")


@dataclass(frozen=True)
class PdeSpec:
    kind: PdeKind
    time_horizon: float
    trajectory_length: int
    grid: SpatialGrid
    viscosity: float = 0.0
    substeps: int | None = None

    def __post_init__(self):
        if self.time_horizon <= 0:
            raise ValueError("time_horizon must be positive")
        if self.trajectory_length <= 0:
            raise ValueError("trajectory_length must be positive")
        if self.kind == PdeKind.BURGERS and self.viscosity <= 0:
            raise ValueError("Burgers requires positive viscosity")
        if self.substeps is not None and self.substeps < 1:
            raise ValueError("substeps must be >= 1")

    @property
    def macro_dt(self) -> float:
        return self.time_horizon / self.trajectory_length

    def resolved_substeps(self) -> int:
        if self.substeps is not None:
            return self.substeps
        if self.kind == PdeKind.BURGERS:
            return _burgers_default_substeps(self)
        if self.kind == PdeKind.KS:
            return 4
        return 1  # KdV is adaptive


def burgers_spec(viscosity: float = 0.01, *, num_points: int = 256,
                 domain_length: float = 1.0, time_horizon: float = 2.0,
                 trajectory_length: int = 13, substeps: int | None = None) -> PdeSpec:
    grid = SpatialGrid(num_points, domain_length)
    return PdeSpec(PdeKind.BURGERS, time_horizon, trajectory_length, grid,
                   viscosity=viscosity, substeps=substeps)


def kdv_spec(*, num_points: int = 256, domain_length: float = 128.0,
             time_horizon: float = 52.0, trajectory_length: int = 13,
             substeps: int | None = None) -> PdeSpec:
    grid = SpatialGrid(num_points, domain_length)
    return PdeSpec(PdeKind.KDV, time_horizon, trajectory_length, grid, substeps=substeps)


def ks_spec(*, num_points: int = 256, domain_length: float = 1.0,
            time_horizon: float = 13.0, trajectory_length: int = 26,
            substeps: int | None = None) -> PdeSpec:
    grid = SpatialGrid(num_points, domain_length)
    return PdeSpec(PdeKind.KS, time_horizon, trajectory_length, grid, substeps=substeps)


@dataclass(eq=False)
class Trajectory:
    """L+1 states at fixed macro-step spacing; row 0 is the initial condition.

    spec is present for solver-produced trajectories and None for
    surrogate-only rollouts, which have no PDE attached.
    """

    values: np.ndarray  # (n_steps + 1, Nx)
    grid: SpatialGrid
    spec: PdeSpec | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != self.grid.num_points:
            raise ValueError(f"trajectory values have shape {self.values.shape}")
        if self.spec is not None and self.spec.grid != self.grid:
            raise ValueError("trajectory grid disagrees with its spec")

    @property
    def states(self) -> list[State]:
        return [State(row, self.grid) for row in self.values]

    def __len__(self) -> int:
        return self.values.shape[0]


def _check_blowup(values: np.ndarray, where: str, step_index: int | None = None):
    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > BLOWUP_CAP:
        raise NumericalBlowup(f"{where}: solution non-finite or above {BLOWUP_CAP:g}",
                              step_index=step_index)


# ---------------------------------------------------------------------------
# Burgers: conservative upwind flux + central diffusion, RK2 (Heun)

def _burgers_default_substeps(spec: PdeSpec) -> int:
    dx = spec.grid.spacing
    nu_eff = spec.viscosity / math.pi
    adv_limit = dx / _CFL_SPEED
    diff_limit = dx * dx / (2.0 * nu_eff)
    stable_dt = _CFL_SAFETY * min(adv_limit, diff_limit)
    return max(1, math.ceil(spec.macro_dt / stable_dt))


def _burgers_rhs(u: np.ndarray, dx: float, nu_eff: float) -> np.ndarray:
    # Roe-upwinded flux of u^2/2 at the i+1/2 interfaces, then a conservative
    # difference; diffusion by the standard three-point stencil.
    u_right = np.roll(u, -1, axis=-1)
    speed = u + u_right
    flux = np.where(speed >= 0.0, u * u, u_right * u_right) * 0.5
    adv = (flux - np.roll(flux, 1, axis=-1)) / dx
    lap = (u_right - 2.0 * u + np.roll(u, 1, axis=-1)) / (dx * dx)
    return nu_eff * lap - adv


def step_burgers_values(u: np.ndarray, spec: PdeSpec) -> np.ndarray:
    """One macro step for one state (Nx,) or a batch of rows (R, Nx)."""
    dx = spec.grid.spacing
    nu_eff = spec.viscosity / math.pi
    n_sub = spec.resolved_substeps()
    dt = spec.macro_dt / n_sub
    out = np.array(u, dtype=np.float64, copy=True)
    # transient overflow is expected on the way to the blowup check below
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_sub):
            k1 = _burgers_rhs(out, dx, nu_eff)
            k2 = _burgers_rhs(out + dt * k1, dx, nu_eff)
            out += (0.5 * dt) * (k1 + k2)
    _check_blowup(out, "burgers step")
    return out


def step_burgers(state: State, spec: PdeSpec) -> State:
    if spec.kind != PdeKind.BURGERS:
        raise ValueError(f"step_burgers called with {spec.kind}")
    return State(step_burgers_values(state.values, spec), spec.grid)


# ---------------------------------------------------------------------------
# KdV: pseudospectral RHS, adaptive RK45 in time

def _spectral_setup(grid: SpatialGrid):
    nx = grid.num_points
    kappa = 2.0 * np.pi * np.arange(nx // 2 + 1) / grid.domain_length
    # 2/3 dealiasing: keep modes k <= Nx/3 before and after forming products.
    dealias = (np.arange(nx // 2 + 1) <= nx // 3).astype(np.float64)
    return kappa, dealias


_KDV_CACHE: dict[tuple, tuple] = {}


def _kdv_operators(grid: SpatialGrid):
    key = (grid.num_points, grid.domain_length)
    if key not in _KDV_CACHE:
        kappa, dealias = _spectral_setup(grid)
        deriv = 1j * kappa
        deriv[-1] = 0.0  # odd derivative is ill-defined at the Nyquist mode
        dispersion = 1j * kappa**3
        dispersion[-1] = 0.0
        _KDV_CACHE[key] = (deriv, dispersion, dealias)
    return _KDV_CACHE[key]


def _kdv_rhs_values(u: np.ndarray, deriv, dispersion, dealias) -> np.ndarray:
    u_hat = sfft.rfft(u)
    u_filtered = sfft.irfft(dealias * u_hat, n=u.shape[-1])
    nonlin_hat = dealias * sfft.rfft(u_filtered * u_filtered)
    # u_t = -u u_x - u_xxx = -(1/2) d_x(u^2) + i kappa^3 u_hat
    rhs_hat = -0.5 * deriv * nonlin_hat + dispersion * u_hat
    return sfft.irfft(rhs_hat, n=u.shape[-1])


def step_kdv_values(u: np.ndarray, spec: PdeSpec, *,
                    rtol: float = 1e-8, atol: float = 1e-8) -> np.ndarray:
    deriv, dispersion, dealias = _kdv_operators(spec.grid)

    def rhs(_t, y):
        return _kdv_rhs_values(y, deriv, dispersion, dealias)

    if u.ndim == 2:
        return np.stack([step_kdv_values(row, spec, rtol=rtol, atol=atol) for row in u])

    sol = solve_ivp(rhs, (0.0, spec.macro_dt), np.asarray(u, dtype=np.float64),
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        if "step size" in sol.message.lower():
            raise StepSizeUnderflow(f"kdv step: {sol.message}")
        raise NumericalBlowup(f"kdv step failed: {sol.message}")
    out = sol.y[:, -1]
    _check_blowup(out, "kdv step")
    return out


def step_kdv(state: State, spec: PdeSpec) -> State:
    if spec.kind != PdeKind.KDV:
        raise ValueError(f"step_kdv called with {spec.kind}")
    return State(step_kdv_values(state.values, spec), spec.grid)


# ---------------------------------------------------------------------------
# KS: ETDRK4 with contour-averaged coefficients

_CONTOUR_POINTS = 32
_KS_CACHE: dict[tuple, tuple] = {}


def _ks_coefficients(grid: SpatialGrid, dt: float):
    """E, E2, Q, f1, f2, f3 and the dealiased derivative for one substep dt."""
    key = (grid.num_points, grid.domain_length, dt)
    if key not in _KS_CACHE:
        kappa, dealias = _spectral_setup(grid)
        lin = kappa**2 - kappa**4
        E = np.exp(dt * lin)
        E2 = np.exp(0.5 * dt * lin)
        m = _CONTOUR_POINTS
        r = np.exp(1j * np.pi * (np.arange(m) + 0.5) / m)
        LR = dt * lin[:, None] + r[None, :]
        Q = dt * ((np.exp(LR / 2) - 1) / LR).mean(axis=1).real
        f1 = dt * ((-4 - LR + np.exp(LR) * (4 - 3 * LR + LR**2)) / LR**3).mean(axis=1).real
        f2 = dt * ((2 + LR + np.exp(LR) * (-2 + LR)) / LR**3).mean(axis=1).real
        f3 = dt * ((-4 - 3 * LR - LR**2 + np.exp(LR) * (4 - LR)) / LR**3).mean(axis=1).real
        deriv = 1j * kappa
        deriv[-1] = 0.0
        _KS_CACHE[key] = (E, E2, Q, f1, f2, f3, deriv, dealias)
    return _KS_CACHE[key]


def step_ks_values(u: np.ndarray, spec: PdeSpec) -> np.ndarray:
    n_sub = spec.resolved_substeps()
    dt = spec.macro_dt / n_sub
    E, E2, Q, f1, f2, f3, deriv, dealias = _ks_coefficients(spec.grid, dt)
    nx = spec.grid.num_points

    def nonlin(v_hat):
        w = sfft.irfft(dealias * v_hat, n=nx)
        return -0.5 * deriv * (dealias * sfft.rfft(w * w))

    v = sfft.rfft(np.asarray(u, dtype=np.float64))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_sub):
            nv = nonlin(v)
            a = E2 * v + Q * nv
            na = nonlin(a)
            b = E2 * v + Q * na
            nb = nonlin(b)
            c = E2 * a + Q * (2 * nb - nv)
            nc = nonlin(c)
            v = E * v + f1 * nv + 2 * f2 * (na + nb) + f3 * nc
        out = sfft.irfft(v, n=nx)
    _check_blowup(out, "ks step")
    return out


def step_ks(state: State, spec: PdeSpec) -> State:
    if spec.kind != PdeKind.KS:
        raise ValueError(f"step_ks called with {spec.kind}")
    return State(step_ks_values(state.values, spec), spec.grid)


# ---------------------------------------------------------------------------

_STEP_VALUES = {
    PdeKind.BURGERS: step_burgers_values,
    PdeKind.KDV: step_kdv_values,
    PdeKind.KS: step_ks_values,
}


def step_values(u: np.ndarray, spec: PdeSpec) -> np.ndarray:
    """Kind-dispatched macro step on raw arrays; accepts (Nx,) or (R, Nx)."""
    return _STEP_VALUES[spec.kind](u, spec)


def step(state: State, spec: PdeSpec) -> State:
    return State(step_values(state.values, spec), spec.grid)


def evolve(u0: State, spec: PdeSpec, n_steps: int) -> Trajectory:
    """Apply the kind-appropriate step n_steps times, keeping intermediates."""
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    out = np.empty((n_steps + 1, spec.grid.num_points), dtype=np.float64)
    out[0] = u0.values
    for i in range(1, n_steps + 1):
        try:
            out[i] = step_values(out[i - 1], spec)
        except NumericalBlowup as err:
            raise NumericalBlowup(f"step {i}: {err}", step_index=i) from err
        except StepSizeUnderflow as err:
            raise StepSizeUnderflow(f"step {i}: {err}") from err
    return Trajectory(out, spec.grid, spec)


def evolve_values(u0: np.ndarray, spec: PdeSpec, n_steps: int) -> np.ndarray:
    """Batched evolve on raw rows: (R, Nx) -> (n_steps + 1, R, Nx)."""
    u0 = np.asarray(u0, dtype=np.float64)
    out = np.empty((n_steps + 1,) + u0.shape, dtype=np.float64)
    out[0] = u0
    for i in range(1, n_steps + 1):
        try:
            out[i] = step_values(out[i - 1], spec)
        except NumericalBlowup as err:
            raise NumericalBlowup(f"step {i}: {err}", step_index=i) from err
        except StepSizeUnderflow as err:
            raise StepSizeUnderflow(f"step {i}: {err}") from err
    return out
