"""Initial-condition sampling and warmup.

Raw states come from per-PDE distributions (random Fourier sums for Burgers
and KdV, a Gaussian random field for KS) and are then evolved a few macro
steps with the numerical solver so that pool and test states resemble states
the system actually visits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import NumericalBlowup
from .rng import RandomStream
from .solvers import PdeKind, PdeSpec, SpatialGrid, State, evolve_values

MAX_WARMUP_ATTEMPTS = 10


class IcKind(enum.Enum):
    FOURIER_SUM = "fourier_sum"
    GAUSSIAN_RANDOM_FIELD = "grf"


@dataclass(frozen=True)
class IcSpec:
    kind: IcKind
    num_terms: int = 0
    wavenumber_set: tuple[int, ...] = ()
    grf_scale: float = 25.0
    grf_shift: float = 25.0
    warmup_steps: int = 4

    def __post_init__(self):
        if self.kind == IcKind.FOURIER_SUM:
            if self.num_terms < 1:
                raise ValueError("FourierSum requires num_terms >= 1")
            if not self.wavenumber_set:
                raise ValueError("FourierSum requires a non-empty wavenumber_set")
        else:
            if self.grf_scale <= 0 or self.grf_shift <= 0:
                raise ValueError("GRF requires positive scale and shift")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be >= 0")


def default_ic_spec(kind: PdeKind, warmup_steps: int = 4) -> IcSpec:
    if kind == PdeKind.BURGERS:
        return IcSpec(IcKind.FOURIER_SUM, num_terms=2, wavenumber_set=(1, 2, 3, 4),
                      warmup_steps=warmup_steps)
    if kind == PdeKind.KDV:
        return IcSpec(IcKind.FOURIER_SUM, num_terms=10, wavenumber_set=(1, 2, 3),
                      warmup_steps=warmup_steps)
    return IcSpec(IcKind.GAUSSIAN_RANDOM_FIELD, warmup_steps=warmup_steps)


def sample_fourier_sum(ic: IcSpec, grid: SpatialGrid, rng: RandomStream) -> State:
    """Sum of num_terms random sinusoids: A ~ U[0,1], phase ~ U[0,2pi],
    wavenumber uniform over the configured set."""
    if ic.kind != IcKind.FOURIER_SUM:
        raise ValueError("sample_fourier_sum requires a FourierSum spec")
    gen = rng.generator
    n = ic.num_terms
    amps = gen.uniform(0.0, 1.0, n)
    phases = gen.uniform(0.0, 2.0 * np.pi, n)
    wave_set = np.asarray(ic.wavenumber_set)
    ks = wave_set[gen.integers(0, len(wave_set), n)]
    x = grid.points
    u = np.zeros(grid.num_points)
    for a, k, phi in zip(amps, ks, phases):
        u += a * np.sin(2.0 * np.pi * k * x / grid.domain_length + phi)
    return State(u, grid)


def sample_grf(ic: IcSpec, grid: SpatialGrid, rng: RandomStream) -> State:
    """Periodic Gaussian random field with spectral variance
    scale / (kappa^2 + shift) per mode, zero mean component."""
    if ic.kind != IcKind.GAUSSIAN_RANDOM_FIELD:
        raise ValueError("sample_grf requires a GaussianRandomField spec")
    gen = rng.generator
    nx = grid.num_points
    n_modes = nx // 2 + 1
    kappa = 2.0 * np.pi * np.arange(n_modes) / grid.domain_length
    variance = ic.grf_scale / (kappa**2 + ic.grf_shift)
    # Complex coefficient per positive mode with total variance matching the
    # spectrum; Hermitian symmetry is implied by irfft. Splitting the variance
    # evenly between re/im makes each mode's modulus-squared expectation equal
    # to the target.
    sigma = np.sqrt(variance / 2.0)
    coeff = gen.standard_normal(n_modes) * sigma + 1j * gen.standard_normal(n_modes) * sigma
    coeff[0] = 0.0
    u = sfft.irfft(coeff, n=nx) * nx
    return State(u, grid)


def sample_raw(ic: IcSpec, grid: SpatialGrid, rng: RandomStream) -> State:
    if ic.kind == IcKind.FOURIER_SUM:
        return sample_fourier_sum(ic, grid, rng)
    return sample_grf(ic, grid, rng)


def make_initial_condition(ic: IcSpec, spec: PdeSpec, rng: RandomStream,
                           *, attempts_log: list | None = None) -> State:
    """Sample a raw state and warm it up with warmup_steps solver macro steps.

    A warmup blowup triggers a resample from the same stream (the draws are
    sequential, so the retry path is reproducible); more than
    MAX_WARMUP_ATTEMPTS failures abort with the underlying error.
    """
    last_err: NumericalBlowup | None = None
    for attempt in range(MAX_WARMUP_ATTEMPTS):
        raw = sample_raw(ic, spec.grid, rng)
        if ic.warmup_steps == 0:
            return raw
        try:
            warmed = evolve_values(raw.values, spec, ic.warmup_steps)[-1]
        except NumericalBlowup as err:
            last_err = err
            if attempts_log is not None:
                attempts_log.append({"attempt": attempt, "error": str(err)})
            continue
        return State(warmed, spec.grid)
    raise NumericalBlowup(
        f"warmup failed {MAX_WARMUP_ATTEMPTS} times; last error: {last_err}")
