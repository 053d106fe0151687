"""Time stepping for ILW and the reference Benjamin-Ono and KdV flows.

The linear part ``u^_t = i Omega(k) u^`` is integrated exactly in Fourier space;
the quadratic term ``-(1/2) d/dx (u^2)`` is formed pseudospectrally with
optional 2/3-rule truncation. Two fourth-order schemes are offered:
integrating-factor RK4 (default) and ETD-RK4 with contour-averaged
phi-functions.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .spectral import (
    BOUNDARY_WARN_LEVEL,
    BoundaryMassWarning,
    Grid,
    ModelParams,
    RealField,
    boundary_mass_fraction,
    check_same_grid,
    clamped_count,
    symbol_omega,
)

INTEGRATORS = ("integrating-factor-rk4", "etd-rk4")
MODELS = ("ilw", "bo", "kdv")
ETD_CONTOUR_POINTS = 32


class NumericalAbort(RuntimeError):
    """A non-finite value appeared during time stepping.

    ``partial`` holds the trajectory up to the last good checkpoint when the
    abort happened inside :func:`evolve`.
    """

    def __init__(self, message: str, partial: "Trajectory | None" = None):
        super().__init__(message)
        self.partial = partial


class StabilityWarning(UserWarning):
    """The time step exceeds the advisory nonlinear stability bound."""


def stability_bound(u: RealField) -> float:
    """Advisory bound ``h / (pi max|u| + eps)`` on the time step."""
    return u.grid.spacing / (np.pi * float(np.max(np.abs(u.samples))) + 1e-12)


@dataclass(frozen=True)
class EvolutionConfig:
    params: ModelParams
    grid: Grid
    dt: float
    t_end: float
    dealias: bool = True
    integrator: str = "integrating-factor-rk4"
    checkpoint_stride: int = 1
    nonlinear: bool = True
    model: str = "ilw"

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be nonnegative, got {self.t_end!r}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if int(self.checkpoint_stride) != self.checkpoint_stride or self.checkpoint_stride < 1:
            raise ValueError(f"checkpoint_stride must be a positive integer, got {self.checkpoint_stride!r}")
        n = round(self.t_end / self.dt)
        if abs(n * self.dt - self.t_end) > 1e-9 * max(self.t_end, self.dt):
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def linear_frequency(config: EvolutionConfig, k: np.ndarray) -> np.ndarray:
    """Dispersion relation ``Omega(k)`` of the selected model (``u^_t = i Omega u^``)."""
    if config.model == "ilw":
        return symbol_omega(config.params, k)
    if config.model == "bo":
        return k * np.abs(k)
    return k ** 3


class _Stepper:
    """Precomputed half-spectrum operators for one configuration."""

    def __init__(self, config: EvolutionConfig):
        g = config.grid
        n = g.n_points
        self.n = n
        self.config = config
        k = 2.0 * np.pi / g.length * np.arange(n // 2 + 1)
        omega = linear_frequency(config, k)
        omega[-1] = 0.0  # odd symbol: Nyquist slot has no partner
        self.lin = 1j * omega
        self.ik = 1j * k
        self.ik[-1] = 0.0
        self.mask = (np.arange(n // 2 + 1) < n / 3.0).astype(float) if config.dealias else None
        dt = config.dt
        self.E = np.exp(0.5 * dt * self.lin)
        self.E2 = self.E * self.E
        if config.integrator == "etd-rk4":
            self._etd_coefficients(dt)

    def _etd_coefficients(self, dt: float) -> None:
        m = ETD_CONTOUR_POINTS
        r = np.exp(2j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
        lr = dt * self.lin[:, None] + r[None, :]
        elr = np.exp(lr)
        self.Q = dt * np.mean((np.exp(0.5 * lr) - 1.0) / lr, axis=1)
        self.f1 = dt * np.mean((-4.0 - lr + elr * (4.0 - 3.0 * lr + lr ** 2)) / lr ** 3, axis=1)
        self.f2 = dt * np.mean((2.0 + lr + elr * (lr - 2.0)) / lr ** 3, axis=1)
        self.f3 = dt * np.mean((-4.0 - 3.0 * lr - lr ** 2 + elr * (4.0 - lr)) / lr ** 3, axis=1)

    def nonlinear(self, vh: np.ndarray) -> np.ndarray:
        if not self.config.nonlinear:
            return np.zeros_like(vh)
        if self.mask is not None:
            vh = vh * self.mask
        v = np.fft.irfft(vh, self.n)
        out = -0.5 * self.ik * np.fft.rfft(v * v)
        if self.mask is not None:
            out *= self.mask
        return out

    def step(self, vh: np.ndarray) -> np.ndarray:
        if self.config.integrator == "etd-rk4":
            return self._step_etd(vh)
        return self._step_if(vh)

    def _step_if(self, vh):
        dt, E, E2, N = self.config.dt, self.E, self.E2, self.nonlinear
        if not self.config.nonlinear:
            return E2 * vh
        k1 = N(vh)
        k2 = N(E * (vh + 0.5 * dt * k1))
        k3 = N(E * vh + 0.5 * dt * k2)
        k4 = N(E2 * vh + dt * E * k3)
        return E2 * vh + dt / 6.0 * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)

    def _step_etd(self, vh):
        e_full, e_half, N = self.E2, self.E, self.nonlinear
        if not self.config.nonlinear:
            return e_full * vh
        nv = N(vh)
        a = e_half * vh + self.Q * nv
        na = N(a)
        b = e_half * vh + self.Q * na
        nb = N(b)
        c = e_half * a + self.Q * (2.0 * nb - nv)
        nc = N(c)
        return e_full * vh + nv * self.f1 + 2.0 * (na + nb) * self.f2 + nc * self.f3


@lru_cache(maxsize=32)
def _stepper(config: EvolutionConfig) -> _Stepper:
    return _Stepper(config)


def nonlinear_term(u: RealField, dealias: bool = True) -> RealField:
    """``-(1/2) d/dx (u^2)``, with 2/3-rule truncation of input and output when ``dealias``."""
    n = u.grid.n_points
    k = 2.0 * np.pi / u.grid.length * np.arange(n // 2 + 1)
    ik = 1j * k
    ik[-1] = 0.0
    vh = np.fft.rfft(u.samples)
    if dealias:
        mask = np.arange(n // 2 + 1) < n / 3.0
        vh = vh * mask
    v = np.fft.irfft(vh, n)
    out = -0.5 * ik * np.fft.rfft(v * v)
    if dealias:
        out *= mask
    return RealField(u.grid, np.fft.irfft(out, n), u.time)


def step(u: RealField, t: float, config: EvolutionConfig) -> RealField:
    """Advance ``u`` from ``t`` to ``t + dt`` with the configured scheme."""
    check_same_grid(u, config)
    vh = _stepper(config).step(np.fft.rfft(u.samples))
    if not np.all(np.isfinite(vh)):
        raise NumericalAbort(f"non-finite values after step from t={t:g} (blow-up or CFL violation)")
    return RealField(u.grid, np.fft.irfft(vh, u.grid.n_points), t + config.dt)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Immutable sequence of checkpoints produced by :func:`evolve`."""

    times: tuple
    samples: np.ndarray
    config: EvolutionConfig
    warnings: tuple = ()
    clamped_omega_prime: int = 0

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64, copy=True)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if s.shape[0] != len(self.times):
            raise ValueError("one sample row per checkpoint time is required")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("checkpoint times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def grid(self) -> Grid:
        return self.config.grid

    def field(self, i: int) -> RealField:
        return RealField(self.grid, self.samples[i], self.times[i])

    def fields(self):
        for i in range(len(self)):
            yield self.field(i)

    @property
    def initial(self) -> RealField:
        return self.field(0)

    @property
    def final(self) -> RealField:
        return self.field(len(self) - 1)

    def index_of(self, t: float, rtol: float = 1e-9) -> int:
        times = np.asarray(self.times)
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) > rtol * max(1.0, abs(t)):
            raise ValueError(f"no checkpoint at t={t:g} (range [{times[0]:g}, {times[-1]:g}])")
        return i

    def at(self, t: float) -> RealField:
        return self.field(self.index_of(t))


def _checkpoint_notes(u: RealField, config: EvolutionConfig, notes: list) -> None:
    frac = boundary_mass_fraction(u)
    if frac > BOUNDARY_WARN_LEVEL:
        msg = f"boundary mass fraction {frac:.3e} at t={u.time:.6g}"
        notes.append(msg)
        warnings.warn(msg, BoundaryMassWarning, stacklevel=3)
    if config.nonlinear and config.dt > stability_bound(u):
        msg = f"dt={config.dt:g} exceeds advisory stability bound {stability_bound(u):.3e} at t={u.time:.6g}"
        notes.append(msg)
        warnings.warn(msg, StabilityWarning, stacklevel=3)


def evolve(config: EvolutionConfig, u0: RealField) -> Trajectory:
    """Integrate from ``u0`` (taken at time 0) to ``config.t_end``."""
    check_same_grid(u0, config)
    st = _stepper(config)
    n = config.grid.n_points
    u0 = RealField(u0.grid, u0.samples, 0.0)
    times, rows, notes = [0.0], [u0.samples.copy()], []
    _checkpoint_notes(u0, config, notes)
    clamped = clamped_count(config.params, config.grid.wavenumbers) if config.model == "ilw" else 0
    if clamped:
        notes.append(f"{clamped} negative Omega' samples clamped on this grid")

    def partial():
        return Trajectory(tuple(times), np.array(rows), config, tuple(notes), clamped)

    vh = np.fft.rfft(u0.samples)
    total = config.n_steps
    for i in range(1, total + 1):
        vh = st.step(vh)
        if not np.all(np.isfinite(vh)):
            raise NumericalAbort(
                f"non-finite values at step {i} (t={i * config.dt:g}); blow-up or CFL violation",
                partial(),
            )
        if i % config.checkpoint_stride == 0 or i == total:
            u = RealField(config.grid, np.fft.irfft(vh, n), i * config.dt)
            times.append(u.time)
            rows.append(u.samples.copy())
            _checkpoint_notes(u, config, notes)
    return partial()


def evolve_bo(config: EvolutionConfig, u0: RealField) -> Trajectory:
    """Benjamin-Ono reference flow (``Omega = k|k|``) on the same harness."""
    return evolve(replace(config, model="bo"), u0)


def evolve_kdv(config: EvolutionConfig, u0: RealField) -> Trajectory:
    """KdV reference flow ``u_t + u_xxx + u u_x = 0`` (``Omega = k^3``)."""
    return evolve(replace(config, model="kdv"), u0)


def kdv_rescale(traj: Trajectory, delta: float, times: Sequence[float] | None = None) -> Trajectory:
    """Shallow-water rescaling ``v(x, t) = (3/delta) u(x, 3t/delta)``.

    With ``times`` given, only the rescaled times listed are returned; each
    must correspond to an existing ILW checkpoint.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    src = np.asarray(traj.times)
    if times is None:
        idx = list(range(len(traj)))
    else:
        idx = []
        for t in times:
            ts = 3.0 * t / delta
            if ts < src[0] - 1e-12 or ts > src[-1] * (1 + 1e-12) + 1e-12:
                raise ValueError(
                    f"rescaled time {t:g} needs ILW time {ts:g}, outside [{src[0]:g}, {src[-1]:g}]"
                )
            idx.append(traj.index_of(ts))
    return Trajectory(
        tuple(delta * src[i] / 3.0 for i in idx),
        (3.0 / delta) * traj.samples[idx],
        traj.config,
        traj.warnings,
        traj.clamped_omega_prime,
    )


def relative_gap(u: RealField, v: RealField) -> float:
    """``||u - v||_2 / ||v||_2``."""
    check_same_grid(u, v)
    return float(np.linalg.norm(u.samples - v.samples) / np.linalg.norm(v.samples))
