"""Periodic grids, real/spectral field containers and the discrete transform."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

#: Fraction of the domain (per side) treated as the "outer" region by the guard.
BOUNDARY_SIDE_FRACTION = 0.05
#: Default guard threshold on the outer-region share of the squared L2 norm.
BOUNDARY_WARN_LEVEL = 1e-6


class BoundaryMassWarning(UserWarning):
    """Raised when a field carries noticeable mass near the torus edge."""


class GridMismatchError(ValueError):
    """Two objects that must live on the same grid do not."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)``.

    Wavenumbers are angular (``k = 2*pi*f/L``) and stored in FFT order, so
    ``grid.wavenumbers[j]`` is the wavenumber of ``np.fft.fft(u)[j]``.
    """

    n_points: int
    length: float

    def __post_init__(self):
        n = self.n_points
        if isinstance(n, bool) or int(n) != n:
            raise ValueError(f"n_points must be an integer, got {n!r}")
        if n < 16:
            raise ValueError(f"n_points must be at least 16, got {n}")
        if n % 2:
            raise ValueError(f"n_points must be even, got {n}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be positive and finite, got {self.length!r}")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        return _frozen(-0.5 * self.length + self.spacing * np.arange(self.n_points))

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Integer frequencies in FFT order; the Nyquist entry is ``-N/2``."""
        return _frozen(np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).astype(np.int64))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return _frozen(2.0 * np.pi / self.length * self.frequencies)

    @cached_property
    def mirror_index(self) -> np.ndarray:
        """Index of ``-k`` for each FFT slot (the Nyquist slot maps to itself)."""
        return _frozen((-np.arange(self.n_points)) % self.n_points)

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    @property
    def k_max(self) -> float:
        return np.pi / self.spacing

    def refined(self, factor: int = 2) -> "Grid":
        """Same domain, ``factor`` times more points."""
        return Grid(self.n_points * factor, self.length)


def build_grid(n_points: int, length: float) -> Grid:
    return Grid(n_points, length)


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples of ``u(., t)`` on a grid. Samples are read-only."""

    grid: Grid
    samples: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64, copy=True)
        if s.ndim != 1 or s.shape[0] != self.grid.n_points:
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {np.shape(self.samples)}"
            )
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray], time: float = 0.0):
        return cls(grid, func(grid.nodes), time)

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0):
        return cls(grid, np.zeros(grid.n_points), time)

    def with_samples(self, samples, time: float | None = None) -> "RealField":
        return RealField(self.grid, samples, self.time if time is None else time)

    def norm(self) -> float:
        """Grid-weighted L2 norm."""
        return float(np.sqrt(self.grid.spacing * np.dot(self.samples, self.samples)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier-series coefficients ``c_k`` with ``u(x) = sum_k c_k exp(i k x)``.

    Coefficients are in FFT order, matching ``grid.wavenumbers``.
    """

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128, copy=True)
        if c.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} coefficients, got {c.shape}")
        object.__setattr__(self, "coefficients", _frozen(c))

    def norm(self) -> float:
        """Spectral L2 norm, equal to the grid-weighted norm of the samples."""
        c = self.coefficients
        return float(np.sqrt(self.grid.length * np.vdot(c, c).real))

    def hermitian_defect(self) -> float:
        """Max ``|c(-k) - conj(c(k))|``; zero for spectra of real fields."""
        c = self.coefficients
        return float(np.max(np.abs(c[self.grid.mirror_index] - np.conj(c))))


def _phase(grid: Grid) -> np.ndarray:
    # exp(-i k x_0) with x_0 = -L/2 reduces to (-1)^f
    return np.where(grid.frequencies % 2 == 0, 1.0, -1.0)


def transform(u: RealField) -> SpectralField:
    g = u.grid
    return SpectralField(g, np.fft.fft(u.samples) * _phase(g) / g.n_points)


def inverse_transform(uh: SpectralField, time: float = 0.0) -> RealField:
    g = uh.grid
    values = np.fft.ifft(uh.coefficients * _phase(g) * g.n_points)
    return RealField(g, values.real, time)


def check_same_grid(*objs) -> Grid:
    grids = [o.grid for o in objs]
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {g}")
    return first


def boundary_mass_fraction(u: RealField) -> float:
    """Share of ``||u||^2`` carried by the outer 10% of the domain (5% per side)."""
    g = u.grid
    s2 = u.samples ** 2
    total = s2.sum()
    if total == 0.0:
        return 0.0
    outer = np.abs(g.nodes) >= (0.5 - BOUNDARY_SIDE_FRACTION) * g.length
    return float(s2[outer].sum() / total)


def guard_boundary(u: RealField, level: float = BOUNDARY_WARN_LEVEL, what: str = "field") -> float:
    """Return the boundary mass fraction, warning when it exceeds ``level``."""
    frac = boundary_mass_fraction(u)
    if frac > level:
        warnings.warn(
            f"{what}: {frac:.3e} of the squared L2 norm sits in the outer 10% of the "
            f"domain (t={u.time:g}); periodization may contaminate results",
            BoundaryMassWarning,
            stacklevel=3,
        )
    return frac


def japanese_bracket(x: np.ndarray) -> np.ndarray:
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def weighted_norm(u: RealField, alpha: float) -> float:
    """``|| <x>^alpha u ||_2`` with ``<x> = sqrt(1 + x^2)`` on centered nodes."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    guard_boundary(u, what="weighted_norm")
    w = (1.0 + u.grid.nodes ** 2) ** alpha
    return float(np.sqrt(u.grid.spacing * np.sum(w * u.samples ** 2)))
