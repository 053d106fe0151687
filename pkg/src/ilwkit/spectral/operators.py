"""Fourier multipliers on a periodic grid and the named ILW operators."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .grid import Grid, RealField, check_same_grid
from .symbols import (
    ModelParams,
    symbol_coth,
    symbol_dx_T,
    symbol_L,
    symbol_omega,
    symbol_omega_prime,
    symbol_p,
    symbol_q,
)

PARITIES = ("even", "odd")
REALITIES = ("real", "imaginary")


@dataclass(frozen=True, eq=False)
class Multiplier:
    """A sampled Fourier symbol with parity and reality tags.

    The symbol is symmetrized at construction so that the tags hold exactly.
    Odd symbols vanish at ``k = 0`` and at the Nyquist slot.
    """

    grid: Grid
    symbol: np.ndarray
    parity: str
    reality: str
    name: str = ""

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}, got {self.parity!r}")
        if self.reality not in REALITIES:
            raise ValueError(f"reality must be one of {REALITIES}, got {self.reality!r}")
        s = np.array(self.symbol, dtype=np.complex128, copy=True)
        if s.shape != (self.grid.n_points,):
            raise ValueError(f"symbol must have {self.grid.n_points} samples, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError(f"symbol {self.name!r} has non-finite samples")
        mirror = s[self.grid.mirror_index]
        s = 0.5 * (s + mirror) if self.parity == "even" else 0.5 * (s - mirror)
        s = s.real.astype(np.complex128) if self.reality == "real" else 1j * s.imag
        if self.parity == "odd":
            s[0] = 0.0
            s[self.grid.nyquist_index] = 0.0
        s.setflags(write=False)
        object.__setattr__(self, "symbol", s)

    @classmethod
    def from_function(
        cls,
        grid: Grid,
        func: Callable[[np.ndarray], np.ndarray],
        parity: str,
        reality: str,
        name: str = "",
    ) -> "Multiplier":
        return cls(grid, func(grid.wavenumbers), parity, reality, name)

    @property
    def preserves_real(self) -> bool:
        return (self.parity, self.reality) in (("even", "real"), ("odd", "imaginary"))

    def compose(self, other: "Multiplier", name: str = "") -> "Multiplier":
        check_same_grid(self, other)
        parity = "even" if self.parity == other.parity else "odd"
        reality = "real" if self.reality == other.reality else "imaginary"
        sym = self.symbol * other.symbol
        return Multiplier(self.grid, sym, parity, reality, name or f"{self.name}*{other.name}")


def apply_multiplier(m: Multiplier, u: RealField) -> RealField:
    """``u -> F^{-1}[symbol * F u]``; rejects tag combinations that break realness."""
    check_same_grid(m, u)
    if not m.preserves_real:
        raise ValueError(
            f"multiplier {m.name!r} is {m.parity}-{m.reality}; it does not map real fields "
            "to real fields"
        )
    out = np.fft.ifft(m.symbol * np.fft.fft(u.samples)).real
    return RealField(u.grid, out, u.time)


# -- named multipliers ------------------------------------------------------
# Multipliers depend only on hashable frozen values, so they are memoised.


@lru_cache(maxsize=256)
def identity_multiplier(grid: Grid) -> Multiplier:
    return Multiplier(grid, np.ones(grid.n_points), "even", "real", "identity")


@lru_cache(maxsize=256)
def dx_multiplier(grid: Grid) -> Multiplier:
    return Multiplier(grid, 1j * grid.wavenumbers, "odd", "imaginary", "dx")


@lru_cache(maxsize=256)
def hilbert_multiplier(grid: Grid) -> Multiplier:
    return Multiplier(grid, -1j * np.sign(grid.wavenumbers), "odd", "imaginary", "H")


@lru_cache(maxsize=256)
def T_delta_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    return Multiplier(grid, 1j * symbol_coth(params, grid.wavenumbers), "odd", "imaginary", "T_delta")


@lru_cache(maxsize=256)
def dx_T_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    """``d/dx T_delta``, with its continuous value ``-1/delta`` at ``k = 0``."""
    return Multiplier(grid, symbol_dx_T(params, grid.wavenumbers), "even", "real", "dxT")


@lru_cache(maxsize=256)
def L_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    return Multiplier(grid, symbol_L(params, grid.wavenumbers), "even", "real", "L")


@lru_cache(maxsize=256)
def linear_ilw_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    """Generator ``i Omega(k)`` of the linear ILW flow."""
    return Multiplier(grid, 1j * symbol_omega(params, grid.wavenumbers), "odd", "imaginary", "iOmega")


@lru_cache(maxsize=256)
def omega_prime_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    return Multiplier(grid, symbol_omega_prime(params, grid.wavenumbers), "even", "real", "Omega'")


@lru_cache(maxsize=256)
def q_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    return Multiplier(grid, symbol_q(params, grid.wavenumbers), "even", "real", "q")


@lru_cache(maxsize=256)
def p_multiplier(params: ModelParams, grid: Grid) -> Multiplier:
    """Real realization of ``p(d/dx)``: symbol ``i p(k)``, so it is close to ``d/dx`` at low k."""
    return Multiplier(grid, 1j * symbol_p(params, grid.wavenumbers), "odd", "imaginary", "p")


@lru_cache(maxsize=256)
def J_multiplier(s: float, grid: Grid) -> Multiplier:
    return Multiplier(grid, (1.0 + grid.wavenumbers ** 2) ** (0.5 * s), "even", "real", f"J^{s:g}")


@lru_cache(maxsize=256)
def D_multiplier(s: float, grid: Grid) -> Multiplier:
    k = np.abs(grid.wavenumbers)
    if s == 0:
        sym = np.ones_like(k)
    else:
        sym = np.zeros_like(k)
        sym[k > 0] = k[k > 0] ** s
    return Multiplier(grid, sym, "even", "real", f"D^{s:g}")


# -- convenience appliers ---------------------------------------------------


def apply_dx(u: RealField) -> RealField:
    return apply_multiplier(dx_multiplier(u.grid), u)


def apply_T_delta(params: ModelParams, u: RealField) -> RealField:
    return apply_multiplier(T_delta_multiplier(params, u.grid), u)


def apply_hilbert(u: RealField) -> RealField:
    return apply_multiplier(hilbert_multiplier(u.grid), u)


def apply_L(params: ModelParams, u: RealField) -> RealField:
    return apply_multiplier(L_multiplier(params, u.grid), u)


def apply_J(s: float, u: RealField) -> RealField:
    return apply_multiplier(J_multiplier(float(s), u.grid), u)


def apply_D(s: float, u: RealField) -> RealField:
    return apply_multiplier(D_multiplier(float(s), u.grid), u)


def apply_q(params: ModelParams, u: RealField) -> RealField:
    return apply_multiplier(q_multiplier(params, u.grid), u)


def apply_p(params: ModelParams, u: RealField) -> RealField:
    return apply_multiplier(p_multiplier(params, u.grid), u)
