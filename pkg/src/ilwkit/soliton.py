"""Solitary waves ``u = Q(x - ct)`` by Petviashvili iteration.

``Q`` solves ``d/dx T Q + (1/delta - c) Q + Q^2/2 = 0``; in Fourier space

    (c - 1/delta + k coth(delta k)) Q^ = (1/2) (Q^2)^,

where the bracket is ``c`` at ``k = 0`` and grows like ``|k|``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .evolution import EvolutionConfig, Trajectory, evolve
from .spectral import Grid, ModelParams, RealField, check_same_grid, symbol_dx_T

STAGNATION_LIMIT = 50
GAMMA = 2.0


class SolitonDivergence(RuntimeError):
    """The residual failed to improve for too many consecutive iterations."""


@dataclass(frozen=True)
class SolitonSpec:
    params: ModelParams
    c: float
    grid: Grid
    tol: float = 1e-10
    max_iter: int = 500

    def __post_init__(self):
        if not self.c > 1.0 / self.params.delta:
            raise ValueError(
                f"soliton speed c={self.c} must exceed 1/delta={1.0 / self.params.delta:g}"
            )
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def denominator(self) -> np.ndarray:
        """``c - 1/delta - m(k)`` on the half spectrum, ``m`` the symbol of ``d/dx T``."""
        k = 2.0 * np.pi / self.grid.length * np.arange(self.grid.n_points // 2 + 1)
        return self.c - 1.0 / self.params.delta - symbol_dx_T(self.params, k)


@dataclass(frozen=True, eq=False)
class SolitonResult:
    profile: RealField
    residual_norm: float
    iterations: int
    converged: bool
    spec: SolitonSpec
    history: tuple = ()


def _residual_samples(q: np.ndarray, spec: SolitonSpec) -> np.ndarray:
    n = spec.grid.n_points
    k = 2.0 * np.pi / spec.grid.length * np.arange(n // 2 + 1)
    m = symbol_dx_T(spec.params, k)
    dxtq = np.fft.irfft(m * np.fft.rfft(q), n)
    return dxtq + (1.0 / spec.params.delta - spec.c) * q + 0.5 * q * q


def soliton_residual(Q: RealField, spec: SolitonSpec) -> float:
    """Grid L2 norm of ``d/dx T Q + (1/delta - c) Q + Q^2/2``."""
    check_same_grid(Q, spec)
    r = _residual_samples(Q.samples, spec)
    return float(np.sqrt(spec.grid.spacing * np.dot(r, r)))


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    # real inner product of two half spectra representing real fields
    w = np.full(a.shape[0], 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return float(np.sum(w * (np.conj(a) * b).real))


def initial_guess(spec: SolitonSpec) -> np.ndarray:
    x = spec.grid.nodes
    return 3.0 * (spec.c - 1.0 / spec.params.delta) / np.cosh(x) ** 2


def recenter(q: np.ndarray) -> np.ndarray:
    """Circularly shift so the maximum sits on the node ``x = 0``."""
    n = q.shape[0]
    return np.roll(q, n // 2 - int(np.argmax(q)))


def petviashvili_solve(spec: SolitonSpec, guess: np.ndarray | None = None) -> SolitonResult:
    n = spec.grid.n_points
    h = spec.grid.spacing
    den = spec.denominator()
    q = initial_guess(spec) if guess is None else np.asarray(guess, dtype=float).copy()
    best = math.inf
    stall = 0
    history = []
    res = math.inf
    for it in range(1, spec.max_iter + 1):
        qh = np.fft.rfft(q)
        nh = 0.5 * np.fft.rfft(q * q)
        num = _inner(qh, den * qh)
        dnm = _inner(qh, nh)
        if not (dnm > 0 and np.isfinite(num)):
            raise SolitonDivergence(f"stabilizing factor undefined at iteration {it}")
        M = num / dnm
        q = np.fft.irfft(M ** GAMMA * nh / den, n)
        r = _residual_samples(q, spec)
        res = float(np.sqrt(h * np.dot(r, r)))
        history.append(res)
        if not np.isfinite(res):
            raise SolitonDivergence(f"non-finite residual at iteration {it}")
        if res <= spec.tol:
            q = recenter(q)
            return SolitonResult(
                RealField(spec.grid, q), soliton_residual(RealField(spec.grid, q), spec), it,
                True, spec, tuple(history),
            )
        if res < best:
            best, stall = res, 0
        else:
            stall += 1
            if stall >= STAGNATION_LIMIT:
                raise SolitonDivergence(
                    f"residual stagnated for {STAGNATION_LIMIT} iterations (best {best:.3e})"
                )
    q = recenter(q)
    return SolitonResult(RealField(spec.grid, q), res, spec.max_iter, False, spec, tuple(history))


# -- propagation ---------------------------------------------------------------


@dataclass(frozen=True)
class PropagationReport:
    error: float
    speed: float
    shift: float
    warnings: tuple = ()


def _shift_field(q: np.ndarray, s: float, length: float) -> np.ndarray:
    n = q.shape[0]
    k = 2.0 * np.pi / length * np.arange(n // 2 + 1)
    qh = np.fft.rfft(q) * np.exp(-1j * k * s)
    qh[-1] = qh[-1].real * np.cos(k[-1] * s)
    return np.fft.irfft(qh, n)


def fit_shift(u: np.ndarray, q: np.ndarray, length: float) -> float:
    """Shift ``s`` in ``[-L/2, L/2)`` maximizing the correlation of ``u`` with ``q(. - s)``."""
    n = u.shape[0]
    h = length / n
    uh, qh = np.fft.fft(u), np.fft.fft(q)
    corr = np.fft.ifft(uh * np.conj(qh)).real  # corr[j] ~ sum u(x) q(x - j h)
    j = int(np.argmax(corr))
    c0, cm, cp = corr[j], corr[j - 1], corr[(j + 1) % n]
    den = cm - 2.0 * c0 + cp
    s = (j + (0.5 * (cm - cp) / den if den != 0 else 0.0)) * h
    # Newton polish on the trigonometric interpolant of the correlation
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    a = uh * np.conj(qh)
    a[n // 2] = 0.0
    for _ in range(20):
        e = a * np.exp(1j * k * s)
        d1 = float(np.sum(1j * k * e).real)
        d2 = float(np.sum(-(k ** 2) * e).real)
        if d2 >= 0:
            break
        step = d1 / d2
        s -= step
        if abs(step) < 1e-14 * length:
            break
    return (s + 0.5 * length) % length - 0.5 * length


def propagation_error(
    result: SolitonResult, t_end: float, dt: float, *, n_fits: int | None = None, **config_kw
) -> PropagationReport:
    """Evolve ``Q`` to ``t_end`` and compare with the best shifted copy of ``Q``.

    The shift is tracked across intermediate checkpoints so wrap-around on
    the torus is unwrapped without using the nominal speed.
    """
    spec = result.spec
    q = result.profile.samples
    if t_end == 0:
        return PropagationReport(0.0, float("nan"), 0.0)
    n_steps = int(round(t_end / dt))
    if n_fits is None:
        n_fits = max(1, int(math.ceil(n_steps / 100)))
    stride = max(1, n_steps // n_fits)
    config = EvolutionConfig(spec.params, spec.grid, dt, t_end, checkpoint_stride=stride, **config_kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj: Trajectory = evolve(config, result.profile)
    L = spec.grid.length
    shift, prev = 0.0, 0.0
    for u in list(traj.fields())[1:]:
        s = fit_shift(u.samples, q, L)
        d = (s - prev + 0.5 * L) % L - 0.5 * L
        shift += d
        prev = s
    u_end = traj.final.samples
    err = float(np.linalg.norm(u_end - _shift_field(q, shift, L)) / np.linalg.norm(q))
    return PropagationReport(err, shift / t_end, shift, traj.warnings)
