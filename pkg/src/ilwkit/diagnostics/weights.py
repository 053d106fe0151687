"""Concrete smooth weights: the decaying profile phi, its primitive psi, the
rightward cutoff chi and the unit bumps zeta_n.

All profiles are built from the C-infinity step

    S(s) = f(s) / (f(s) + f(1 - s)),   f(s) = exp(-1/s) for s > 0, else 0,

whose derivatives are produced symbolically (sympy) and evaluated with numpy.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

_s = sp.Symbol("s", real=True)
MAX_ORDER = 4

#: phi blends from 1 to exp(-x) on [PHI_BLEND_START, PHI_BLEND_END].
PHI_BLEND_START = 1.0
PHI_BLEND_END = 1.5


@lru_cache(maxsize=None)
def _step_derivs():
    f = lambda z: sp.exp(-1 / z)
    expr = f(_s) / (f(_s) + f(1 - _s))
    return tuple(sp.lambdify(_s, sp.diff(expr, _s, j), "numpy") for j in range(MAX_ORDER + 1))


def smooth_step(s, order: int = 0) -> np.ndarray:
    """``S^{(order)}(s)``: 0 for s <= 0, 1 for s >= 1, C-infinity in between."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    if order == 0:
        out[s >= 1.0] = 1.0
    # evaluate on (0, 1/2] only; the upper half follows from S(s) + S(1 - s) = 1,
    # which avoids cancellation in the closed-form derivatives near s = 1
    for part, arg, sign, shift in (
        ((s > 0.0) & (s <= 0.5), s, 1.0, 0.0),
        ((s > 0.5) & (s < 1.0), 1.0 - s, (-1.0) ** (order + 1), 1.0 if order == 0 else 0.0),
    ):
        if np.any(part):
            with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
                vals = _step_derivs()[order](arg[part])
            out[part] = shift + sign * np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    return out


@lru_cache(maxsize=None)
def _phi_blend_derivs():
    # phi = exp(-x B(x)) with B(x) = S((x - a)/w) on the blend window
    x = sp.Symbol("x", real=True)
    a, w = PHI_BLEND_START, PHI_BLEND_END - PHI_BLEND_START
    f = lambda z: sp.exp(-1 / z)
    s = (x - a) / w
    B = f(s) / (f(s) + f(1 - s))
    expr = sp.exp(-x * B)
    return tuple(sp.lambdify(x, sp.diff(expr, x, j), "numpy") for j in range(MAX_ORDER + 1))


def phi(x, order: int = 0) -> np.ndarray:
    """Even profile: 1 on ``|x| <= 1``, ``exp(-|x|)`` for ``|x| >= 1.5``, smooth between."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}]")
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    sign = np.where(x < 0, (-1.0) ** order, 1.0)
    out = np.zeros_like(a)
    out[a <= PHI_BLEND_START] = 1.0 if order == 0 else 0.0
    far = a >= PHI_BLEND_END
    out[far] = (-1.0) ** order * np.exp(-a[far])
    mid = (a > PHI_BLEND_START) & (a < PHI_BLEND_END)
    if np.any(mid):
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            vals = _phi_blend_derivs()[order](a[mid])
        out[mid] = np.nan_to_num(vals, nan=0.0)
    return sign * out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(60)


def _psi_positive(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    low = a <= PHI_BLEND_START
    out[low] = a[low]

    def blend_integral(b):
        # Gauss-Legendre on [1, b]; the integrand is smooth there
        half = 0.5 * (b - PHI_BLEND_START)[:, None]
        nodes = PHI_BLEND_START + half * (_GL_NODES[None, :] + 1.0)
        vals = phi(nodes.ravel()).reshape(nodes.shape)
        return half[:, 0] * (vals @ _GL_WEIGHTS)

    mid = (a > PHI_BLEND_START) & (a < PHI_BLEND_END)
    if np.any(mid):
        out[mid] = PHI_BLEND_START + blend_integral(a[mid])
    far = a >= PHI_BLEND_END
    if np.any(far):
        at_end = PHI_BLEND_START + blend_integral(np.array([PHI_BLEND_END]))[0]
        out[far] = at_end + np.exp(-PHI_BLEND_END) - np.exp(-a[far])
    return out


def psi(x, order: int = 0) -> np.ndarray:
    """``psi(x) = int_0^x phi``: odd, increasing, bounded; ``psi^{(j)} = phi^{(j-1)}``."""
    if order > 0:
        return phi(x, order - 1)
    x = np.asarray(x, dtype=float)
    return np.sign(x) * _psi_positive(np.abs(x))


def psi_sup() -> float:
    """``lim_{x -> inf} psi(x)``."""
    return float(_psi_positive(np.array([PHI_BLEND_END]))[0] + np.exp(-PHI_BLEND_END))


def chi(s, order: int = 0) -> np.ndarray:
    """Rightward cutoff: 0 for ``s <= 1``, 1 for ``s >= 2``, increasing on (1, 2)."""
    return smooth_step(np.asarray(s, dtype=float) - 1.0, order)


def zeta(x, order: int = 0) -> np.ndarray:
    """Cutoff equal to 1 on [0, 1] and vanishing outside (-1, 2)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    left = (x > -1.0) & (x < 0.0)
    out[left] = smooth_step(x[left] + 1.0, order)
    right = (x > 1.0) & (x < 2.0)
    if order == 0:
        out[right] = 1.0 - smooth_step(x[right] - 1.0)
        out[(x >= 0.0) & (x <= 1.0)] = 1.0
    else:
        out[right] = -smooth_step(x[right] - 1.0, order)
    return out


def zeta_n(x, n: int, order: int = 0) -> np.ndarray:
    return zeta(np.asarray(x, dtype=float) - n, order)


def _sup(func, lo, hi, order, n=200_001):
    s = np.linspace(lo, hi, n)
    return float(np.max(np.abs(func(s, order))))


@dataclass(frozen=True)
class WeightFamily:
    """Measured constants of the concrete weights.

    ``phi_c`` is the smallest c with ``|phi'| <= c phi`` and ``|phi''| <= c phi``
    on a fine sample of ``[0, 20]``; ``chi_bounds[k-1]`` is ``sup |chi^{(k)}|``.
    """

    phi_c: float
    chi_bounds: tuple
    psi_limit: float

    @classmethod
    @lru_cache(maxsize=1)
    def measure(cls) -> "WeightFamily":
        x = np.linspace(0.0, 20.0, 400_001)
        p = phi(x)
        c = max(np.max(np.abs(phi(x, 1)) / p), np.max(np.abs(phi(x, 2)) / p))
        bounds = tuple(_sup(chi, 1.0, 2.0, k) for k in (1, 2, 3))
        return cls(float(c), bounds, psi_sup())

    phi = staticmethod(phi)
    psi = staticmethod(psi)
    chi = staticmethod(chi)
    zeta_n = staticmethod(zeta_n)
