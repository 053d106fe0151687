"""Direct quadrature of the principal-value convolution defining ``T_delta``.

On the line ``T_delta f(x) = p.v. int K(x - y) f(y) dy`` with the odd kernel
``K(s) = -(1/(2 delta)) coth(pi s / (2 delta))``. On the torus of length L
the periodized kernel is ``K(s) + s/(delta L)`` for ``s`` in ``(-L/2, L/2)``
(the image sum of ``coth`` converges to this up to exponentially small
terms), set to zero at ``s = +-L/2``.

The singular part ``-1/(pi s)`` is odd, so the punctured trapezoid sum over
nodes ``m != 0`` captures it up to a local correction ``h f'(x) / pi``, with
``f'`` taken from a tenth-order centered finite difference. Everything here
is independent of the FFT machinery.
"""
from __future__ import annotations

import warnings

import numpy as np

from .grid import BoundaryMassWarning, RealField, boundary_mass_fraction
from .symbols import ModelParams

ORACLE_GUARD_LEVEL = 1e-8

# Tenth-order central difference weights for offsets -5..5.
_FD10 = np.array(
    [-1 / 1260, 5 / 504, -5 / 84, 5 / 21, -5 / 6, 0.0, 5 / 6, -5 / 21, 5 / 84, -5 / 504, 1 / 1260]
)


def periodized_kernel(params: ModelParams, s: np.ndarray, length: float) -> np.ndarray:
    d = params.delta
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (np.abs(s) < 0.5 * length) & (s != 0)
    si = s[inside]
    out[inside] = -0.5 / d / np.tanh(np.pi * si / (2.0 * d)) + si / (d * length)
    return out


def _fd_derivative(f: np.ndarray, h: float, idx: np.ndarray) -> np.ndarray:
    n = f.shape[0]
    offsets = np.arange(-5, 6)
    vals = f[(idx[:, None] + offsets[None, :]) % n]
    return vals @ _FD10 / h


def quadrature_T_oracle(params: ModelParams, u: RealField, node_index):
    """Value of ``T_delta u`` at node(s) ``node_index`` by direct summation."""
    frac = boundary_mass_fraction(u)
    if frac > ORACLE_GUARD_LEVEL:
        warnings.warn(
            f"quadrature oracle: boundary mass fraction {frac:.3e} exceeds "
            f"{ORACLE_GUARD_LEVEL:g}; periodization contaminates the result",
            BoundaryMassWarning,
            stacklevel=2,
        )
    g = u.grid
    n, h = g.n_points, g.spacing
    f = u.samples
    idx = np.atleast_1d(np.asarray(node_index, dtype=np.int64))
    if np.any((idx < 0) | (idx >= n)):
        raise IndexError(f"node_index out of range [0, {n})")
    m = np.arange(-(n // 2), n // 2)
    kern = periodized_kernel(params, m * h, g.length)  # zero at m = 0 and m = -n/2
    out = np.empty(idx.shape[0])
    # chunk rows to bound memory at O(chunk * n)
    chunk = max(1, 2 ** 22 // n)
    for start in range(0, idx.shape[0], chunk):
        rows = idx[start:start + chunk]
        vals = f[(rows[:, None] - m[None, :]) % n]
        out[start:start + chunk] = h * (vals @ kern)
    out += h * _fd_derivative(f, h, idx) / np.pi
    if np.ndim(node_index) == 0:
        return float(out[0])
    return out
