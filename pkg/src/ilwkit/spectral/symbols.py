"""Scalar Fourier symbols of the ILW operators.

Convention: ``f^(k) = int exp(-i k x) f(x) dx`` so that ``d/dx`` has symbol
``i k``. The linear ILW flow is ``u^_t = i Omega(k) u^`` with

    Omega(k) = k^2 coth(delta k) - k / delta,

and ``T_delta`` has symbol ``i coth(delta k)``. In this convention
``T_delta`` tends to ``-H`` (``H`` with symbol ``-i sgn k``) as delta grows,
linear waves travel left and solitary waves travel right with speed
``c > 1/delta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

#: Below this value of ``|delta k|`` the power series replaces the closed forms.
SERIES_THRESHOLD = 0.5
SERIES_TERMS = 11

# z coth z - 1 = sum_n A_n z^(2n),  A_n = 4^n B_2n / (2n)!; the terms shrink
# like (z/pi)^2, so 11 terms reach ~1e-19 relative at the threshold.
_N = np.arange(1, SERIES_TERMS + 1)
_A = np.array([4.0 ** n * bernoulli(2 * n)[-1] / np.prod(np.arange(1.0, 2 * n + 1)) for n in _N])


@dataclass(frozen=True)
class ModelParams:
    """Depth parameter of the ILW equation."""

    delta: float

    def __post_init__(self):
        d = self.delta
        if isinstance(d, bool) or not np.isfinite(d) or d <= 0:
            raise ValueError(f"delta must be a positive finite number, got {d!r}")
        object.__setattr__(self, "delta", float(d))


def _as_array(k):
    k = np.asarray(k, dtype=np.float64)
    return k, k.ndim == 0


def _ret(out, scalar):
    return float(out) if scalar else out


def _series(z: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``sum_n coeffs[n-1] z^(2n)`` by Horner's rule in ``z^2``."""
    z2 = z * z
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = (acc + c) * z2
    return acc


def _zcoth_m1(z: np.ndarray) -> np.ndarray:
    """``z coth z - 1`` without cancellation near ``z = 0``."""
    out = np.empty_like(z)
    small = np.abs(z) < SERIES_THRESHOLD
    out[small] = _series(z[small], _A)
    zl = z[~small]
    out[~small] = zl / np.tanh(zl) - 1.0
    return out


def _zcoth(z: np.ndarray) -> np.ndarray:
    """``z coth z`` with the removable singularity filled in."""
    return 1.0 + _zcoth_m1(z)


def _z2csch2(z: np.ndarray) -> np.ndarray:
    """``z^2 / sinh(z)^2`` for ``|z|`` away from zero, overflow free."""
    a = np.abs(z)
    return z ** 2 * 4.0 * np.exp(-2.0 * a) / np.expm1(-2.0 * a) ** 2


def symbol_omega(params: ModelParams, k):
    """``Omega(k) = k^2 coth(delta k) - k/delta`` (real and odd)."""
    k, scalar = _as_array(k)
    d = params.delta
    z = d * k
    out = (k / d) * _zcoth_m1(z)
    return _ret(out, scalar)


def symbol_omega_prime(params: ModelParams, k):
    """``Omega'(k) = 2k coth(delta k) - delta k^2 csch^2(delta k) - 1/delta`` (even)."""
    k, scalar = _as_array(k)
    d = params.delta
    z = d * k
    out = np.empty_like(k)
    small = np.abs(z) < SERIES_THRESHOLD
    # delta Omega' = f + z f' with f = z coth z - 1
    out[small] = _series(z[small], _A * (1 + 2 * _N)) / d
    zl = z[~small]
    out[~small] = (2.0 * zl / np.tanh(zl) - _z2csch2(zl) - 1.0) / d
    return _ret(out, scalar)


def clamped_count(params: ModelParams, k) -> int:
    """Number of samples where ``Omega'`` is negative and ``q`` clamps it to zero."""
    return int(np.count_nonzero(np.atleast_1d(symbol_omega_prime(params, k)) < 0.0))


def symbol_q(params: ModelParams, k):
    """Even square root ``q = sqrt(max(Omega', 0))``."""
    k, scalar = _as_array(k)
    out = np.sqrt(np.maximum(symbol_omega_prime(params, k), 0.0))
    return _ret(out, scalar)


def symbol_p(params: ModelParams, k):
    """Odd square root ``p = sgn(k) q(k)``."""
    k, scalar = _as_array(k)
    out = np.sign(k) * symbol_q(params, k)
    return _ret(out, scalar)


def symbol_coth(params: ModelParams, k):
    """``coth(delta k)`` with value 0 at ``k = 0`` (the odd extension)."""
    k, scalar = _as_array(k)
    out = np.zeros_like(k)
    nz = k != 0
    out[nz] = 1.0 / np.tanh(params.delta * k[nz])
    return _ret(out, scalar)


def symbol_dx_T(params: ModelParams, k):
    """Symbol of ``d/dx T_delta``: ``-k coth(delta k)``, equal to ``-1/delta`` at 0."""
    k, scalar = _as_array(k)
    out = -_zcoth(params.delta * k) / params.delta
    return _ret(out, scalar)


def symbol_L(params: ModelParams, k):
    """Symbol ``Omega(k)/k`` of the even operator ``L`` with ``L d/dx = -(T d^2/dx^2 + d/dx/delta)``."""
    k, scalar = _as_array(k)
    d = params.delta
    z = d * k
    out = _zcoth_m1(z) / d
    return _ret(out, scalar)
