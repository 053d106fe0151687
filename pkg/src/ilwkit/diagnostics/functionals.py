"""Scalar diagnostics on checkpoints: invariants, region masses, weighted
virial functionals and the smoothing flux."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from functools import lru_cache

import numpy as np

from ..spectral import (
    Grid,
    ModelParams,
    RealField,
    T_delta_multiplier,
    apply_multiplier,
    boundary_mass_fraction,
    dx_multiplier,
    guard_boundary,
    p_multiplier,
    weighted_norm,
)
from ..spectral.operators import Multiplier
from .weights import phi, psi

#: "t >> 1" is taken to mean t >= T_LARGE.
T_LARGE = 10.0
REGIONS = ("ball_centered", "ball_shifted", "right_of_ray")


def _integral(values: np.ndarray, grid: Grid) -> float:
    return float(grid.spacing * np.sum(values))


@lru_cache(maxsize=64)
def _T_dx(params: ModelParams, grid: Grid) -> Multiplier:
    # T(u_x): symbol -k coth(delta k) but exactly 0 at k = 0
    return T_delta_multiplier(params, grid).compose(dx_multiplier(grid), "T dx")


def invariant_I1(u: RealField) -> float:
    return _integral(u.samples, u.grid)


def invariant_I2(u: RealField) -> float:
    return _integral(u.samples ** 2, u.grid)


def invariant_I3(params: ModelParams, u: RealField) -> float:
    """Hamiltonian ``int (u T(u_x) + u^2/delta + u^3/3) dx``."""
    d = params.delta
    v = u.samples
    tux = apply_multiplier(_T_dx(params, u.grid), u).samples
    return _integral(v * tux + v ** 2 / d + v ** 3 / 3.0, u.grid)


def invariant_I4(params: ModelParams, u: RealField) -> float:
    """The conserved quantity controlling the H^1 norm."""
    d = params.delta
    v = u.samples
    ux = apply_multiplier(dx_multiplier(u.grid), u).samples
    tux = apply_multiplier(_T_dx(params, u.grid), u).samples
    dens = (
        v ** 4 / 4.0
        + 1.5 * v ** 2 * tux
        + 0.5 * ux ** 2
        + 1.5 * tux ** 2
        + (1.5 * v ** 3 + 4.5 * v * tux) / d
        + 1.5 * v ** 2 / d ** 2
    )
    return _integral(dens, u.grid)


def invariants(params: ModelParams, u: RealField) -> tuple:
    return (invariant_I1(u), invariant_I2(u), invariant_I3(params, u), invariant_I4(params, u))


# -- parameters ---------------------------------------------------------------


def virial_param_violations(
    b: float, m: float, q_exp: float, sigma: float, lam: float, alpha: float, c0: float,
    c1: float, corollary: bool = False,
) -> list:
    """Every violated constraint on the virial parameters, as messages."""
    out = []
    if not 0.0 < b < 2.0 / 3.0:
        out.append(f"b={b} violates 0 < b < 2/3")
    if not q_exp > 1.0:
        out.append(f"q_exp={q_exp} must exceed 1")
    elif b > 2.0 / (2.0 + q_exp):
        out.append(
            f"b={b} violates the b-m relation 0 < b <= min{{2/3, 2/(2+q)}} = {2.0 / (2.0 + q_exp):.6g}"
        )
    if m < 0.0 or m > 1.0 - b / 2.0:
        out.append(f"m={m} violates the b-m relation 0 <= m <= 1 - b/2 = {1.0 - b / 2.0:.6g}")
    if corollary and not m < 1.0 - 1.5 * b:
        out.append(f"m={m} violates the shifted-ball condition m < 1 - 3b/2 = {1.0 - 1.5 * b:.6g}")
    if not sigma > 0:
        out.append(f"sigma={sigma} must be positive")
    if not lam > 0:
        out.append(f"lambda={lam} must be positive")
    if not alpha >= 0:
        out.append(f"alpha={alpha} must be nonnegative")
    if not c0 > 0:
        out.append(f"c0={c0} must be positive")
    if not math.isfinite(c1):
        out.append(f"c1={c1} must be finite")
    return out


@dataclass(frozen=True)
class VirialParams:
    b: float = 0.5
    m: float = 0.2
    q_exp: float = 1.5
    sigma: float = 1.0
    lam: float = 1.0
    alpha: float = 0.5
    c0: float = 2.0
    c1: float = 0.0
    corollary: bool = True
    rho_sign: int = 1

    def __post_init__(self):
        bad = virial_param_violations(
            self.b, self.m, self.q_exp, self.sigma, self.lam, self.alpha, self.c0, self.c1,
            self.corollary,
        )
        if self.rho_sign not in (1, -1):
            bad.append(f"rho_sign must be +1 or -1, got {self.rho_sign}")
        if bad:
            raise ValueError("; ".join(bad))


def mu1(t: float, vp: VirialParams) -> float:
    """``t^b / log t``."""
    return t ** vp.b / math.log(t)


def mu(t: float, vp: VirialParams) -> float:
    """``t^(1-b) log^2 t``."""
    return t ** (1.0 - vp.b) * math.log(t) ** 2


def mu1_log_derivative(t: float, vp: VirialParams) -> float:
    return vp.b / t - 1.0 / (t * math.log(t))


def mu_log_derivative(t: float, vp: VirialParams) -> float:
    return (1.0 - vp.b) / t + 2.0 / (t * math.log(t))


def rho(t: float, vp: VirialParams) -> float:
    return vp.rho_sign * t ** vp.m


def psi_sigma(x, sigma: float, order: int = 0) -> np.ndarray:
    """``sigma psi(x / sigma)`` and its derivatives."""
    return sigma ** (1 - order) * psi(np.asarray(x, dtype=float) / sigma, order)


def phi_lambda(x, lam: float, order: int = 0) -> np.ndarray:
    """``lambda phi(x / lambda)`` and its derivatives."""
    return lam ** (1 - order) * phi(np.asarray(x, dtype=float) / lam, order)


# -- region masses ------------------------------------------------------------


def region_mass(u: RealField, t: float, vp: VirialParams, region: str) -> float:
    """Sharp-cutoff integral of ``u^2`` over the requested region."""
    x = u.grid.nodes
    if region in ("ball_centered", "ball_shifted"):
        if not t > 1.0:
            raise ValueError(f"ball regions need t > 1, got t={t}")
        r = t ** vp.b
        center = 0.0 if region == "ball_centered" else rho(t, vp)
        mask = np.abs(x - center) < r
        reach = abs(center) + r
    elif region == "right_of_ray":
        if not t > 0.0:
            raise ValueError(f"right_of_ray needs t > 0, got t={t}")
        mask = x >= vp.c0 * t + vp.c1
        reach = abs(vp.c0 * t + vp.c1)
    else:
        raise ValueError(f"region must be one of {REGIONS}, got {region!r}")
    if reach >= 0.45 * u.grid.length:
        guard_boundary(u, level=0.0, what=f"{region} reaches the torus edge")
    return _integral(u.samples ** 2 * mask, u.grid)


# -- virial functionals -------------------------------------------------------


def _check_large_t(t: float) -> None:
    if not t >= T_LARGE:
        raise ValueError(f"functional needs t >= {T_LARGE:g}, got t={t}")


def functional_I(u: RealField, t: float, vp: VirialParams) -> float:
    """``(1/mu) int u psi_sigma(x/mu1) phi_lambda(x/mu1^q) dx``."""
    _check_large_t(t)
    x = u.grid.nodes
    m1 = mu1(t, vp)
    w = psi_sigma(x / m1, vp.sigma) * phi_lambda(x / m1 ** vp.q_exp, vp.lam)
    return _integral(u.samples * w, u.grid) / mu(t, vp)


def functional_I_rho(u: RealField, t: float, vp: VirialParams, sign: int | None = None) -> float:
    """Shifted functional: ``x`` replaced by ``x - rho(t)``, ``rho = sign t^m``."""
    _check_large_t(t)
    s = vp.rho_sign if sign is None else sign
    y = u.grid.nodes - s * t ** vp.m
    m1 = mu1(t, vp)
    w = psi_sigma(y / m1, vp.sigma) * phi_lambda(y / m1 ** vp.q_exp, vp.lam)
    return _integral(u.samples * w, u.grid) / mu(t, vp)


def functional_J(u: RealField, t: float, vp: VirialParams) -> float:
    """``(1/mu) int u^2 psi_sigma(x/mu1) dx``."""
    _check_large_t(t)
    w = psi_sigma(u.grid.nodes / mu1(t, vp), vp.sigma)
    return _integral(u.samples ** 2 * w, u.grid) / mu(t, vp)


def functional_I_envelope(t, vp: VirialParams):
    """Shape ``t^{-(2-2b-bq)/2} log^{-(4+q)/2} t`` of the bound on ``|I(t)|``."""
    t = np.asarray(t, dtype=float)
    return t ** (-(2.0 - 2.0 * vp.b - vp.b * vp.q_exp) / 2.0) * np.log(t) ** (-(4.0 + vp.q_exp) / 2.0)


def fit_envelope(times, values, vp: VirialParams) -> float:
    """Smallest constant C with ``|I(t)| <= C * envelope(t)`` on the samples."""
    return float(np.max(np.abs(values) / functional_I_envelope(times, vp)))


# -- smoothing flux -----------------------------------------------------------


@lru_cache(maxsize=64)
def _p_squared(params: ModelParams, grid: Grid) -> Multiplier:
    p = p_multiplier(params, grid)
    return p.compose(p, "p^2")


def smoothing_flux(u: RealField, alpha: float, params: ModelParams) -> tuple:
    """``(int <x>^{2a-1} (p u)^2, int <x>^{2(a-1)} (p^2 u)^2)``."""
    x2 = 1.0 + u.grid.nodes ** 2
    pu = apply_multiplier(p_multiplier(params, u.grid), u).samples
    ppu = apply_multiplier(_p_squared(params, u.grid), u).samples
    half = _integral(x2 ** (alpha - 0.5) * pu ** 2, u.grid)
    full = _integral(x2 ** (alpha - 1.0) * ppu ** 2, u.grid)
    return half, full


# -- rows ---------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsRow:
    """One checkpoint's diagnostics. ``None`` marks a quantity undefined at ``t``."""

    t: float
    I1: float | None = None
    I2: float | None = None
    I3: float | None = None
    I4: float | None = None
    mass_ball_centered: float | None = None
    mass_ball_shifted: float | None = None
    mass_right: float | None = None
    func_I: float | None = None
    func_I_rho: float | None = None
    func_J: float | None = None
    weighted_norm_alpha: float | None = None
    smoothing_flux_half: float | None = None
    smoothing_flux_full: float | None = None
    boundary_mass_fraction: float | None = None

    @classmethod
    def columns(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in self.columns())

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DiagnosticsFlags:
    invariants: bool = True
    regions: bool = True
    functionals: bool = True
    weighted_norm: bool = True
    smoothing: bool = True


def compute_row(
    params: ModelParams, vp: VirialParams, u: RealField, flags: DiagnosticsFlags = DiagnosticsFlags()
) -> DiagnosticsRow:
    t = u.time
    row = {"t": t, "boundary_mass_fraction": boundary_mass_fraction(u)}
    if flags.invariants:
        row.update(zip(("I1", "I2", "I3", "I4"), invariants(params, u)))
    if flags.regions:
        if t > 1.0:
            row["mass_ball_centered"] = region_mass(u, t, vp, "ball_centered")
            if vp.corollary:
                row["mass_ball_shifted"] = region_mass(u, t, vp, "ball_shifted")
        if t > 0.0:
            row["mass_right"] = region_mass(u, t, vp, "right_of_ray")
    if flags.functionals and t >= T_LARGE:
        row["func_I"] = functional_I(u, t, vp)
        if vp.corollary:
            row["func_I_rho"] = functional_I_rho(u, t, vp)
        row["func_J"] = functional_J(u, t, vp)
    if flags.weighted_norm:
        row["weighted_norm_alpha"] = weighted_norm(u, vp.alpha)
    if flags.smoothing:
        row["smoothing_flux_half"], row["smoothing_flux_full"] = smoothing_flux(u, vp.alpha, params)
    return DiagnosticsRow(**row)


def compute_rows(
    traj, vp: VirialParams, flags: DiagnosticsFlags = DiagnosticsFlags(), threads: int = 1
) -> list:
    """Rows for every checkpoint, ordered by time regardless of ``threads``."""
    params = traj.config.params
    fields_ = list(traj.fields())
    if threads <= 1:
        rows = [compute_row(params, vp, u, flags) for u in fields_]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda u: compute_row(params, vp, u, flags), fields_))
    return sorted(rows, key=lambda r: r.t)
