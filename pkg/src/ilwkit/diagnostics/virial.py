"""Term-by-term virial identity for the weighted mass ``int u^2 phi(x, t) dx``.

With ``A`` the linear ILW generator (symbol ``i Omega``) and the rightward
weight ``phi(x, t) = chi((x - c1) / (c0 t))``,

    d/dt int u^2 phi = -int u [A; phi] u + (2/3) int u^3 phi_x + int u^2 phi_t

and the commutator is split as ``[A; phi] = c phi_x Omega'(d/dx) + R1``. The
leading coefficient is ``c = 1`` in this sign convention; an L2-projected
value is also reported. Since ``Omega' = q^2``,

    E1 = -c int phi_x (q u)^2,        E2 = -c int u q [q; phi_x] u,
    E3 = -int u R1 u,                 E4 = (2/3) int u^3 phi_x,
    E5 = int u^2 phi_t.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..evolution import EvolutionConfig, _stepper
from ..reports import RatioCase, RatioReport, l2
from ..spectral import (
    Grid,
    ModelParams,
    RealField,
    linear_ilw_multiplier,
    omega_prime_multiplier,
    q_multiplier,
)
from .functionals import VirialParams, mu1, psi_sigma
from .weights import chi

WEIGHT_CHOICES = ("chi_ray",)


def chi_ray(x, t: float, vp: VirialParams, order: int = 0) -> np.ndarray:
    """``d^order/dx^order chi((x - c1)/(c0 t))``."""
    scale = vp.c0 * t
    return chi((np.asarray(x, dtype=float) - vp.c1) / scale, order) / scale ** order


def chi_ray_dt(x, t: float, vp: VirialParams) -> np.ndarray:
    """``d/dt chi((x - c1)/(c0 t))``."""
    s = (np.asarray(x, dtype=float) - vp.c1) / (vp.c0 * t)
    return -s * chi(s, 1) / t


def _apply(sym, v: np.ndarray) -> np.ndarray:
    return np.fft.ifft(sym * np.fft.fft(v)).real


def commutator(sym: np.ndarray, weight: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``[Q; w] f = Q(w f) - w Q f`` for the multiplier with symbol ``sym``.

    Constants commute with ``Q``, so ``w`` is first shifted by its value at
    the first node; a constant weight then gives exactly zero.
    """
    w = weight - weight[0]
    return _apply(sym, w * f) - w * _apply(sym, f)


@dataclass(frozen=True)
class VirialTerms:
    t: float
    E1: float
    E2: float
    E3: float
    E4: float
    E5: float
    lhs_fd: float
    c: float
    c_projection: float

    @property
    def total(self) -> float:
        return self.E1 + self.E2 + self.E3 + self.E4 + self.E5

    @property
    def scale(self) -> float:
        return abs(self.E1) + abs(self.E2) + abs(self.E3) + abs(self.E4) + abs(self.E5) + abs(self.lhs_fd)

    @property
    def closure_gap(self) -> float:
        return abs(self.total - self.lhs_fd)


def weighted_mass(u: RealField, vp: VirialParams) -> float:
    return float(u.grid.spacing * np.sum(u.samples ** 2 * chi_ray(u.grid.nodes, u.time, vp)))


def virial_terms(params: ModelParams, u: RealField, vp: VirialParams, constant: str = "taylor") -> tuple:
    """``(E1, ..., E5, c, c_projection)`` at the time carried by ``u``."""
    if not u.time > 0:
        raise ValueError("the rightward weight needs t > 0")
    g, t, v, h = u.grid, u.time, u.samples, u.grid.spacing
    x = g.nodes
    w = chi_ray(x, t, vp)
    w1 = chi_ray(x, t, vp, 1)
    wt = chi_ray_dt(x, t, vp)
    a_sym = linear_ilw_multiplier(params, g).symbol
    q_sym = q_multiplier(params, g).symbol
    op_sym = omega_prime_multiplier(params, g).symbol

    comm = commutator(a_sym, w, v)
    lead = w1 * _apply(op_sym, v)
    denom = h * np.dot(lead, lead)
    c_proj = float(h * np.dot(comm, lead) / denom) if denom > 0 else 1.0
    if constant == "taylor":
        c = 1.0
    elif constant == "projection":
        c = c_proj
    else:
        raise ValueError("constant must be 'taylor' or 'projection'")
    qu = _apply(q_sym, v)
    r1 = comm - c * lead
    e1 = -c * h * np.dot(w1, qu ** 2)
    e2 = -c * h * np.dot(v, _apply(q_sym, commutator(q_sym, w1, v)))
    e3 = -h * np.dot(v, r1)
    e4 = (2.0 / 3.0) * h * np.dot(v ** 3, w1)
    e5 = h * np.dot(v ** 2, wt)
    return float(e1), float(e2), float(e3), float(e4), float(e5), c, c_proj


def virial_decomposition(
    u_prev: RealField,
    u: RealField,
    u_next: RealField,
    params: ModelParams,
    vp: VirialParams,
    weight_choice: str = "chi_ray",
    constant: str = "taylor",
) -> VirialTerms:
    """All five terms at ``u.time`` plus the centered difference of the weighted mass."""
    if weight_choice not in WEIGHT_CHOICES:
        raise ValueError(f"weight_choice must be one of {WEIGHT_CHOICES}")
    dt_b = u.time - u_prev.time
    dt_f = u_next.time - u.time
    if not (dt_b > 0 and dt_f > 0 and abs(dt_b - dt_f) <= 1e-9 * max(dt_b, dt_f)):
        raise ValueError(
            "missing neighbor checkpoints: need fields at t - dt, t, t + dt "
            f"(got {u_prev.time}, {u.time}, {u_next.time})"
        )
    e1, e2, e3, e4, e5, c, c_proj = virial_terms(params, u, vp, constant)
    lhs = (weighted_mass(u_next, vp) - weighted_mass(u_prev, vp)) / (dt_b + dt_f)
    return VirialTerms(u.time, e1, e2, e3, e4, e5, lhs, c, c_proj)


def neighbor_triplets(config: EvolutionConfig, u0: RealField, times: Sequence[float]) -> list:
    """Fields at ``t - dt, t, t + dt`` for each requested time (step aligned)."""
    st = _stepper(config)
    dt, n = config.dt, config.grid.n_points
    targets = sorted(int(round(t / dt)) for t in times)
    if targets and targets[0] < 1:
        raise ValueError("sample times must be at least one step after t = 0")
    wanted = {i + d for i in targets for d in (-1, 0, 1)}
    keep = {}
    vh = np.fft.rfft(u0.samples)
    if 0 in wanted:
        keep[0] = u0.samples.copy()
    for i in range(1, (targets[-1] + 2) if targets else 0):
        vh = st.step(vh)
        if i in wanted:
            keep[i] = np.fft.irfft(vh, n)
    return [
        tuple(RealField(config.grid, keep[i + d], (i + d) * dt) for d in (-1, 0, 1))
        for i in targets
    ]


# -- remainder estimates --------------------------------------------------------


@dataclass(frozen=True)
class SampledWeight:
    """Weight values and first three derivatives on a grid."""

    label: str
    derivs: tuple  # (w, w', w'', w''')


def chi_ray_weight(grid: Grid, scale: float, shift: float = 0.0) -> SampledWeight:
    x = (grid.nodes - shift) / scale
    return SampledWeight(
        f"chi_ray(scale={scale:g},shift={shift:g})",
        tuple(chi(x, j) / scale ** j for j in range(4)),
    )


def psi_weight(grid: Grid, vp: VirialParams, t: float) -> SampledWeight:
    m1 = mu1(t, vp)
    x = grid.nodes / m1
    return SampledWeight(
        f"psi_sigma(x/mu1(t={t:g}))",
        tuple(psi_sigma(x, vp.sigma, j) / m1 ** j for j in range(4)),
    )


def constant_weight(grid: Grid, value: float = 1.0) -> SampledWeight:
    z = np.zeros(grid.n_points)
    return SampledWeight(f"const({value:g})", (np.full(grid.n_points, value), z, z, z))


def remainder_battery(grid: Grid, vp: VirialParams = VirialParams(), seed: int = 0, n_functions: int = 8) -> list:
    """Seeded (weight, f) pairs: chi-ray and psi weights times Gaussian/oscillatory data.

    The first function is always the unit Gaussian; the rest are random
    shifted, dilated and modulated Gaussians.
    """
    rng = np.random.default_rng(seed)
    x = grid.nodes
    weights = [chi_ray_weight(grid, s, sh) for s, sh in ((2.0, -3.0), (4.0, -2.0), (8.0, -10.0))]
    weights += [psi_weight(grid, vp, t) for t in (10.0, 100.0)]
    fs = [("gauss(c=0,w=1,k=0)", np.exp(-x ** 2))]
    for _ in range(n_functions - 1):
        c = rng.uniform(-3.0, 3.0)
        wdt = rng.uniform(0.7, 2.0)
        k = rng.uniform(0.0, 3.0)
        fs.append(
            (f"gauss(c={c:.3f},w={wdt:.3f},k={k:.3f})",
             np.exp(-((x - c) / wdt) ** 2) * np.cos(k * x))
        )
    return [(w, lab, f) for w in weights for lab, f in fs]


def _h2_norm(derivs: Sequence[np.ndarray], h: float) -> float:
    return float(np.sqrt(sum(l2(d, h) ** 2 for d in derivs)))


def check_remainder_bounds(params: ModelParams, grid: Grid, battery) -> dict:
    """Ratios for the R1 remainder and the two ``q [q; rho]`` commutator bounds.

    Returns a mapping from bound name to :class:`RatioReport`.
    """
    h = grid.spacing
    a_sym = linear_ilw_multiplier(params, grid).symbol
    q_sym = q_multiplier(params, grid).symbol
    op_sym = omega_prime_multiplier(params, grid).symbol
    r1_cases, e2_cases, e2b_cases = [], [], []
    for i, (w, flabel, f) in enumerate(battery):
        w0, w1, w2, w3 = w.derivs
        label = f"{w.label}|{flabel}"
        nf = l2(f, h)
        r1 = commutator(a_sym, w0, f) - w1 * _apply(op_sym, f)
        rhs = np.sqrt(l2(w2, h) * l2(w3, h)) * nf
        r1_cases.append(RatioCase.make(i, label, l2(r1, h), rhs, zero_ratio=0.0))
        qc = _apply(q_sym, commutator(q_sym, w0, f))
        lhs = l2(qc, h)
        e2_cases.append(RatioCase.make(i, label, lhs, _h2_norm((w1, w2, w3), h) * nf, zero_ratio=0.0))
        rhs_b = np.sqrt(l2(w2, h)) * (np.sqrt(l2(w1, h)) + np.sqrt(l2(w3, h))) * nf
        e2b_cases.append(RatioCase.make(i, label, lhs, rhs_b, zero_ratio=0.0))
    return {
        "R1_remainder": RatioReport("R1_remainder", tuple(r1_cases)),
        "q_commutator_H2": RatioReport("q_commutator_H2", tuple(e2_cases)),
        "q_commutator_interp": RatioReport("q_commutator_interp", tuple(e2b_cases)),
    }
