"""Seeded numerical checks of the operator inequalities used in the analysis.

Every check reports ratios ``lhs / rhs`` and never claims a constant. At p=2
the sup-norms appearing in the Kato-Ponce and Leibniz estimates are replaced
by grid maxima.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from math import factorial
from typing import Callable

import numpy as np
import sympy as sp

from .reports import RatioCase, RatioReport, l2
from .spectral import (
    Grid,
    ModelParams,
    Multiplier,
    RealField,
    boundary_mass_fraction,
    check_same_grid,
    D_multiplier,
    J_multiplier,
    symbol_omega_prime,
    symbol_p,
)

# -- battery ------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionSpec:
    """``He_n((x-c)/w) exp(-((x-c)/w)^2 / 2) cos(k x + theta)`` scaled by ``amp``."""

    center: float
    width: float
    degree: int
    wavenumber: float
    phase: float
    amp: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = (np.asarray(x, dtype=float) - self.center) / self.width
        herm = np.polynomial.hermite_e.hermeval(y, [0.0] * self.degree + [1.0])
        return self.amp * herm * np.exp(-0.5 * y * y) * np.cos(self.wavenumber * x + self.phase)

    @property
    def label(self) -> str:
        return (f"He{self.degree}(c={self.center:.3f},w={self.width:.3f})"
                f"cos({self.wavenumber:.3f}x+{self.phase:.3f})")

    def dilated(self, lam: float) -> "FunctionSpec":
        """Spec of ``x -> f(lam x)``."""
        return replace(self, center=self.center / lam, width=self.width / lam,
                       wavenumber=self.wavenumber * lam)


_x, _R, _b = sp.symbols("x R beta", real=True)


@lru_cache(maxsize=None)
def _weight_derivs(kind: str, max_order: int = 4):
    y = _R * sp.tanh(_x / _R)
    if kind == "bracket":
        expr = (1 + y ** 2) ** (_b / 2)
    elif kind == "phi_beta":
        expr = y * (1 + y ** 2) ** ((_b - 1) / 2)
    elif kind == "bracket_untruncated":
        expr = (1 + _x ** 2) ** (_b / 2)
    else:
        raise ValueError(kind)
    return tuple(sp.lambdify((_x, _R, _b), sp.diff(expr, _x, j), "numpy") for j in range(max_order + 1))


@dataclass(frozen=True)
class SmoothWeight:
    """Weight with symbolic derivatives.

    ``bracket``: ``<y>^beta``; ``phi_beta``: ``y <y>^(beta-1)``; both in the
    saturated coordinate ``y = R tanh(x/R)`` so that every derivative decays.
    """

    kind: str
    beta: float
    radius: float = 12.5
    scale: float = 1.0

    @property
    def label(self) -> str:
        tail = "" if self.scale == 1.0 else f",s={self.scale:g}"
        return f"{self.kind}(beta={self.beta:g},R={self.radius:g}{tail})"

    def derivative(self, x: np.ndarray, order: int = 0) -> np.ndarray:
        """``d^order/dx^order`` of ``w(x / scale)``."""
        f = _weight_derivs(self.kind)[order]
        s = self.scale
        out = f(np.asarray(x, dtype=float) / s, self.radius / s, self.beta) / s ** order
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)).copy()


def constant_weight_spec() -> SmoothWeight:
    return SmoothWeight("bracket", 0.0)


WEIGHT_SCALE = 4.0


@dataclass(frozen=True)
class TestBattery:
    __test__ = False  # not a pytest class

    seed: int
    grid: Grid
    specs: tuple
    weights: tuple

    @classmethod
    def build(cls, seed: int, grid: Grid, n_functions: int = 6) -> "TestBattery":
        rng = np.random.default_rng(seed)
        span = 0.04 * grid.length
        specs = []
        for i in range(n_functions):
            specs.append(
                FunctionSpec(
                    center=float(rng.uniform(-span, span)),
                    width=float(rng.uniform(0.8, 2.0)),
                    degree=int(i % 4),
                    wavenumber=float(rng.uniform(0.0, 2.5)),
                    phase=float(rng.uniform(0.0, 2 * np.pi)),
                )
            )
        R = grid.length / 8.0
        # weights vary on scale WEIGHT_SCALE so the Taylor expansion in the
        # commutator is asymptotic for the battery's unit-width functions
        weights = (SmoothWeight("bracket", 1.0, R, WEIGHT_SCALE), SmoothWeight("phi_beta", 2.0, R, WEIGHT_SCALE))
        battery = cls(seed, grid, tuple(specs), weights)
        for f in battery.functions:
            if boundary_mass_fraction(f) >= 1e-8:
                raise ValueError("battery function is not localized; enlarge the domain")
        return battery

    @property
    def functions(self) -> list:
        return [RealField.from_function(self.grid, s) for s in self.specs]

    def on_grid(self, grid: Grid) -> "TestBattery":
        return replace(self, grid=grid)

    def refined(self, factor: int = 2) -> "TestBattery":
        return self.on_grid(self.grid.refined(factor))


# -- symbols and their derivatives --------------------------------------------

_FD1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_FD2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
_FD3 = np.array([-7 / 240, 3 / 10, -169 / 120, 61 / 30, 0.0, -61 / 30, 169 / 120, -3 / 10, 7 / 240])
_FD_OFFSETS = np.arange(-3, 4)
_FD3_OFFSETS = np.arange(-4, 5)


@dataclass(frozen=True, eq=False)
class SymbolFamily:
    """A symbol ``Q(k)`` (complex values) with tags and optional analytic derivatives."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    parity: str
    reality: str
    derivs: tuple | None = None  # callables for d^j Q / dk^j, j = 1, 2, ...

    def multiplier(self, grid: Grid) -> Multiplier:
        return Multiplier(grid, self.func(grid.wavenumbers), self.parity, self.reality, self.name)

    def derivative_values(self, k: np.ndarray, j: int) -> np.ndarray:
        if j == 0:
            return self.func(k)
        if self.derivs is not None and j <= len(self.derivs):
            return self.derivs[j - 1](k)
        h = 1e-3 * (1.0 + np.abs(k))
        if j == 3:
            vals = np.stack([self.func(k + o * h) for o in _FD3_OFFSETS])
            return np.tensordot(_FD3, vals, axes=1) / h ** 3
        vals = np.stack([self.func(k + o * h) for o in _FD_OFFSETS])
        if j == 1:
            return np.tensordot(_FD1, vals, axes=1) / h
        if j == 2:
            return np.tensordot(_FD2, vals, axes=1) / h ** 2
        raise ValueError("finite-difference symbol derivatives are implemented up to order 3")

    def derivative_multiplier(self, grid: Grid, j: int) -> Multiplier:
        """Multiplier with symbol ``(-i)^j Q^(j)(k)``, the j-th expansion operator."""
        sym = (-1j) ** j * self.derivative_values(grid.wavenumbers, j)
        parity = self.parity if j % 2 == 0 else ("odd" if self.parity == "even" else "even")
        reality = self.reality if j % 2 == 0 else ("imaginary" if self.reality == "real" else "real")
        return Multiplier(grid, sym, parity, reality, f"{self.name}^({j})")


_k = sp.Symbol("k", real=True)


def J_symbol(s: float) -> SymbolFamily:
    expr = (1 + _k ** 2) ** (sp.nsimplify(s) / 2)
    derivs = tuple(sp.lambdify(_k, sp.diff(expr, _k, j), "numpy") for j in (1, 2, 3))
    base = sp.lambdify(_k, expr, "numpy")
    return SymbolFamily(
        f"J^{s:g}", lambda k: np.asarray(base(k), dtype=complex), "even", "real",
        tuple((lambda d: (lambda k: np.asarray(d(k), dtype=complex) * np.ones_like(k)))(d) for d in derivs),
    )


def dxx_symbol() -> SymbolFamily:
    return SymbolFamily(
        "dxx", lambda k: -np.asarray(k, dtype=complex) ** 2, "even", "real",
        (lambda k: -2.0 * np.asarray(k, dtype=complex), lambda k: -2.0 * np.ones_like(k, dtype=complex),
         lambda k: np.zeros_like(k, dtype=complex)),
    )


def identity_symbol() -> SymbolFamily:
    z = lambda k: np.zeros_like(k, dtype=complex)
    return SymbolFamily("identity", lambda k: np.ones_like(k, dtype=complex), "even", "real", (z, z, z))


def p_symbol(params: ModelParams) -> SymbolFamily:
    return SymbolFamily("p", lambda k: 1j * symbol_p(params, k), "odd", "imaginary")


def omega_prime_symbol(params: ModelParams) -> SymbolFamily:
    return SymbolFamily("Omega'", lambda k: symbol_omega_prime(params, k).astype(complex), "even", "real")


# -- individual checks --------------------------------------------------------


def _J(s: float, f: np.ndarray, grid: Grid) -> np.ndarray:
    if s == 0:
        return f
    return np.fft.ifft(J_multiplier(float(s), grid).symbol * np.fft.fft(f)).real


def _weighted(grid: Grid, power: float, f: np.ndarray) -> np.ndarray:
    """``<x>^power f``; power 0 returns ``f`` itself so endpoint identities stay exact."""
    if power == 0:
        return f
    return (1.0 + grid.nodes ** 2) ** (0.5 * power) * f


def _apply_sym(m: Multiplier, f: np.ndarray) -> np.ndarray:
    return np.fft.ifft(m.symbol * np.fft.fft(f)).real


def _edge_decay_ok(values: np.ndarray, tol: float = 1e-2) -> bool:
    peak = np.max(np.abs(values))
    if peak == 0:
        return True
    edge = max(abs(values[0]), abs(values[-1]), abs(values[1]))
    return edge <= tol * peak


def commutator_expansion_remainder(Q: SymbolFamily, phi: SmoothWeight, f: RealField, k: int) -> np.ndarray:
    """``R_k f = [Q; phi] f - sum_{j<=k} (1/j!) phi^(j) Q^(j)(d/dx) f``."""
    g = f.grid
    x = g.nodes
    w = phi.derivative(x, 0)
    qm = Q.multiplier(g)
    v = f.samples
    out = _apply_sym(qm, w * v) - w * _apply_sym(qm, v)
    for j in range(1, k + 1):
        out -= phi.derivative(x, j) * _apply_sym(Q.derivative_multiplier(g, j), v) / factorial(j)
    return out


def check_commutator_expansion(
    Q: SymbolFamily, phi: SmoothWeight, f: RealField, k: int, index: int = 0
) -> RatioReport:
    """``||R_k f||_2 / (||phi^(k)||_{H^1} ||f||_2)``."""
    g, h = f.grid, f.grid.spacing
    dk = phi.derivative(g.nodes, k)
    if not _edge_decay_ok(dk):
        raise ValueError(f"weight {phi.label} has a non-decaying derivative of order {k}")
    dk1 = phi.derivative(g.nodes, k + 1)
    lhs = l2(commutator_expansion_remainder(Q, phi, f, k), h)
    rhs = np.sqrt(l2(dk, h) ** 2 + l2(dk1, h) ** 2) * l2(f.samples, h)
    label = f"{Q.name}|{phi.label}|k={k}"
    return RatioReport(f"commutator_expansion_k{k}", (RatioCase.make(index, label, lhs, rhs, zero_ratio=0.0),))


def check_interpolation(f: RealField, a: float, b: float, theta: float, index: int = 0) -> RatioReport:
    """``||<x>^{theta b} J^{(1-theta) a} f|| / (||<x>^b f||^theta ||J^a f||^{1-theta})``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    g, h, v = f.grid, f.grid.spacing, f.samples
    lhs = l2(_weighted(g, theta * b, _J((1.0 - theta) * a, v, g)), h)
    rhs = l2(_weighted(g, b, v), h) ** theta * l2(_J(a, v, g), h) ** (1.0 - theta)
    label = f"a={a:g},b={b:g},theta={theta:g}"
    return RatioReport("interpolation", (RatioCase.make(index, label, lhs, rhs),))


def check_interpolation_full(
    f: RealField, a: float, b: float, c: float, d: float, theta: float, index: int = 0
) -> RatioReport:
    """Four-parameter version: weights ``<x>^a, <x>^c`` and smoothness ``J^b, J^d``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    g, h, v = f.grid, f.grid.spacing, f.samples
    lhs = l2(_weighted(g, theta * a + (1 - theta) * c, _J(theta * b + (1 - theta) * d, v, g)), h)
    r1 = l2(_weighted(g, a, _J(b, v, g)), h)
    r2 = l2(_weighted(g, c, _J(d, v, g)), h)
    rhs = r1 ** theta * r2 ** (1.0 - theta)
    label = f"a={a:g},b={b:g},c={c:g},d={d:g},theta={theta:g}"
    return RatioReport("interpolation_full", (RatioCase.make(index, label, lhs, rhs),))


def check_gns(f: RealField, index: int = 0) -> RatioReport:
    """``||f||_3 / (||f||_2^{2/3} ||D^{1/2} f||_2^{1/3})``."""
    g, h, v = f.grid, f.grid.spacing, f.samples
    if not np.any(v):
        return RatioReport("gns", (RatioCase(index, "zero", 0.0, 0.0, None),))
    l3 = float((h * np.sum(np.abs(v) ** 3)) ** (1.0 / 3.0))
    dh = l2(_apply_sym(D_multiplier(0.5, g), v), h)
    rhs = l2(v, h) ** (2.0 / 3.0) * dh ** (1.0 / 3.0)
    return RatioReport("gns", (RatioCase.make(index, "gns", l3, rhs),))


def check_kato_ponce(f: RealField, g_: RealField, s: float, index: int = 0) -> RatioReport:
    """``||[J^s, f] g|| / (max|f'| ||J^{s-1} g|| + ||J^s f|| max|g|)``."""
    check_same_grid(f, g_)
    grid, h = f.grid, f.grid.spacing
    a, b = f.samples, g_.samples
    comm = _J(s, a * b, grid) - a * _J(s, b, grid)
    fx = np.fft.ifft(1j * grid.wavenumbers * np.fft.fft(a)).real
    rhs = np.max(np.abs(fx)) * l2(_J(s - 1.0, b, grid), h) + l2(_J(s, a, grid), h) * np.max(np.abs(b))
    return RatioReport("kato_ponce", (RatioCase.make(index, f"s={s:g}", l2(comm, h), rhs),))


def check_leibniz(f: RealField, g_: RealField, s: float, index: int = 0) -> RatioReport:
    """``||J^s(f g)|| / (max|f| ||J^s g|| + max|g| ||J^s f||)``."""
    check_same_grid(f, g_)
    grid, h = f.grid, f.grid.spacing
    a, b = f.samples, g_.samples
    lhs = l2(_J(s, a * b, grid), h)
    rhs = np.max(np.abs(a)) * l2(_J(s, b, grid), h) + np.max(np.abs(b)) * l2(_J(s, a, grid), h)
    return RatioReport("leibniz", (RatioCase.make(index, f"s={s:g}", lhs, rhs),))


# -- suites ----------------------------------------------------------------------

INTERPOLATION_CASES = ((1.0, 1.0, 0.5), (0.5, 2.0, 1.0 / 3.0), (2.0, 1.0, 2.0 / 3.0))
INTERPOLATION_FULL_CASES = ((1.0, 0.0, 0.0, 1.0, 0.5), (2.0, 0.5, 0.5, 2.0, 0.25), (1.0, 1.0, 0.0, 2.0, 0.75))
SMOOTHNESS_ORDERS = (0.5, 1.0, 1.5)


def expansion_symbols(params: ModelParams) -> tuple:
    return (J_symbol(0.5), p_symbol(params), omega_prime_symbol(params))


def _relabel(rep: RatioReport, prefix: str) -> RatioReport:
    return replace(rep, cases=tuple(replace(c, label=f"{prefix}|{c.label}") for c in rep.cases))


def _suite_tasks(battery: TestBattery, params: ModelParams) -> list:
    """(lemma, thunk) pairs in a fixed order."""
    fs = battery.functions
    tasks = []
    for Q in expansion_symbols(params):
        for w in battery.weights:
            for i, f in enumerate(fs):
                for k in (1, 2):
                    tasks.append((f"commutator_expansion_k{k}",
                                  (lambda Q=Q, w=w, f=f, k=k, i=i:
                                   _relabel(check_commutator_expansion(Q, w, f, k), f"f{i}"))))
    for i, f in enumerate(fs):
        for a, b, th in INTERPOLATION_CASES:
            tasks.append(("interpolation", lambda f=f, a=a, b=b, th=th, i=i:
                          _relabel(check_interpolation(f, a, b, th), f"f{i}")))
        for a, b, c, d, th in INTERPOLATION_FULL_CASES:
            tasks.append(("interpolation_full", lambda f=f, a=a, b=b, c=c, d=d, th=th, i=i:
                          _relabel(check_interpolation_full(f, a, b, c, d, th), f"f{i}")))
        tasks.append(("gns", lambda f=f, i=i: _relabel(check_gns(f), f"f{i}")))
    pairs = [(i, (i + 1) % len(fs)) for i in range(len(fs))]
    for i, j in pairs:
        for s in SMOOTHNESS_ORDERS:
            tasks.append(("kato_ponce", lambda i=i, j=j, s=s:
                          _relabel(check_kato_ponce(fs[i], fs[j], s), f"f{i},f{j}")))
            tasks.append(("leibniz", lambda i=i, j=j, s=s:
                          _relabel(check_leibniz(fs[i], fs[j], s), f"f{i},f{j}")))
    return tasks


_P2_ONLY = ("exercised only at p = p2 = p3 = 2 with p1 = p4 = infinity (grid maxima); "
            "other exponent splittings 1/p = 1/p1 + 1/p2 are untested",)
LEMMA_NOTES = {"kato_ponce": _P2_ONLY, "leibniz": _P2_ONLY}

LEMMAS = (
    "commutator_expansion_k1",
    "commutator_expansion_k2",
    "interpolation",
    "interpolation_full",
    "gns",
    "kato_ponce",
    "leibniz",
)


def run_suite(battery: TestBattery, params: ModelParams = ModelParams(1.0), threads: int = 1) -> dict:
    """All lemma reports for one battery; case order is fixed by task index."""
    tasks = _suite_tasks(battery, params)
    if threads <= 1:
        results = [t() for _, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: t[1](), tasks))
    grouped = {name: [] for name in LEMMAS}
    for (name, _), rep in zip(tasks, results):
        grouped[name].extend(rep.cases)
    return {
        name: RatioReport(name, tuple(replace(c, index=i) for i, c in enumerate(cases)), notes=LEMMA_NOTES.get(name, ()))
        for name, cases in grouped.items()
    }


def run_suite_with_refinement(
    battery: TestBattery, params: ModelParams = ModelParams(1.0), threads: int = 1
) -> dict:
    """Reports on the battery grid with refinement factors against ``2N``."""
    base = run_suite(battery, params, threads)
    fine = run_suite(battery.refined(), params, threads)
    return {name: rep.with_refinement(fine[name]) for name, rep in base.items()}


def remainder_shrinks(reports: dict) -> list:
    """Per-case ``||R_2|| < ||R_1||`` flags (cases are aligned by construction)."""
    r1 = reports["commutator_expansion_k1"].cases
    r2 = reports["commutator_expansion_k2"].cases
    return [b.lhs < a.lhs for a, b in zip(r1, r2)]


def gns_dilation_pair(spec: FunctionSpec, grid: Grid, lam: float) -> tuple:
    """GNS ratios of ``f`` on ``grid`` and of ``f(lam x)`` on the co-dilated grid."""
    g2 = Grid(grid.n_points, grid.length / lam)
    r1 = check_gns(RealField.from_function(grid, spec)).max_ratio
    r2 = check_gns(RealField.from_function(g2, spec.dilated(lam))).max_ratio
    return r1, r2
