"""Grids, transforms, Fourier symbols and multipliers for the ILW equation."""
from .grid import (
    BOUNDARY_WARN_LEVEL,
    BoundaryMassWarning,
    Grid,
    GridMismatchError,
    RealField,
    SpectralField,
    boundary_mass_fraction,
    build_grid,
    check_same_grid,
    guard_boundary,
    inverse_transform,
    japanese_bracket,
    transform,
    weighted_norm,
)
from .operators import (
    D_multiplier,
    J_multiplier,
    L_multiplier,
    Multiplier,
    T_delta_multiplier,
    apply_D,
    apply_dx,
    apply_hilbert,
    apply_J,
    apply_L,
    apply_multiplier,
    apply_p,
    apply_q,
    apply_T_delta,
    dx_multiplier,
    dx_T_multiplier,
    hilbert_multiplier,
    identity_multiplier,
    linear_ilw_multiplier,
    omega_prime_multiplier,
    p_multiplier,
    q_multiplier,
)
from .oracle import quadrature_T_oracle
from .symbols import (
    SERIES_THRESHOLD,
    ModelParams,
    clamped_count,
    symbol_coth,
    symbol_dx_T,
    symbol_L,
    symbol_omega,
    symbol_omega_prime,
    symbol_p,
    symbol_q,
)
