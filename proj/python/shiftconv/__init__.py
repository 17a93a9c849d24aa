"""Shifted convolution sums of d3 and normalized tau."""

from ._core import (  # noqa: F401
    AccuracyError,
    ArithmeticTables,
    DegenerateFamily,
    InfeasibleRange,
    InvalidArgument,
    ModulusFamily,
    OutOfRange,
    ResourceError,
    build_modulus_family,
    choose_parameters,
    compute_tau,
    d3_charsum,
    d_smooth,
    d_tilde,
    d_tilde_alpha,
    i_tilde,
    kloosterman,
    l2_discrepancy,
    psi_direct,
    s_dagger,
    s_dagger_prime,
    s_star,
    set_thread_count,
    sieve_d3,
    verify_gl2,
    verify_gl3,
)

__version__ = "0.1.0"
