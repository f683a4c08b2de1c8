"""Fractional contact-model correlation solver."""

from ._core import (
    ConfigError,
    ConvergenceError,
    DomainError,
    Error,
    IoError,
    MismatchError,
    OverflowError,
    beta_identity_residual,
    bound_report,
    correlation_bound,
    djrbashian_identity_residual,
    gamma,
    mittag_leffler,
    regime,
    rgamma,
    run_bounds,
    run_solve,
    run_verify,
    set_thread_count,
    solve,
    thread_count,
    verify_checks,
    wright,
    wright_moment,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "Error",
    "IoError",
    "MismatchError",
    "OverflowError",
    "beta_identity_residual",
    "bound_report",
    "correlation_bound",
    "djrbashian_identity_residual",
    "gamma",
    "mittag_leffler",
    "regime",
    "rgamma",
    "run_bounds",
    "run_solve",
    "run_verify",
    "set_thread_count",
    "solve",
    "thread_count",
    "verify_checks",
    "wright",
    "wright_moment",
]
