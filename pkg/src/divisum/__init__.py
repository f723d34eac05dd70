"""Exact and asymptotic computation of divisor-function statistics.

Four layers: :mod:`divisum.sieve` builds exact pointwise tables of mu, d,
d_k, and d^2; :mod:`divisum.summatory` evaluates their prefix sums both by
sieving and by sublinear floor-quotient algorithms; :mod:`divisum.asymptotic`
provides the closed-form main terms, certifies every error envelope
numerically, and recovers the log-polynomial coefficients of the divisor
mean square by least squares; :mod:`divisum.cli` fronts it all from the
command line.
"""

from .asymptotic import (
    EULER_GAMMA,
    INV_PI_SQUARED,
    SIX_OVER_PI_SQUARED,
    AsymptoticModel,
    ConditioningError,
    EnvelopeReport,
    EnvelopeSample,
    FitReport,
    divisor_main,
    envelope,
    fit_log_poly,
    geometric_samples,
    harmonic_log_main,
    harmonic_log_sum,
    mean_square_main,
    mobius_tail,
)
from .tables import (
    DIVISOR,
    DIVISOR_SQUARED,
    MOBIUS,
    ArithmeticTable,
    CoverageError,
    FunctionKind,
    SizingError,
    convolution_check,
    divisor_k,
    iter_sieve_segments,
    sieve,
    verify_convolution_range,
    write_table_csv,
)
from .summatory import (
    FloorQuotients,
    SummatoryValue,
    d4_summatory,
    divisor_summatory_hyperbola,
    dk_summatory_recursive,
    floor_quotients,
    mean_square_summatory,
    summatory_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "ArithmeticTable",
    "AsymptoticModel",
    "ConditioningError",
    "CoverageError",
    "DIVISOR",
    "DIVISOR_SQUARED",
    "EULER_GAMMA",
    "EnvelopeReport",
    "EnvelopeSample",
    "FitReport",
    "FloorQuotients",
    "FunctionKind",
    "INV_PI_SQUARED",
    "MOBIUS",
    "SIX_OVER_PI_SQUARED",
    "SizingError",
    "SummatoryValue",
    "convolution_check",
    "d4_summatory",
    "divisor_k",
    "divisor_main",
    "divisor_summatory_hyperbola",
    "dk_summatory_recursive",
    "envelope",
    "fit_log_poly",
    "floor_quotients",
    "geometric_samples",
    "harmonic_log_main",
    "harmonic_log_sum",
    "iter_sieve_segments",
    "mean_square_main",
    "mean_square_summatory",
    "mobius_tail",
    "sieve",
    "summatory_oracle",
    "verify_convolution_range",
    "write_table_csv",
]
