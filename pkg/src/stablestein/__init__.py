"""Heavy-tailed stable laws, their generators, and CLT error bounds.

Subpackages:

* :mod:`stablestein.stable`  — laws, densities, sampling;
* :mod:`stablestein.fracops` — fractional generator and characterising operator;
* :mod:`stablestein.stein`   — test-function classes, equation solver, residuals;
* :mod:`stablestein.metrics` — Kolmogorov and smoothed-Wasserstein distances;
* :mod:`stablestein.gclt`    — domains of attraction, normalised sums;
* :mod:`stablestein.bounds`  — computable convergence-rate bounds and slope fits.
"""

from .errors import NumericalFailure
from .stable import (
    StableParams,
    QuadratureConfig,
    LevyMeasure,
    d_alpha,
    char_exponent,
    pdf,
    cdf,
    cdf_many,
    sample,
    tail_asymptote,
    sup_density,
)
from .stein import (
    TestFunctionHBeta,
    clamped_identity,
    clamped_power,
    gaussian_bump,
    d_beta,
    expected_h,
    ou_sample,
    qt_apply,
    solve_f,
    solve_f_prime,
    residual,
    regularity_probe,
)

__all__ = [
    "NumericalFailure",
    "StableParams",
    "QuadratureConfig",
    "LevyMeasure",
    "d_alpha",
    "char_exponent",
    "pdf",
    "cdf",
    "cdf_many",
    "sample",
    "tail_asymptote",
    "sup_density",
    "TestFunctionHBeta",
    "clamped_identity",
    "clamped_power",
    "gaussian_bump",
    "d_beta",
    "expected_h",
    "ou_sample",
    "qt_apply",
    "solve_f",
    "solve_f_prime",
    "residual",
    "regularity_probe",
]

__version__ = "0.1.0"
