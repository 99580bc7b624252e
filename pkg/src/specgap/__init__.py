"""Spectra of generally correlated Gaussian Gram matrices.

Deterministic-equivalent fixed-point solvers, spectral-density recovery
with gap detection at zero, and Monte Carlo verification that empirical
spectra respect the deterministic support.
"""

from .model import (
    CorrelationEnsemble,
    build_exponential,
    build_identity,
    ensemble_from_config,
    from_matrices,
    hermitian_sqrt,
    validate,
)
from .solver import (
    FixedPointSolution,
    ZeroSolution,
    jacobian_at_zero,
    m_of_z,
    phi,
    solve_at_zero,
    solve_deltas,
)
from .spectrum import (
    DensityCurve,
    SupportReport,
    density,
    detect_support,
    first_moment,
    mass_check,
)
from .sampler import (
    ScalingReport,
    TrialBatch,
    VarianceCheck,
    bias_scaling,
    gram_eigenvalues,
    monte_carlo_gap,
    sample_matrix,
    variance_scaling,
)
from .algebra import (
    PositiveSystemWitness,
    hadamard_dominance,
    positive_system_bound,
    spectral_radius,
    trace_jensen_gap,
)

__all__ = [
    "CorrelationEnsemble",
    "DensityCurve",
    "FixedPointSolution",
    "PositiveSystemWitness",
    "ScalingReport",
    "SupportReport",
    "TrialBatch",
    "VarianceCheck",
    "ZeroSolution",
    "bias_scaling",
    "build_exponential",
    "build_identity",
    "density",
    "detect_support",
    "ensemble_from_config",
    "first_moment",
    "from_matrices",
    "gram_eigenvalues",
    "hadamard_dominance",
    "hermitian_sqrt",
    "jacobian_at_zero",
    "m_of_z",
    "mass_check",
    "monte_carlo_gap",
    "phi",
    "positive_system_bound",
    "sample_matrix",
    "solve_at_zero",
    "solve_deltas",
    "spectral_radius",
    "trace_jensen_gap",
    "validate",
    "variance_scaling",
]

__version__ = "0.1.0"
