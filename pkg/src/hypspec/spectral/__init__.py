"""Finite-element Laplacian and eigensolver."""

from .convergence import ConvergenceReport, convergence_study, observed_order, richardson
from .operator import BC, DiscreteOperator, assemble, cotan_weights, rayleigh_quotient
from .solver import (
    SpectralError,
    SpectralResult,
    cluster_indices,
    lowest_eigenpairs,
    m_orthogonality_error,
    residuals,
    ritz_values,
    write_csv,
)
