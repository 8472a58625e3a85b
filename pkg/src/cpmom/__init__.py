"""Moments of moments of characteristic polynomials of Haar-random
symplectic and even orthogonal matrices, with the matching L-function
moment predictions.

Three independent evaluation routes are provided and cross-validated:
Monte Carlo over sampled spectra, exact finite-size residue computation,
and asymptotic leading-order coefficients.
"""

from .core import (
    ConfigurationVector,
    Family,
    GroupSpec,
    MomOrder,
    NumericFailure,
    combinatorial_coefficient,
    enumerate_configurations,
    leading_exponent,
    pairing_sets,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationVector",
    "Family",
    "GroupSpec",
    "MomOrder",
    "NumericFailure",
    "combinatorial_coefficient",
    "enumerate_configurations",
    "leading_exponent",
    "pairing_sets",
    "__version__",
]
