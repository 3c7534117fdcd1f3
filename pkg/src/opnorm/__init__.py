"""Operator norms ``||A||_{p->q}`` of matrices and of random matrices.

``norms`` brackets a fixed matrix's norm, ``randmat`` describes and samples
entry laws, ``predict`` evaluates two-sided formulas for the expected norm of
an iid random matrix, and ``experiment`` compares the two by Monte Carlo.
"""

from .norms import INF, NormBracket, bracket, conjugate, corner_norm, oracle_norm, parse_exponent
from .predict import PredictorValue, master_rhs
from .randmat import DistributionSpec, check_regularity, gaussian, rademacher, sample_matrix, tabulated, weibull

__version__ = "0.1.0"

__all__ = [
    "INF",
    "NormBracket",
    "bracket",
    "conjugate",
    "corner_norm",
    "oracle_norm",
    "parse_exponent",
    "PredictorValue",
    "master_rhs",
    "DistributionSpec",
    "check_regularity",
    "gaussian",
    "rademacher",
    "sample_matrix",
    "tabulated",
    "weibull",
]
