"""Schmidt-number certification from moments of the k-reduced operator."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    BipartiteDensity,
    CriterionVerdict,
    PureState,
    SchmidtVector,
    maximally_entangled,
    partial_trace,
    schmidt_decompose,
)
from .moments import best_lower_bound, certify_sn_ge, moment_criterion, reduction_moments  # noqa: F401
from .reduction import k_reduced_operator, reduction_criterion, reduction_negativity, theta_k  # noqa: F401
