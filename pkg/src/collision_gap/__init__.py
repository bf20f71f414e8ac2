"""Spectral gaps of binary collision Markov generators.

Exact generators on enumerated finite state spaces (disordered and colored
exclusion, biased random transpositions), quadrature-based generators for the
Kac walk and the flat Kac model, and checks of the reduction bounds that tie
the N-component gap to the three-component one.
"""

from .errors import (
    CollisionGapError,
    ConvergenceError,
    DomainError,
    EmptySpaceError,
    EstimationError,
    FitWindowError,
    InvalidPairError,
    ModelError,
    ReducibleError,
    ShapeError,
    SpecParseError,
    UnsupportedVariantError,
)
from .generator import (
    CollisionGenerator,
    PairOperator,
    build_average_generator,
    build_colored_generator,
    build_exclusion_generator,
    build_generator,
    conditional_expectation_operator,
    dirichlet_form,
    p_matrix_three_site,
)
from .models import (
    ConfigurationSpace,
    ModelSpec,
    StationaryMeasure,
    Variant,
    enumerate_space,
    load_spec,
    occupancy_projection,
    stationary_measure,
)
from .spectra import GapOverOmega, SpectrumReport, h0_decomposition, min_gap_over_omega, spectral_gap, variational_check
from .theorems import BoundReport, clique4_bound, det_p_formula, reduction_bound

__version__ = "0.1.0"
