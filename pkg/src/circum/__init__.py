"""circum: dynamics of maps whose Julia sets live on circles.

The package follows one thread: rational and exponential-sum maps for which
backward orbits, preimage sets, or whole Julia sets line up on circlines of
the Riemann sphere.  `algebra` supplies the sphere arithmetic, `sphere` the
circline fitting, `expsum` the zero location for exponential sums and the
exceptional quotient family, `dynamics` the sampling and linearization
tools, and `growth` the order-of-growth estimates that separate the rational
from the transcendental regime.
"""

from .algebra import (
    INF,
    CircumError,
    DegreeCapExceeded,
    Mobius,
    Polynomial,
    RationalMap,
    RootConvergenceError,
    chordal,
    is_inf,
    poly_roots,
)
from .dynamics import (
    IntervalCriterionReport,
    JuliaSampleConfig,
    KoenigsChart,
    NoRepellingFixedPointError,
    blaschke_halfplane_check,
    chebyshev_conjugacy_check,
    escape_render,
    interval_criterion,
    julia_sample,
    koenigs_chart,
    koenigs_coordinate,
    line_invariance_check,
    poincare_eval,
    repelling_fixed_point,
    repelling_fixed_points,
)
from .expsum import (
    CaseVerdict,
    ContourError,
    ExceptionalParams,
    ExpSum,
    OverflowGuardError,
    ZeroReport,
    circle_case_classifier,
    count_zeros_rect,
    exceptional_eval,
    exceptional_preimage_equation,
    expsum_derivative,
    expsum_eval,
    locate_zeros_rect,
    real_symmetry_phase,
)
from .growth import (
    GrowthProfile,
    ahlfors_shimizu_T,
    ahlfors_shimizu_T_with_error,
    order_estimate,
    spherical_derivative,
)
from .rng import Xorshift
from .sphere import (
    Circline,
    FitReport,
    PointCloud,
    circline_through,
    fit_circline,
    from_sphere,
    image_of_real_line,
    is_contained_in_circline,
    to_sphere,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "INF",
    "CircumError",
    "DegreeCapExceeded",
    "RootConvergenceError",
    "NoRepellingFixedPointError",
    "OverflowGuardError",
    "ContourError",
    "is_inf",
    "chordal",
    "Polynomial",
    "poly_roots",
    "Mobius",
    "RationalMap",
    "Circline",
    "PointCloud",
    "FitReport",
    "to_sphere",
    "from_sphere",
    "fit_circline",
    "circline_through",
    "is_contained_in_circline",
    "image_of_real_line",
    "ExpSum",
    "ExceptionalParams",
    "ZeroReport",
    "CaseVerdict",
    "expsum_eval",
    "expsum_derivative",
    "count_zeros_rect",
    "locate_zeros_rect",
    "real_symmetry_phase",
    "exceptional_eval",
    "exceptional_preimage_equation",
    "circle_case_classifier",
    "JuliaSampleConfig",
    "KoenigsChart",
    "IntervalCriterionReport",
    "repelling_fixed_point",
    "repelling_fixed_points",
    "julia_sample",
    "koenigs_chart",
    "poincare_eval",
    "koenigs_coordinate",
    "line_invariance_check",
    "interval_criterion",
    "chebyshev_conjugacy_check",
    "blaschke_halfplane_check",
    "escape_render",
    "GrowthProfile",
    "spherical_derivative",
    "ahlfors_shimizu_T",
    "ahlfors_shimizu_T_with_error",
    "order_estimate",
    "Xorshift",
]
