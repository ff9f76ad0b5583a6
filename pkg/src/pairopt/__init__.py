"""D-optimal approximate designs for paired comparisons with partial profiles."""

from .closed_form import (
    InfoSummary,
    SingularDesignError,
    h1,
    h2,
    h3,
    info_summary,
    lambda_poly,
    log_det_objective,
    one_way_brick,
    variance,
    variance_single_depth,
)
from .design_core import (
    DepthError,
    DesignProblem,
    InvariantDesign,
    ParameterLayout,
    make_uniform,
    mix,
    orbit_count,
    parameter_layout,
)
from .effects import (
    PairedComparison,
    Profile,
    difference_vector,
    enumerate_orbit,
    marginal_code,
    regression_vector,
)
from .estimator import PairDifferenceEncoder, PairedDesignOptimizer
from .optimizer import (
    CertificationError,
    KWCertificate,
    OptimalDesignResult,
    kw_certificate,
    optimal_depth,
    optimal_depth_first_order,
    optimal_depth_main,
    optimal_depth_second_order,
    optimize_full,
    solve_on_support,
)

__version__ = "0.1.0"
