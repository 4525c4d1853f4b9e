"""Computable intrinsic-graph machinery for sub-Riemannian Heisenberg groups."""

from .group import (
    HorizontalControl,
    Point,
    dilate,
    flow_horizontal,
    homogeneous_dimension,
    identity,
    inverse,
    multiply,
)
from .metrics import (
    INFINITY,
    KORANYI,
    CcParams,
    Metric,
    cc_upper,
    distance,
    equivalence_constants,
    norm,
)
from .splitting import (
    Cone,
    Splitting,
    cone_contains,
    norm_splitting_constant,
    project,
    projection_identities_check,
)
from .graph import (
    Axis,
    Grid,
    LipReport,
    SampledFunction,
    VOrientedFunction,
    classify_stepanov,
    graph_point,
    graph_quasidistance,
    graphmap_metric_lip_profile,
    lipschitz_constant,
    pointwise_lip_profile,
    translate_function,
)
from .diff import (
    DiffEstimate,
    IntrinsicLinearMap,
    TangentSubgroup,
    estimate_differential,
    pansu_quotient,
    pansu_schedule,
    tangent_subgroup,
    verify_cone_characterization,
)
from .extension import (
    ConeBoundary,
    ExtensionResult,
    LipschitzBudgetError,
    mcshane_extend,
    sandwich_harness,
)
from .measure import (
    AhlforsProfile,
    DensityProfile,
    MeasureEstimate,
    ahlfors_profile,
    density_profile,
    pushforward_ball_measure,
)
from .builtins import REGISTRY, list_builtins, make_callable, make_sampled

__version__ = "0.1.0"
