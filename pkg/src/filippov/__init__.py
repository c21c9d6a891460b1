"""Indices of singularities of planar and surface Filippov vector fields."""

from .core import (
    PlanarFilippovField,
    Rect,
    SigmaClassification,
    SigmaTag,
    Singularity,
    SingularityKind,
    classify_sigma_point,
    find_singularities,
    lie_derivative,
    sliding_field,
)
from .expr import Jet, ScalarExpr, VectorFieldExpr, eval_jet, eval_vec, parse_scalar, parse_vector
from .manifold import (
    ManifoldField,
    index_at_manifold_singularity,
    poincare_hopf_check,
    pushforward,
    sphere_field,
    torus_field,
)
from .regularization import (
    RegularizedField,
    TransitionFunction,
    check_invariance,
    eval_regularized,
    regularized_index,
)
from .winding import (
    ArcSpec,
    SweepResult,
    ball_index,
    corner_H,
    corner_sweep,
    filippov_index_on_ball,
    index_at_singularity,
    sweep_along_arc,
    verify_perturbation_bounds,
)

__version__ = "0.1.0"
