"""Adaptive Smolyak pseudospectral approximation of black-box functions."""

from .adaptive import (
    AdaptiveState,
    IndicatorKind,
    IndicatorVariant,
    TerminationPolicy,
    global_indicator,
    initial_state,
    local_indicator,
    run_adaptive,
    select_and_refine,
    work_indicator,
)
from .basis import DomainError, PolynomialFamily, eval_basis, eval_basis_all
from .evalcache import EvalCache, ModelEvaluationError
from .expansion import MonteCarloError, PolynomialExpansion, axpy, l2_norm, mc_l2_error
from .genz import GenzInstance, GenzKind, genz_eval, genz_sample
from .multiindex import (
    MultiIndexSet,
    backward_neighbors,
    forward_neighbors,
    full_tensor_set,
    is_admissible,
    is_admissible_with,
    smolyak_coefficients,
    total_order_set,
)
from .quadrature import QuadratureFamily, QuadratureKind, exactness, growth, integrate, make_rule, tensor_rule
from .smolyak import (
    SmolyakSpec,
    aliasing_report,
    direct_quadrature,
    smolyak_pseudospectral,
    smolyak_pseudospectral_matrix,
    smolyak_quadrature,
    smolyak_range,
)
from .tensorop import TensorPseudospectralSpec, tensor_pseudospectral

__all__ = [
    "AdaptiveState",
    "DomainError",
    "EvalCache",
    "GenzInstance",
    "GenzKind",
    "IndicatorKind",
    "IndicatorVariant",
    "ModelEvaluationError",
    "MonteCarloError",
    "MultiIndexSet",
    "PolynomialExpansion",
    "PolynomialFamily",
    "QuadratureFamily",
    "QuadratureKind",
    "SmolyakSpec",
    "TensorPseudospectralSpec",
    "TerminationPolicy",
    "aliasing_report",
    "axpy",
    "backward_neighbors",
    "direct_quadrature",
    "eval_basis",
    "eval_basis_all",
    "exactness",
    "forward_neighbors",
    "full_tensor_set",
    "genz_eval",
    "genz_sample",
    "global_indicator",
    "growth",
    "initial_state",
    "integrate",
    "is_admissible",
    "is_admissible_with",
    "l2_norm",
    "local_indicator",
    "make_rule",
    "mc_l2_error",
    "run_adaptive",
    "select_and_refine",
    "smolyak_coefficients",
    "smolyak_pseudospectral",
    "smolyak_pseudospectral_matrix",
    "smolyak_quadrature",
    "smolyak_range",
    "tensor_pseudospectral",
    "tensor_rule",
    "total_order_set",
    "work_indicator",
]

__version__ = "0.1.0"
