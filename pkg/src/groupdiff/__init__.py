"""Group-averaged Tikhonov differentiation of noisy samples on [0, 1]."""

from .bounds import (
    QuantileBound,
    bound_e,
    bound_ek,
    bound_rate,
    chi_upper_quantile_bound,
    coverage_probability,
)
from .core import (
    BoundInputs,
    FitConfig,
    GroupedObservations,
    NoisySampleSet,
    PiecewiseQuartic,
    UniformGrid,
    from_json,
    to_json,
    validate,
)
from .errors import GroupDiffError, NumericalError, ResourceGuardError, ValidationError
from .param_select import LCurve, alpha_from_cbar, lcurve_corner, lcurve_scan
from .preprocess import StepFunction, group_samples, step_project
from .solver import evaluate, fit, fit_alpha, interval_mean, objective, seminorm_sq

__version__ = "0.1.0"
