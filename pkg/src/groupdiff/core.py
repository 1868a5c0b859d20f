"""Shared domain types.

All types are frozen dataclasses; array fields are stored as read-only
float64 arrays so instances can be shared freely. Every type round-trips
through JSON (``to_json`` / ``from_json``) with the field names used here.
Floats are written by :func:`json.dumps`, which emits the shortest decimal
that round-trips, so deserialization is bit-exact.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import ConfigError, DomainError, ValidationError

# Open interval for the quantile level: the chi-square bound needs p < 0.37.
P_MAX = 0.37

TAU_CONT = 1e-8
TAU_EL = 1e-6
TAU_SOLVE = 1e-10


def _frozen_array(values, ndim: int = 1) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class UniformGrid:
    """Uniform grid on [0, 1] with ``node_count`` intervals.

    Only the count is stored; nodes are produced as ``i / node_count`` on
    demand so that ``meshsize * node_count == 1`` holds exactly.
    """

    node_count: int

    @property
    def meshsize(self) -> Fraction:
        return Fraction(1, self.node_count)

    @property
    def h(self) -> float:
        return 1.0 / self.node_count

    def node(self, i: int) -> float:
        return i / self.node_count

    def nodes(self) -> np.ndarray:
        return np.arange(self.node_count + 1) / self.node_count

    def problems(self) -> list[str]:
        if not isinstance(self.node_count, (int, np.integer)) or isinstance(self.node_count, bool):
            return ["node_count must be an integer"]
        if self.node_count < 2:
            return ["node_count ≥ 2"]
        return []


@dataclass(frozen=True)
class NoisySampleSet:
    """Noisy observations on the fine grid.

    ``values[j-1]`` is the observation at ``j / L`` for ``j = 1..L``; the left
    endpoint ``x = 0`` is carried separately and is exact. Construction never
    raises on invariant breaches; use :func:`validate` to list them.
    """

    grid: UniformGrid
    values: np.ndarray
    left_endpoint_value: float
    right_endpoint_value: float
    noise_variance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "left_endpoint_value", float(self.left_endpoint_value))
        object.__setattr__(self, "right_endpoint_value", float(self.right_endpoint_value))
        if self.noise_variance is not None:
            object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def L(self) -> int:
        return self.grid.node_count


@dataclass(frozen=True)
class GroupedObservations:
    coarse_grid: UniformGrid
    group_size: int
    group_means: np.ndarray
    left_endpoint_value: float
    right_endpoint_value: float
    noise_variance_original: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "group_means", _frozen_array(self.group_means))
        object.__setattr__(self, "left_endpoint_value", float(self.left_endpoint_value))
        object.__setattr__(self, "right_endpoint_value", float(self.right_endpoint_value))
        if self.noise_variance_original is not None:
            object.__setattr__(self, "noise_variance_original", float(self.noise_variance_original))
        M = self.coarse_grid.node_count
        if M <= 2:
            raise ValidationError(f"need M > 2 groups, got {M}")
        if self.group_size < 1:
            raise ValidationError(f"group_size must be positive, got {self.group_size}")
        if self.group_means.shape != (M,):
            raise ValidationError(
                f"group_means has length {self.group_means.size}, expected M = {M}"
            )

    @property
    def M(self) -> int:
        return self.coarse_grid.node_count

    @property
    def N(self) -> int:
        return self.group_size


@dataclass(frozen=True)
class PiecewiseQuartic:
    """Piecewise quartic on a uniform coarse grid.

    Row ``i`` of ``coefficients`` holds ``(a, b, c, d, e)`` of the local
    expansion ``a + b t + c t^2 + d t^3 + e t^4`` with ``t = x - x_i`` on
    ``[x_i, x_{i+1})``.
    """

    coarse_grid: UniformGrid
    coefficients: np.ndarray
    alpha_used: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen_array(self.coefficients, ndim=2))
        object.__setattr__(self, "alpha_used", float(self.alpha_used))
        if self.coefficients.shape != (self.coarse_grid.node_count, 5):
            raise ValidationError(
                f"coefficients shape {self.coefficients.shape} does not match "
                f"({self.coarse_grid.node_count}, 5)"
            )
        if not self.alpha_used > 0:
            raise ValidationError("alpha_used must be positive")

    @property
    def M(self) -> int:
        return self.coarse_grid.node_count

    def __call__(self, x, order: int = 0):
        from .solver import evaluate

        return evaluate(self, x, order)


@dataclass(frozen=True)
class FitConfig:
    """Fit settings.

    Either ``alpha`` is given directly, or all of ``c_bar``, ``sigma2`` and
    ``N`` are, in which case ``alpha = c_bar * sigma2 / N``.
    """

    k: int = 2
    alpha: float | None = None
    c_bar: float | None = None
    sigma2: float | None = None
    N: int | None = None
    quantile_level: float = 0.05
    solver: str = "reduced"
    tau_cont: float = TAU_CONT
    tau_el: float = TAU_EL
    tau_solve: float = TAU_SOLVE

    def __post_init__(self):
        if self.k != 2:
            raise ConfigError("only k = 2 is supported")
        if self.solver not in ("reduced", "full_kkt"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if not 0 < self.quantile_level < P_MAX:
            raise DomainError(f"quantile level must lie in (0, {P_MAX}), got {self.quantile_level}")
        if self.alpha is not None:
            if not self.alpha > 0:
                raise ConfigError("alpha must be positive")
        else:
            if self.c_bar is None or self.sigma2 is None or self.N is None:
                raise ConfigError("give alpha, or all of c_bar, sigma2 and N")
            if not (self.c_bar > 0 and self.sigma2 > 0 and self.N > 0):
                raise ConfigError("c_bar, sigma2 and N must be positive")
        for name in ("tau_cont", "tau_el", "tau_solve"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    def resolve_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        return self.c_bar * self.sigma2 / self.N


@dataclass(frozen=True)
class BoundInputs:
    """Inputs to the error-bound formulas that are not determined by the data.

    ``Q`` bounds ``||f'||`` over the solution class of interest and ``C1``,
    ``C2`` are the constants of the rate estimate; all three are supplied by
    the caller.
    """

    Q: float
    y_k_norm: float
    C1: float
    C2: float
    sigma2: float
    M: int
    N: int
    p: float

    def __post_init__(self):
        for name in ("Q", "y_k_norm", "C1", "C2", "sigma2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")
        if self.M < 2:
            raise DomainError("M must be at least 2")
        if self.N < 1:
            raise DomainError("N must be positive")
        if not 0 < self.p < P_MAX:
            raise DomainError(f"p must lie in (0, {P_MAX}), got {self.p}")


def validate(sample_set: NoisySampleSet) -> list[str]:
    """Return the invariants violated by ``sample_set`` (empty when valid)."""
    problems = sample_set.grid.problems()
    if problems:
        return problems
    L = sample_set.grid.node_count
    if sample_set.values.shape != (L,):
        problems.append(f"values length {sample_set.values.size} != node_count {L}")
    elif sample_set.values[-1] != sample_set.right_endpoint_value:
        problems.append("endpoint mismatch: values[L] != right_endpoint_value")
    if not np.all(np.isfinite(sample_set.values)):
        problems.append("values contain non-finite entries")
    nv = sample_set.noise_variance
    if nv is not None and not nv >= 0:
        problems.append("noise_variance must be nonnegative")
    return problems


# --- JSON -------------------------------------------------------------------

_TYPES = {
    cls.__name__: cls
    for cls in (UniformGrid, NoisySampleSet, GroupedObservations, PiecewiseQuartic, FitConfig, BoundInputs)
}


def to_dict(obj) -> dict[str, Any]:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if dataclasses.is_dataclass(v):
            v = to_dict(v)
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, np.integer):
            v = int(v)
        out[f.name] = v
    if isinstance(obj, PiecewiseQuartic):
        out["M"] = obj.M
    return out


def from_dict(cls, data: dict[str, Any]):
    names = {f.name for f in dataclasses.fields(cls)}
    extra = set(data) - names
    if cls is PiecewiseQuartic:
        extra.discard("M")
    if extra:
        raise ValidationError(f"unknown keys for {cls.__name__}: {sorted(extra)}")
    kwargs = dict((k, v) for k, v in data.items() if k in names)
    for key in ("grid", "coarse_grid"):
        if key in kwargs and isinstance(kwargs[key], dict):
            kwargs[key] = from_dict(UniformGrid, kwargs[key])
    obj = cls(**kwargs)
    if cls is PiecewiseQuartic and "M" in data and data["M"] != obj.M:
        raise ValidationError("M does not match coarse_grid.node_count")
    return obj


def to_json(obj) -> str:
    return json.dumps({"type": type(obj).__name__, **to_dict(obj)}, allow_nan=False)


def from_json(text: str):
    data = json.loads(text)
    name = data.pop("type", None)
    if name not in _TYPES:
        raise ValidationError(f"unknown or missing type tag {name!r}")
    return from_dict(_TYPES[name], data)
