"""Group averaging, the mean-square deviation statistic and step projection."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import GroupedObservations, NoisySampleSet, UniformGrid, _frozen_array, validate
from .errors import (
    GroupCountError,
    IndivisibleError,
    LengthMismatchError,
    QuadratureError,
    ValidationError,
)

log = logging.getLogger(__name__)

TAU_QUAD = 1e-10
SIMPSON_START = 64
SIMPSON_MAX_DOUBLINGS = 12


@dataclass(frozen=True)
class StepFunction:
    coarse_grid: UniformGrid
    interval_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "interval_values", _frozen_array(self.interval_values))
        if self.interval_values.shape != (self.coarse_grid.node_count,):
            raise LengthMismatchError("interval_values length must equal the interval count")

    def __call__(self, x):
        """Piecewise-constant extension, right-continuous at interior knots."""
        return self.interval_values[interval_index(x, self.coarse_grid.node_count)]


def interval_index(x, M: int) -> np.ndarray:
    """Index ``i`` with ``x`` in ``[i/M, (i+1)/M)``; ``x = 1`` maps to ``M - 1``."""
    nodes = np.arange(M + 1) / M
    idx = np.searchsorted(nodes, np.asarray(x, dtype=float), side="right") - 1
    return np.clip(idx, 0, M - 1)


def _group_size(L: int, M: int, truncate: bool, min_groups: int = 3) -> int:
    if M < min_groups:
        raise GroupCountError(f"need at least {min_groups} groups, got {M}")
    if M > L:
        raise GroupCountError(f"cannot form {M} groups from {L} samples")
    rem = L % M
    if rem:
        if not truncate:
            raise IndivisibleError(f"L = {L} is not divisible by M = {M}")
        log.warning("dropping the trailing %d samples so that M = %d divides L", rem, M)
    return L // M


def group_samples(samples: NoisySampleSet, M: int, truncate: bool = False) -> GroupedObservations:
    """Average consecutive blocks of ``N = L / M`` samples.

    Group ``i`` (1-based) holds samples ``(i-1)N+1 .. iN``; the exact left
    endpoint sample belongs to no group.
    """
    problems = validate(samples)
    if problems:
        raise ValidationError("; ".join(problems))
    N = _group_size(samples.L, M, truncate)
    means = samples.values[: M * N].reshape(M, N).mean(axis=1)
    return GroupedObservations(
        coarse_grid=UniformGrid(M),
        group_size=N,
        group_means=means,
        left_endpoint_value=samples.left_endpoint_value,
        right_endpoint_value=samples.right_endpoint_value,
        noise_variance_original=samples.noise_variance,
    )


def exact_group_means(y: Callable, grid: UniformGrid, M: int, truncate: bool = False) -> np.ndarray:
    """Noise-free group means of ``y`` sampled at ``j / L``, ``j = 1..L``.

    Plain block means, so any ``M >= 1`` dividing ``L`` is accepted.
    """
    L = grid.node_count
    N = _group_size(L, M, truncate, min_groups=1)
    x = np.arange(1, M * N + 1) / L
    return np.asarray(y(x), dtype=float).reshape(M, N).mean(axis=1)


def delta_m_squared(grouped, exact) -> float:
    """Mean squared deviation ``(1/M) sum (Y~_i - Y_i)^2``."""
    noisy = grouped.group_means if isinstance(grouped, GroupedObservations) else np.asarray(grouped, float)
    exact = np.asarray(exact, dtype=float)
    if noisy.shape != exact.shape:
        raise LengthMismatchError(f"lengths differ: {noisy.shape} vs {exact.shape}")
    return float(np.mean((noisy - exact) ** 2))


def _simpson(values: np.ndarray, width: float) -> np.ndarray:
    # values: (..., 2m+1) samples over each panel of total `width`
    n = values.shape[-1] - 1
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return values @ w * (width / n / 3.0)


def interval_integrals(g: Callable, M: int, tol: float = TAU_QUAD, start: int = SIMPSON_START) -> np.ndarray:
    """Integrals of ``g`` over each ``[i/M, (i+1)/M]`` by refined composite Simpson.

    The panel count starts at ``start`` per interval and doubles until two
    successive interval averages differ by less than ``tol * max(1, |average|)``.
    """
    h = 1.0 / M
    nodes = np.arange(M + 1) / M
    left, right = nodes[:-1, None], nodes[1:, None]
    prev = None
    n = start
    for _ in range(SIMPSON_MAX_DOUBLINGS + 1):
        x = left + (right - left) * (np.arange(n + 1) / n)
        # endpoints one ulp inside so piecewise integrands are read on the right side
        x[:, 0] = np.nextafter(left[:, 0], 1.0)
        x[:, -1] = np.nextafter(right[:, 0], 0.0)
        vals = np.asarray(g(x), dtype=float)
        est = _simpson(vals, h)
        if prev is not None:
            if np.all(np.abs(est - prev) / h <= tol * np.maximum(1.0, np.abs(est) / h)):
                return est
        prev = est
        n *= 2
    raise QuadratureError(f"Simpson refinement did not reach tolerance {tol}")


def step_project(g: Callable, coarse_grid: UniformGrid, tol: float = TAU_QUAD) -> StepFunction:
    """Projection onto step functions: interval averages of ``g``."""
    M = coarse_grid.node_count
    return StepFunction(coarse_grid, interval_integrals(g, M, tol) * M)


def l2_norm(g: Callable, M: int = 1, tol: float = TAU_QUAD) -> float:
    """``||g||_{L^2(0,1)}`` with the same Simpson rule used by ``step_project``."""
    return float(np.sqrt(np.sum(interval_integrals(lambda x: np.asarray(g(x), float) ** 2, M, tol))))
