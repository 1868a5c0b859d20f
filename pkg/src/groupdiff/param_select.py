"""Regularization parameter: the ``alpha = c_bar sigma^2 / N`` rule and L-curve choice of ``c_bar``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import GroupedObservations, PiecewiseQuartic
from .errors import (
    DomainError,
    GridMismatchError,
    GroupDiffError,
    NoCornerWarning,
    TooFewPointsError,
    ValidationError,
)
from .solver import fit_alpha, interval_means, seminorm_sq

MIN_CORNER_POINTS = 5
COLLINEAR_SINE = 1e-10


def alpha_from_cbar(c_bar: float, sigma2: float, N: int) -> float:
    if not (c_bar > 0 and sigma2 > 0 and N > 0):
        raise DomainError("c_bar, sigma2 and N must all be positive")
    return c_bar * sigma2 / N


def default_cbar_grid(n: int = 50, lo: float = 1e-4, hi: float = 10.0) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


def residual(f: PiecewiseQuartic, grouped: GroupedObservations) -> float:
    """Root mean square misfit between group means and interval means of ``f``."""
    if f.M != grouped.M:
        raise GridMismatchError(f"fit has M = {f.M}, data has M = {grouped.M}")
    return float(np.sqrt(np.mean((grouped.group_means - interval_means(f)) ** 2)))


@dataclass(frozen=True)
class LCurvePoint:
    c_bar: float
    alpha: float
    log_penalty: float
    log_residual: float


@dataclass(frozen=True)
class LCurve:
    points: tuple[LCurvePoint, ...]
    chosen_index: int | None = None
    penalty_order: int = 1

    def __post_init__(self):
        cb = [pt.c_bar for pt in self.points]
        if any(b <= a for a, b in zip(cb, cb[1:])):
            raise ValidationError("c_bar must be strictly increasing along the curve")
        if self.chosen_index is not None and not 0 <= self.chosen_index < len(self.points):
            raise ValidationError("chosen_index out of range")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points])

    def to_csv(self) -> str:
        lines = ["c_bar,alpha,log_penalty,log_residual,chosen"]
        for i, pt in enumerate(self.points):
            chosen = int(i == self.chosen_index)
            lines.append(f"{pt.c_bar!r},{pt.alpha!r},{pt.log_penalty!r},{pt.log_residual!r},{chosen}")
        return "\n".join(lines) + "\n"


def _safe_log(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def lcurve_scan(
    grouped: GroupedObservations,
    sigma2: float,
    cbar_grid=None,
    penalty_order: int = 1,
    solver: str = "reduced",
) -> LCurve:
    """Fit once per ``c_bar`` and record ``(log ||f^(order)||^2, log residual)``.

    ``penalty_order = 1`` plots the first-derivative seminorm, ``2`` the
    seminorm the functional actually penalizes.
    """
    if penalty_order not in (1, 2):
        raise ValidationError("penalty_order must be 1 or 2")
    grid = default_cbar_grid() if cbar_grid is None else np.asarray(cbar_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValidationError("cbar_grid must be nonempty, positive and strictly ascending")
    points = []
    for cb in grid:
        alpha = alpha_from_cbar(float(cb), sigma2, grouped.N)
        try:
            f = fit_alpha(grouped, alpha, solver)
        except GroupDiffError as exc:
            warnings.warn(f"dropping c_bar = {cb:g}: {exc}")
            continue
        points.append(LCurvePoint(
            c_bar=float(cb),
            alpha=alpha,
            log_penalty=_safe_log(seminorm_sq(f, penalty_order)),
            log_residual=_safe_log(residual(f, grouped)),
        ))
    if len(points) < min(MIN_CORNER_POINTS, grid.size):
        raise TooFewPointsError(f"only {len(points)} of {grid.size} L-curve points survived")
    return LCurve(tuple(points), penalty_order=penalty_order)


def discrete_curvature(xs, ys) -> np.ndarray:
    """Circumscribed-circle curvature at each interior vertex (0 at the ends)."""
    P = np.column_stack([xs, ys]).astype(float)
    kappa = np.zeros(len(P))
    for i in range(1, len(P) - 1):
        A, B, C = P[i - 1], P[i], P[i + 1]
        ab, bc, ac = B - A, C - B, C - A
        la, lb, lc = np.linalg.norm(ab), np.linalg.norm(bc), np.linalg.norm(ac)
        if la == 0 or lb == 0 or lc == 0 or not np.all(np.isfinite(P[i - 1:i + 2])):
            continue
        cross = ab[0] * bc[1] - ab[1] * bc[0]
        if abs(cross) <= COLLINEAR_SINE * la * lb:
            continue
        kappa[i] = 2.0 * abs(cross) / (la * lb * lc)
    return kappa


def lcurve_corner(curve: LCurve) -> tuple[int, float, LCurve]:
    """Maximum-curvature vertex of the (log residual, log penalty) polyline.

    Ties go to the smaller ``c_bar``. Without any curvature (collinear
    points) a :class:`NoCornerWarning` is issued and the largest ``c_bar``
    whose residual is within 10% of the minimum residual is returned.
    """
    n = len(curve.points)
    if n < MIN_CORNER_POINTS:
        raise TooFewPointsError(f"need at least {MIN_CORNER_POINTS} points, got {n}")
    kappa = discrete_curvature(curve.column("log_residual"), curve.column("log_penalty"))
    if np.max(kappa) > 0:
        idx = int(np.argmax(kappa))
    else:
        warnings.warn("L-curve has no corner; falling back to the residual rule", NoCornerWarning)
        res = np.exp(curve.column("log_residual"))
        ok = np.flatnonzero(res <= 1.1 * np.min(res))
        idx = int(ok[-1])
    chosen = LCurve(curve.points, chosen_index=idx, penalty_order=curve.penalty_order)
    return idx, curve.points[idx].c_bar, chosen
