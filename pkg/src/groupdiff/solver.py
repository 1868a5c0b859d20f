"""Minimizer of the grouped Tikhonov functional for k = 2.

The minimizer of

    Phi(f) = (1/M) sum_i (Y~_i - M_i(f))^2 + alpha ||f''||^2,
    f(0) = y(0), f(1) = y(1),

is a C^3 piecewise quartic. Two assemblies are provided:

* ``assemble_full_kkt``: all 5M coefficients, one row per optimality
  condition (continuity of f..f''' at interior knots, constant fourth
  derivative per interval, natural boundary conditions, endpoint values).
* ``assemble_reduced``: an M x M system in the quartic coefficients ``e``
  obtained by eliminating a, b, c, d from the full system. The elimination
  is derived in ``docs/reduced_system.md``.

``fit`` uses the reduced system unless asked otherwise; the full system is
the reference it is tested against.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

from .core import FitConfig, GroupedObservations, PiecewiseQuartic, TAU_CONT, TAU_EL, TAU_SOLVE
from .errors import ConfigError, DomainError, GridMismatchError, OrderError
from .linalg import DenseLinearSystem, lu_factor, lu_solve, solve
from .preprocess import interval_index

K = 2
N_COEF = 2 * K + 1

# Gauss-Legendre rule exact for polynomials up to degree 9 (squares of quartics).
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _check_inputs(grouped: GroupedObservations, alpha: float) -> None:
    if grouped.M <= K:
        raise ConfigError(f"need M > {K}, got {grouped.M}")
    if not (np.isfinite(alpha) and alpha > 0):
        raise ConfigError(f"alpha must be positive and finite, got {alpha}")


def _derivative_row(h: float, order: int, t: float | None = None) -> np.ndarray:
    """Row ``r`` with ``r @ (a, b, c, d, e) = f^(order)`` at local offset ``t``."""
    t = h if t is None else t
    row = np.zeros(N_COEF)
    for m in range(order, N_COEF):
        row[m] = factorial(m) / factorial(m - order) * t ** (m - order)
    return row


def _mean_row(h: float) -> np.ndarray:
    return np.array([h**m / (m + 1) for m in range(N_COEF)])


def assemble_full_kkt(grouped: GroupedObservations, alpha: float) -> DenseLinearSystem:
    """All 5M optimality conditions as one dense system.

    The Euler-Lagrange rows are written multiplied through by ``alpha``:
    ``24 alpha e_i + M_i(f) = Y~_{i+1}``.
    """
    _check_inputs(grouped, alpha)
    M = grouped.M
    h = 1.0 / M
    n = N_COEF * M
    A = np.zeros((n, n))
    rhs = np.zeros(n)
    kinds = []
    r = 0
    # continuity of f^(j), j = 0..2k-1, at the interior knots
    for i in range(M - 1):
        o, q = N_COEF * i, N_COEF * (i + 1)
        for j in range(2 * K):
            A[r, o:o + N_COEF] = _derivative_row(h, j)
            A[r, q:q + N_COEF] -= _derivative_row(h, j, t=0.0)
            kinds.append(f"continuity_{j}")
            r += 1
    mean = _mean_row(h)
    for i in range(M):
        o = N_COEF * i
        A[r, o:o + N_COEF] = mean
        A[r, o + 4] += factorial(2 * K) * alpha
        rhs[r] = grouped.group_means[i]
        kinds.append("euler_lagrange")
        r += 1
    last = N_COEF * (M - 1)
    for j in range(K - 1):
        A[r, 0:N_COEF] = _derivative_row(h, K + j, t=0.0)
        kinds.append("natural_bc")
        r += 1
        A[r, last:last + N_COEF] = _derivative_row(h, K + j)
        kinds.append("natural_bc")
        r += 1
    A[r, 0:N_COEF] = _derivative_row(h, 0, t=0.0)
    rhs[r] = grouped.left_endpoint_value
    kinds.append("endpoint")
    r += 1
    A[r, last:last + N_COEF] = _derivative_row(h, 0)
    rhs[r] = grouped.right_endpoint_value
    kinds.append("endpoint")
    r += 1
    assert r == n
    return DenseLinearSystem(A, rhs, "full_kkt", tuple(kinds))


@lru_cache(maxsize=16)
def _reduced_maps(M: int) -> dict[str, np.ndarray]:
    """Affine maps from ``e`` (and the endpoint values) to every coefficient.

    Depends on M only. With ``c`` extended by ``c_0 = c_M = 0``:

    * ``c_{i-1} - 2 c_i + c_{i+1} = 6 h^2 (e_{i-1} + e_i)``
    * ``d_i = (c_{i+1} - c_i) / (3h) - 2 h e_i``
    * ``a_{i-1} - 2 a_i + a_{i+1} = h^2 (c_{i-1} + c_i) + h^3 (2 d_{i-1} + d_i)
      + h^4 (3 e_{i-1} + e_i)`` with ``a_0 = y(0)``, ``a_M = y(1)``
    * ``b_i = (a_{i+1} - a_i) / h - h c_i - h^2 d_i - h^3 e_i``
    """
    h = 1.0 / M
    eye = np.eye(M)
    second_diff = np.diag(np.full(M - 1, -2.0)) + np.diag(np.ones(M - 2), 1) + np.diag(np.ones(M - 2), -1)
    lu = lu_factor(second_diff)

    pair_sum = np.zeros((M - 1, M))
    idx = np.arange(M - 1)
    pair_sum[idx, idx] = 1.0
    pair_sum[idx, idx + 1] = 1.0

    c_full = np.zeros((M + 1, M))
    c_full[1:M] = 6.0 * h**2 * lu_solve(lu, pair_sum)
    d = (c_full[1:] - c_full[:-1]) / (3.0 * h) - 2.0 * h * eye

    i = np.arange(1, M)
    rhs_a = (
        h**2 * (c_full[i - 1] + c_full[i])
        + h**3 * (2.0 * d[i - 1] + d[i])
        + h**4 * (3.0 * eye[i - 1] + eye[i])
    )
    a_full = np.zeros((M + 1, M))
    a_full[1:M] = lu_solve(lu, rhs_a)
    first = np.zeros(M - 1)
    first[0] = 1.0
    a_y0 = np.zeros(M + 1)
    a_y0[0] = 1.0
    a_y0[1:M] = lu_solve(lu, -first)
    a_y1 = np.zeros(M + 1)
    a_y1[M] = 1.0
    a_y1[1:M] = lu_solve(lu, -first[::-1])

    b = (a_full[1:] - a_full[:-1]) / h - h * c_full[:-1] - h**2 * d - h**3 * eye
    b_y0 = (a_y0[1:] - a_y0[:-1]) / h
    b_y1 = (a_y1[1:] - a_y1[:-1]) / h

    # interval means as functions of e (the part of the EL rows without 24 alpha)
    mean_e = a_full[:M] + h / 2 * b + h**2 / 3 * c_full[:M] + h**3 / 4 * d + h**4 / 5 * eye
    mean_y0 = a_y0[:M] + h / 2 * b_y0
    mean_y1 = a_y1[:M] + h / 2 * b_y1

    maps = dict(
        a=a_full[:M], a_y0=a_y0[:M], a_y1=a_y1[:M],
        b=b, b_y0=b_y0, b_y1=b_y1,
        c=c_full[:M], d=d,
        mean_e=mean_e, mean_y0=mean_y0, mean_y1=mean_y1,
    )
    for arr in maps.values():
        arr.setflags(write=False)
    return maps


def assemble_reduced(grouped: GroupedObservations, alpha: float) -> DenseLinearSystem:
    """M x M system ``(24 alpha I + K) e = Y~ - y(0) g_0 - y(1) g_1``."""
    _check_inputs(grouped, alpha)
    maps = _reduced_maps(grouped.M)
    A = maps["mean_e"] + factorial(2 * K) * alpha * np.eye(grouped.M)
    rhs = (
        grouped.group_means
        - grouped.left_endpoint_value * maps["mean_y0"]
        - grouped.right_endpoint_value * maps["mean_y1"]
    )
    return DenseLinearSystem(A, rhs, "reduced_e", ("euler_lagrange",) * grouped.M)


def recover_coefficients(e, grouped: GroupedObservations, alpha: float) -> PiecewiseQuartic:
    """Back-substitute ``e`` into the elimination maps to get all coefficients."""
    _check_inputs(grouped, alpha)
    e = np.asarray(e, dtype=float)
    maps = _reduced_maps(grouped.M)
    y0, y1 = grouped.left_endpoint_value, grouped.right_endpoint_value
    coef = np.column_stack([
        maps["a"] @ e + y0 * maps["a_y0"] + y1 * maps["a_y1"],
        maps["b"] @ e + y0 * maps["b_y0"] + y1 * maps["b_y1"],
        maps["c"] @ e,
        maps["d"] @ e,
        e,
    ])
    return PiecewiseQuartic(grouped.coarse_grid, coef, alpha)


def fit(grouped: GroupedObservations, config: FitConfig) -> PiecewiseQuartic:
    """Fit the piecewise quartic minimizer with the configured assembly."""
    alpha = config.resolve_alpha()
    if config.solver == "full_kkt":
        sol = solve(assemble_full_kkt(grouped, alpha), tau_solve=config.tau_solve)
        return PiecewiseQuartic(grouped.coarse_grid, sol.x.reshape(grouped.M, N_COEF), alpha)
    sol = solve(assemble_reduced(grouped, alpha), tau_solve=config.tau_solve)
    return recover_coefficients(sol.x, grouped, alpha)


def fit_alpha(grouped: GroupedObservations, alpha: float, solver: str = "reduced") -> PiecewiseQuartic:
    return fit(grouped, FitConfig(alpha=alpha, solver=solver))


# --- evaluation ---------------------------------------------------------------

def _derivative_coefficients(coef: np.ndarray, order: int) -> np.ndarray:
    """Local power-basis coefficients of the ``order``-th derivative."""
    m = np.arange(order, N_COEF)
    scale = np.array([factorial(k) / factorial(k - order) for k in m])
    return coef[..., order:] * scale


def evaluate(f: PiecewiseQuartic, x, order: int = 0):
    """Value of ``f^(order)`` at ``x``.

    Intervals are half-open ``[x_i, x_{i+1})`` so interior knots take the
    right-hand piece; ``x = 1`` belongs to the last interval.
    """
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= 4:
        raise OrderError(f"derivative order must be in 0..4, got {order}")
    xa = np.asarray(x, dtype=float)
    if not np.all((xa >= 0.0) & (xa <= 1.0)):
        raise DomainError("x must lie in [0, 1]")
    M = f.M
    idx = interval_index(xa, M)
    t = xa - idx / M
    dc = _derivative_coefficients(f.coefficients[idx], order)
    out = dc[..., -1]
    for m in range(dc.shape[-1] - 2, -1, -1):
        out = out * t + dc[..., m]
    return float(out) if np.ndim(out) == 0 else out


def _left_limits(f: PiecewiseQuartic, order: int) -> np.ndarray:
    """``f^(order)`` at the right end of every interval (left limits at x_1..x_M)."""
    dc = _derivative_coefficients(f.coefficients, order)
    t = 1.0 / f.M
    return dc @ (t ** np.arange(dc.shape[-1]))


def interval_mean(f: PiecewiseQuartic, i: int) -> float:
    if not 0 <= i < f.M:
        raise IndexError(f"interval index {i} out of range 0..{f.M - 1}")
    return float(f.coefficients[i] @ _mean_row(1.0 / f.M))


def interval_means(f: PiecewiseQuartic) -> np.ndarray:
    return f.coefficients @ _mean_row(1.0 / f.M)


def seminorm_sq(f: PiecewiseQuartic, order: int) -> float:
    """``||f^(order)||^2_{L^2(0,1)}``, integrated exactly per interval."""
    if not 0 <= order <= 4:
        raise OrderError(f"derivative order must be in 0..4, got {order}")
    h = 1.0 / f.M
    t = (_GL_NODES + 1.0) * (h / 2.0)
    dc = _derivative_coefficients(f.coefficients, order)
    vals = dc @ (t[None, :] ** np.arange(dc.shape[-1])[:, None])
    return float(np.sum((vals**2) @ _GL_WEIGHTS) * (h / 2.0))


def objective(f: PiecewiseQuartic, grouped: GroupedObservations, alpha: float | None = None) -> float:
    """Tikhonov functional value (data misfit plus ``alpha ||f''||^2``)."""
    if f.M != grouped.M:
        raise GridMismatchError("fit and data live on different coarse grids")
    alpha = f.alpha_used if alpha is None else alpha
    misfit = np.mean((grouped.group_means - interval_means(f)) ** 2)
    return float(misfit + alpha * seminorm_sq(f, K))


def invariant_violations(
    f: PiecewiseQuartic,
    grouped: GroupedObservations,
    tau_cont: float = TAU_CONT,
    tau_el: float = TAU_EL,
) -> list[str]:
    """Optimality conditions the fitted quartic fails (empty when all hold)."""
    if f.M != grouped.M:
        raise GridMismatchError("fit and data live on different coarse grids")
    out = []
    M = f.M
    for j in range(2 * K):
        right = _derivative_coefficients(f.coefficients, j)[:, 0]  # f^(j)(x_i+)
        left = _left_limits(f, j)                                  # f^(j)(x_{i+1}-)
        scale = max(1.0, float(np.max(np.abs(right))))
        jump = np.abs(left[:-1] - right[1:])
        if M > 1 and np.max(jump) > tau_cont * scale:
            out.append(f"derivative {j} jumps by {np.max(jump):.3e} (scale {scale:.3e})")
    scale2 = max(1.0, float(np.max(np.abs(_derivative_coefficients(f.coefficients, 2)[:, 0]))))
    f2_0 = evaluate(f, 0.0, 2)
    f2_1 = float(_left_limits(f, 2)[-1])
    if abs(f2_0) > tau_cont * scale2 or abs(f2_1) > tau_cont * scale2:
        out.append(f"natural boundary violated: f''(0) = {f2_0:.3e}, f''(1) = {f2_1:.3e}")
    y0, y1 = grouped.left_endpoint_value, grouped.right_endpoint_value
    f0, f1 = evaluate(f, 0.0), float(_left_limits(f, 0)[-1])
    if abs(f0 - y0) > tau_cont * max(1.0, abs(y0)) or abs(f1 - y1) > tau_cont * max(1.0, abs(y1)):
        out.append(f"endpoint values off: f(0) - y(0) = {f0 - y0:.3e}, f(1) - y(1) = {f1 - y1:.3e}")
    lhs = factorial(2 * K) * f.alpha_used * f.coefficients[:, 4]
    rhs = grouped.group_means - interval_means(f)
    el_scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    floor = 1e-14 * max(1.0, float(np.max(np.abs(grouped.group_means))))
    if np.max(np.abs(lhs - rhs)) > tau_el * el_scale + floor:
        out.append(f"Euler-Lagrange relation off by {np.max(np.abs(lhs - rhs)):.3e}")
    return out
