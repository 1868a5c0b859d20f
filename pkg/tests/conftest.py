"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import null_space

from groupdiff.core import GroupedObservations, PiecewiseQuartic, UniformGrid


def cubic(x):
    return x**3 + 2 * x**2 - 0.5 * x + 1


def make_grouped(means, y0=0.0, y1=0.0, N=1, sigma2=None) -> GroupedObservations:
    means = np.asarray(means, dtype=float)
    return GroupedObservations(UniformGrid(len(means)), N, means, float(y0), float(y1), sigma2)


def random_grouped(rng: np.random.Generator, M: int, scale: float = 1.0) -> GroupedObservations:
    return make_grouped(scale * rng.standard_normal(M), *(scale * rng.standard_normal(2)))


# --- polynomial bookkeeping written independently of the solver -------------

def _poly_row(h: float, order: int) -> np.ndarray:
    """Row ``r`` with ``r @ (a, b, c, d, e) = p^(order)(h)`` for ``p = a + b t + ... + e t^4``."""
    row = np.zeros(5)
    for m in range(order, 5):
        coef = 1.0
        for q in range(order):
            coef *= m - q
        row[m] = coef * h ** (m - order)
    return row


def _mean_row(h: float) -> np.ndarray:
    return np.array([h**m / (m + 1) for m in range(5)])


def _second_derivative_gram(h: float) -> np.ndarray:
    """``G`` with ``coef @ G @ coef = int_0^h (p'')^2 dt``."""
    # p'' = 2c + 6d t + 12e t^2 in the basis (1, t, t^2)
    D = np.zeros((3, 5))
    D[0, 2], D[1, 3], D[2, 4] = 2.0, 6.0, 12.0
    H = np.array([[h ** (i + j + 1) / (i + j + 1) for j in range(3)] for i in range(3)])
    return D.T @ H @ D


def admissible_constraints(M: int) -> np.ndarray:
    """C^1 continuity at interior knots plus the two endpoint values (rows act on 5M coefficients)."""
    h = 1.0 / M
    rows = []
    for i in range(M - 1):
        for order in (0, 1):
            r = np.zeros(5 * M)
            r[5 * i:5 * i + 5] = _poly_row(h, order)
            r[5 * (i + 1):5 * (i + 1) + 5] = -_poly_row(0.0, order)
            rows.append(r)
    r0 = np.zeros(5 * M)
    r0[:5] = _poly_row(0.0, 0)
    r1 = np.zeros(5 * M)
    r1[-5:] = _poly_row(h, 0)
    return np.array(rows + [r0, r1])


def brute_force_minimizer(grouped: GroupedObservations, alpha: float) -> np.ndarray:
    """Minimize the functional as a generic equality-constrained QP over all 5M coefficients."""
    M = grouped.M
    h = 1.0 / M
    m = _mean_row(h)
    G = _second_derivative_gram(h)
    H = np.zeros((5 * M, 5 * M))
    g = np.zeros(5 * M)
    for i in range(M):
        s = slice(5 * i, 5 * i + 5)
        H[s, s] += 2.0 * np.outer(m, m) / M + 2.0 * alpha * G
        g[s] -= 2.0 * grouped.group_means[i] * m / M
    C = admissible_constraints(M)
    d = np.zeros(C.shape[0])
    d[-2], d[-1] = grouped.left_endpoint_value, grouped.right_endpoint_value
    k = C.shape[0]
    K = np.block([[H, C.T], [C, np.zeros((k, k))]])
    sol = np.linalg.lstsq(K, np.concatenate([-g, d]), rcond=None)[0]
    return sol[:5 * M].reshape(M, 5)


def random_perturbations(rng: np.random.Generator, M: int, count: int) -> list[PiecewiseQuartic]:
    """Random C^1 piecewise quartics vanishing at 0 and 1 (an admissible direction set)."""
    basis = null_space(admissible_constraints(M))
    out = []
    for _ in range(count):
        coef = (basis @ rng.standard_normal(basis.shape[1])).reshape(M, 5)
        out.append(PiecewiseQuartic(UniformGrid(M), coef, 1.0))
    return out


def add_quartics(f: PiecewiseQuartic, g: PiecewiseQuartic, t: float = 1.0) -> PiecewiseQuartic:
    return PiecewiseQuartic(f.coarse_grid, f.coefficients + t * g.coefficients, f.alpha_used)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
