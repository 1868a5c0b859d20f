"""Dense LU with partial pivoting.

Right-looking blocked factorization: each panel of ``BLOCK`` columns is
factored column by column with row pivoting, the trailing matrix is then
updated with one matrix product. A pivot smaller than ``PIVOT_TOL`` times
the infinity norm of its (original) row raises :class:`SingularMatrixError`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import TAU_SOLVE
from .errors import LengthMismatchError, SingularMatrixError, ValidationError

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-13
BLOCK = 64
LABELINGS = ("reduced_e", "full_kkt", "generic")


@dataclass(frozen=True)
class DenseLinearSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    labeling: str = "generic"
    row_kinds: tuple[str, ...] = ()

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        b = np.array(self.rhs, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise LengthMismatchError(f"rhs length {b.size} does not match matrix size {A.shape[0]}")
        if self.labeling not in LABELINGS:
            raise ValidationError(f"unknown labeling {self.labeling!r}")
        if self.row_kinds and len(self.row_kinds) != A.shape[0]:
            raise LengthMismatchError("row_kinds must label every row")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "row_kinds", tuple(self.row_kinds))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Solution:
    x: np.ndarray
    residual: float
    condition: float


@dataclass(frozen=True)
class LUFactors:
    lu: np.ndarray
    perm: np.ndarray


def lu_factor(A, pivot_tol: float = PIVOT_TOL, block: int = BLOCK) -> LUFactors:
    """Factor ``A[perm] = L @ U`` (unit lower ``L`` stored below the diagonal)."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    perm = np.arange(n)
    row_norm = np.max(np.abs(a), axis=1) if n else np.zeros(0)
    for k0 in range(0, n, block):
        k1 = min(k0 + block, n)
        for k in range(k0, k1):
            p = k + int(np.argmax(np.abs(a[k:, k])))
            if p != k:
                a[[k, p]] = a[[p, k]]
                perm[[k, p]] = perm[[p, k]]
                row_norm[[k, p]] = row_norm[[p, k]]
            piv = a[k, k]
            if not abs(piv) > pivot_tol * row_norm[k]:
                raise SingularMatrixError(
                    f"pivot {piv:.3e} at step {k} is below {pivot_tol:g} x row norm {row_norm[k]:.3e}"
                )
            a[k + 1:, k] /= piv
            # update only the rest of the panel here; the trailing block waits
            a[k + 1:, k + 1:k1] -= np.outer(a[k + 1:, k], a[k, k + 1:k1])
        if k1 < n:
            # U12 = L11^{-1} A12
            for k in range(k0, k1):
                a[k + 1:k1, k1:] -= np.outer(a[k + 1:k1, k], a[k, k1:])
            a[k1:, k1:] -= a[k1:, k0:k1] @ a[k0:k1, k1:]
    return LUFactors(a, perm)


def lu_solve(factors: LUFactors, b) -> np.ndarray:
    """Solve ``A x = b`` for vector or matrix ``b``."""
    lu, perm = factors.lu, factors.perm
    n = lu.shape[0]
    x = np.array(b, dtype=float)[perm]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] -= lu[i, i + 1:] @ x[i + 1:]
        x[i] /= lu[i, i]
    return x


def lu_solve_transposed(factors: LUFactors, b) -> np.ndarray:
    """Solve ``A^T x = b``."""
    lu, perm = factors.lu, factors.perm
    n = lu.shape[0]
    z = np.array(b, dtype=float)
    for i in range(n):
        z[i] -= lu[:i, i] @ z[:i]
        z[i] /= lu[i, i]
    for i in range(n - 2, -1, -1):
        z[i] -= lu[i + 1:, i] @ z[i + 1:]
    x = np.empty_like(z)
    x[perm] = z
    return x


def condition_estimate(A: np.ndarray, factors: LUFactors, iterations: int = 5) -> float:
    """Hager's estimate of the 1-norm condition number."""
    n = A.shape[0]
    if n == 0:
        return 1.0
    x = np.full(n, 1.0 / n)
    est = 0.0
    for _ in range(iterations):
        y = lu_solve(factors, x)
        est = float(np.sum(np.abs(y)))
        z = lu_solve_transposed(factors, np.where(y >= 0, 1.0, -1.0))
        j = int(np.argmax(np.abs(z)))
        if abs(z[j]) <= z @ x:
            break
        x = np.zeros(n)
        x[j] = 1.0
    return float(np.max(np.sum(np.abs(A), axis=0))) * est


def solve(system: DenseLinearSystem, tau_solve: float = TAU_SOLVE, refine_steps: int = 2) -> Solution:
    """Gaussian elimination with partial pivoting plus iterative refinement.

    The returned ``residual`` is ``||A x - b||_inf``; the target is
    ``tau_solve * (1 + ||b||_inf)``.
    """
    A, b = system.matrix, system.rhs
    factors = lu_factor(A)
    x = lu_solve(factors, b)
    target = tau_solve * (1.0 + float(np.max(np.abs(b), initial=0.0)))
    r = b - A @ x
    res = float(np.max(np.abs(r), initial=0.0))
    for _ in range(refine_steps):
        if res <= target:
            break
        x = x + lu_solve(factors, r)
        r = b - A @ x
        res = float(np.max(np.abs(r), initial=0.0))
    if res > target:
        log.warning("residual %.3e exceeds target %.3e", res, target)
    return Solution(x=x, residual=res, condition=condition_estimate(A, factors))
