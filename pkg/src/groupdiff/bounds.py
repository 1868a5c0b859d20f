"""Chi-square quantile bound, coverage Monte Carlo and the closed-form error bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import P_MAX, BoundInputs
from .errors import DomainError, OrderError

K = 2
ROOT_WIDTH = 1e-13


@dataclass(frozen=True)
class QuantileBound:
    M: int
    p: float
    z_bar: float
    root_residual: float

    def __post_init__(self):
        if not self.z_bar > 1.0:
            raise DomainError("z_bar must exceed 1")


def _check_p(p: float) -> None:
    if not 0.0 < p < P_MAX:
        raise DomainError(f"p must lie in (0, {P_MAX}), got {p}")


def psi(x):
    """``x exp(1 - x)``: decreasing on (1, inf) from 1 to 0."""
    return x * np.exp(1.0 - x)


def _log_gap(x: float, log_target: float) -> float:
    # log psi(x) - log target, written to avoid cancellation near x = 1
    u = x - 1.0
    return math.log1p(u) - u - log_target


def chi_upper_quantile_bound(M: int, p: float) -> QuantileBound:
    """Root ``z > 1`` of ``z exp(1 - z) = p^(2/M)``.

    ``M * z`` bounds the (1 - p) quantile of chi-square with M degrees of
    freedom from above. Bisection on a doubling bracket, then Newton polish
    steps that are kept only if they stay inside the final bracket.
    """
    _check_p(p)
    if M < 2:
        raise DomainError(f"M must be at least 2, got {M}")
    log_target = 2.0 * math.log(p) / M
    lo, hi = 1.0, 2.0
    while _log_gap(hi, log_target) > 0.0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > ROOT_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _log_gap(mid, log_target) > 0.0:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    for _ in range(2):
        slope = 1.0 / z - 1.0
        if slope == 0.0:
            break
        cand = z - _log_gap(z, log_target) / slope
        if lo <= cand <= hi:
            z = cand
    if z <= 1.0:
        z = math.nextafter(1.0, 2.0)
    residual = abs(float(psi(z)) - p ** (2.0 / M))
    return QuantileBound(M=M, p=p, z_bar=z, root_residual=residual)


def coverage_probability(
    M: int,
    N: int,
    sigma2: float,
    p: float,
    trials: int,
    seed: int,
    shards: int = 1,
) -> float:
    """Fraction of simulated ``Delta_M^2`` values below ``z_bar sigma^2 / N``.

    Each trial draws M independent N(0, sigma^2/N) group-mean errors. Trials
    are split into ``shards`` blocks; block ``s`` uses ``rng.derive_seed(seed, s)``.
    """
    if trials < 1000:
        raise DomainError("need at least 1000 trials")
    if N < 1 or sigma2 < 0 or shards < 1:
        raise DomainError("N must be positive, sigma2 nonnegative, shards positive")
    zb = chi_upper_quantile_bound(M, p).z_bar
    threshold = zb * sigma2 / N
    scale = math.sqrt(sigma2 / N)
    sizes = [trials // shards + (1 if s < trials % shards else 0) for s in range(shards)]
    hits = 0
    for s, n_s in enumerate(sizes):
        sub_seed = seed if shards == 1 else rng.derive_seed(seed, s)
        z = rng.normals(sub_seed, n_s * M, scale=scale).reshape(n_s, M)
        delta2 = np.mean(z**2, axis=1)
        hits += int(np.count_nonzero(delta2 <= threshold))
    return hits / trials


def coverage_report(M: int, N: int, sigma2: float, p: float, trials: int, seed: int) -> dict:
    return {
        "M": M,
        "N": N,
        "sigma2": sigma2,
        "p": p,
        "z_bar": chi_upper_quantile_bound(M, p).z_bar,
        "trials": trials,
        "coverage": coverage_probability(M, N, sigma2, p, trials, seed),
        "seed": seed,
    }


def bound_ek(inputs: BoundInputs, c_bar: float, h_M: float) -> float:
    """Bound on ``||e''||``: ``sqrt(2 z/c + 2 Q^2 h_M^2 / (c N sigma^2)) + 2 ||y''||``."""
    if not c_bar > 0 or not inputs.sigma2 > 0:
        raise DomainError("c_bar and sigma2 must be positive")
    zb = chi_upper_quantile_bound(inputs.M, inputs.p).z_bar
    root = math.sqrt(
        2.0 * zb / c_bar + 2.0 * inputs.Q**2 * h_M**2 / (c_bar * inputs.N * inputs.sigma2)
    )
    return root + 2.0 * inputs.y_k_norm


def bound_e(inputs: BoundInputs, c_bar: float, h_M: float, h: float, e1_norm: float) -> float:
    """Bound on ``||e||`` given the caller's value of ``||e'||``."""
    if not c_bar > 0:
        raise DomainError("c_bar must be positive")
    if h < 0 or e1_norm < 0:
        raise DomainError("h and e1_norm must be nonnegative")
    zb = chi_upper_quantile_bound(inputs.M, inputs.p).z_bar
    s2, N = inputs.sigma2, inputs.N
    root = math.sqrt(
        (8.0 * zb * s2 + 2.0 * c_bar * s2 * inputs.y_k_norm**2) / N
        + 8.0 * inputs.Q**2 * h_M**2 / N**2
    )
    return h * e1_norm + root


def bound_rate(inputs: BoundInputs, h_M: float, N: int, j: int) -> float:
    """``C1 h_M^(k-j) + C2 (sigma^2/N)^((k-j)/(2k))`` for ``j`` in {0, 1}."""
    if j not in (0, 1):
        raise OrderError(f"j must be 0 or 1, got {j}")
    return inputs.C1 * h_M ** (K - j) + inputs.C2 * (inputs.sigma2 / N) ** ((K - j) / (2 * K))
