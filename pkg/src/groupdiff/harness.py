"""Synthetic experiments: sample generation, error norms and the reproduction runs.

Nothing in here touches the filesystem; the CLI writes the results.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from . import rng
from .core import FitConfig, GroupedObservations, NoisySampleSet, PiecewiseQuartic, UniformGrid
from .errors import ConfigError, QuadratureError, ResourceGuardError
from .preprocess import group_samples
from .solver import evaluate, fit

# Largest M the ungrouped baseline accepts (dense system with 5M unknowns).
BASELINE_MAX_M = 5000
DEFAULT_CBAR = 0.0239
L2_REFINE = 20


@dataclass(frozen=True)
class ExactFunction:
    """Exact trend with closed-form derivatives."""

    name: str
    poly: Polynomial | None = None
    amplitude: float = 0.0

    def deriv(self, order: int = 0) -> Callable:
        if self.poly is not None:
            p = self.poly.deriv(order) if order else self.poly
            return lambda x: p(np.asarray(x, dtype=float))
        a = self.amplitude * math.pi**order
        shift = order * math.pi / 2
        return lambda x: a * np.sin(math.pi * np.asarray(x, dtype=float) + shift)

    def __call__(self, x):
        return self.deriv(0)(x)


def exact_function(function_id: str, poly_coefficients: Sequence[float] | None = None) -> ExactFunction:
    """Built-in corpus: ``cubic``, ``bump``, ``sine`` or ``poly`` (ascending coefficients)."""
    if function_id == "cubic":
        return ExactFunction("cubic", Polynomial([1.0, -0.5, 2.0, 1.0]))
    if function_id == "bump":
        # 1 + 10 x^2 (1 - x)^2
        return ExactFunction("bump", Polynomial([1.0, 0.0, 10.0, -20.0, 10.0]))
    if function_id == "sine":
        return ExactFunction("sine", amplitude=0.1)
    if function_id == "poly":
        if not poly_coefficients:
            raise ConfigError("function_id 'poly' needs poly_coefficients")
        return ExactFunction("poly", Polynomial([float(c) for c in poly_coefficients]))
    raise ConfigError(f"unknown function_id {function_id!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    function_id: str = "cubic"
    poly_coefficients: tuple[float, ...] | None = None
    L: int = 1000
    sigma2: float = 0.2
    M: int | tuple[int, ...] = 10
    seed: int = 0
    n_seeds: int = 20
    c_bar: float | None = DEFAULT_CBAR
    alpha: float | None = None
    truncate: bool = False
    L_list: tuple[int, ...] = (1000, 10000, 100000)
    solver: str = "reduced"
    out_dir: str | None = None

    def __post_init__(self):
        if isinstance(self.M, list):
            object.__setattr__(self, "M", tuple(self.M))
        for name in ("poly_coefficients", "L_list"):
            if isinstance(getattr(self, name), list):
                object.__setattr__(self, name, tuple(getattr(self, name)))
        exact_function(self.function_id, self.poly_coefficients)
        if self.L < 4:
            raise ConfigError("L must be at least 4")
        if not self.sigma2 >= 0:
            raise ConfigError("sigma2 must be nonnegative")
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be positive")
        if not self.truncate:
            for M in self.M_list:
                if self.L % M:
                    raise ConfigError(f"M = {M} does not divide L = {self.L}")
        if self.alpha is None and self.c_bar is None:
            raise ConfigError("give alpha or c_bar")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.c_bar is not None and not self.c_bar > 0:
            raise ConfigError("c_bar must be positive")

    @property
    def M_list(self) -> tuple[int, ...]:
        return self.M if isinstance(self.M, tuple) else (self.M,)

    @property
    def seeds(self) -> list[int]:
        return [self.seed + r for r in range(self.n_seeds)]

    @property
    def function(self) -> ExactFunction:
        return exact_function(self.function_id, self.poly_coefficients)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class ErrorReport:
    l2_value: float
    linf_value: float
    l2_deriv: float
    linf_deriv: float
    runtime_ms: float = 0.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) >= 0:
                raise ValueError(f"{f.name} must be nonnegative")

    def as_dict(self, runtime: bool = False) -> dict:
        d = dataclasses.asdict(self)
        if not runtime:
            d.pop("runtime_ms")
        return d


ERROR_COLUMNS = ("l2_value", "linf_value", "l2_deriv", "linf_deriv")


def generate_samples(config: ExperimentConfig, seed: int | None = None, L: int | None = None) -> NoisySampleSet:
    """Samples ``y(j/L) + eta_j`` for ``j = 1..L`` with exact endpoint values."""
    seed = config.seed if seed is None else seed
    L = config.L if L is None else L
    y = config.function
    x = np.arange(1, L + 1) / L
    values = np.asarray(y(x), dtype=float)
    if config.sigma2 > 0:
        values = values + rng.normals(seed, L, scale=math.sqrt(config.sigma2))
    values[-1] = float(y(1.0))
    return NoisySampleSet(UniformGrid(L), values, float(y(0.0)), float(y(1.0)), config.sigma2)


def _exact(y_exact, order: int) -> Callable:
    # plain callables are taken to be the order-th derivative already
    return y_exact.deriv(order) if hasattr(y_exact, "deriv") else y_exact


def l2_error(f: PiecewiseQuartic, y_exact, order: int = 0, refine: int = L2_REFINE) -> float:
    """``||y^(order) - f^(order)||_{L^2}`` by composite Simpson on ``refine * M`` panels."""
    n = refine * f.M
    n += n % 2
    x = np.arange(n + 1) / n
    diff = evaluate(f, x, order) - np.asarray(_exact(y_exact, order)(x), dtype=float)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    val = float(w @ diff**2) / (3.0 * n)
    if not math.isfinite(val) or val < -1e-300:
        raise QuadratureError("non-finite L2 error")
    return math.sqrt(max(val, 0.0))


def linf_error(f: PiecewiseQuartic, y_exact, order: int = 0, eval_grid=None) -> float:
    """Max deviation over ``eval_grid`` (defaults to 1000 uniform nodes j/1000, j >= 1)."""
    x = np.arange(1, 1001) / 1000 if eval_grid is None else np.asarray(eval_grid, dtype=float)
    diff = evaluate(f, x, order) - np.asarray(_exact(y_exact, order)(x), dtype=float)
    return float(np.max(np.abs(diff)))


def error_report(f: PiecewiseQuartic, y_exact, L: int, runtime_ms: float = 0.0) -> ErrorReport:
    nodes = np.arange(1, L + 1) / L
    return ErrorReport(
        l2_value=l2_error(f, y_exact, 0),
        linf_value=linf_error(f, y_exact, 0, nodes),
        l2_deriv=l2_error(f, y_exact, 1),
        linf_deriv=linf_error(f, y_exact, 1, nodes),
        runtime_ms=runtime_ms,
    )


@dataclass(frozen=True)
class RunResult:
    seed: int
    M: int
    N: int
    alpha: float
    report: ErrorReport
    fit: PiecewiseQuartic = field(repr=False)
    grouped: GroupedObservations = field(repr=False)


def run_single(config: ExperimentConfig, M: int, seed: int, alpha: float | None = None) -> RunResult:
    """Generate, group and fit one replica; ``alpha`` overrides the config rule."""
    t0 = time.perf_counter()
    samples = generate_samples(config, seed)
    grouped = group_samples(samples, M, truncate=config.truncate)
    if alpha is None:
        alpha = config.alpha if config.alpha is not None else config.c_bar * config.sigma2 / grouped.N
    f = fit(grouped, FitConfig(alpha=alpha, solver=config.solver))
    runtime = (time.perf_counter() - t0) * 1e3
    report = error_report(f, config.function, config.L, runtime)
    return RunResult(seed, M, grouped.N, alpha, report, f, grouped)


def _medians(reports: Sequence[ErrorReport]) -> dict[str, float]:
    return {c: float(np.median([getattr(r, c) for r in reports])) for c in ERROR_COLUMNS}


def _csv_line(values) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


@dataclass(frozen=True)
class Table1Result:
    rows: tuple[dict, ...]
    raw: tuple[RunResult, ...] = field(repr=False)

    def to_csv(self) -> str:
        head = ["M", "N", "alpha", *ERROR_COLUMNS]
        lines = [",".join(head)] + [_csv_line([r[h] for h in head]) for r in self.rows]
        return "\n".join(lines) + "\n"

    def raw_csv(self) -> str:
        head = ["M", "N", "seed", "alpha", *ERROR_COLUMNS]
        lines = [",".join(head)]
        for r in self.raw:
            lines.append(_csv_line([r.M, r.N, r.seed, r.alpha, *(getattr(r.report, c) for c in ERROR_COLUMNS)]))
        return "\n".join(lines) + "\n"


def run_table1(config: ExperimentConfig, seeds: Sequence[int] | None = None) -> Table1Result:
    """Median errors per M over seeds; row order follows ``config.M_list``."""
    seeds = config.seeds if seeds is None else list(seeds)
    rows, raw = [], []
    for M in config.M_list:
        runs = [run_single(config, M, s) for s in sorted(seeds)]
        raw.extend(runs)
        rows.append({"M": M, "N": runs[0].N, "alpha": runs[0].alpha, **_medians([r.report for r in runs])})
    return Table1Result(tuple(rows), tuple(raw))


def table1_config(**overrides) -> ExperimentConfig:
    base = ExperimentConfig(function_id="cubic", L=1000, sigma2=0.2, M=(5, 10, 50, 100, 200), c_bar=DEFAULT_CBAR)
    return base.replace(**overrides)


def divisor_at_most(L: int, target: int) -> int:
    """Largest divisor of ``L`` not exceeding ``target``."""
    for d in range(min(target, L), 0, -1):
        if L % d == 0:
            return d
    return 1


@dataclass(frozen=True)
class ConvergenceResult:
    records: tuple[dict, ...]
    slope: float
    against: str

    def to_csv(self) -> str:
        head = ["L", "M", "N", "alpha", "l2_deriv"]
        lines = [",".join(head)] + [_csv_line([r[h] for h in head]) for r in self.records]
        return "\n".join(lines) + "\n"


def run_convergence(config: ExperimentConfig, seeds: Sequence[int] | None = None) -> ConvergenceResult:
    """Derivative error as L grows with ``N`` the largest divisor of L below ``round(L^(4/5))``.

    The least-squares slope of log error is taken against ``log(sigma^2/N)``,
    or against ``log h_M`` when the data are noise free (then ``config.alpha``
    must be given).
    """
    seeds = config.seeds if seeds is None else list(seeds)
    noisy = config.sigma2 > 0
    if not noisy and config.alpha is None:
        raise ConfigError("noise-free convergence runs need an explicit alpha")
    records = []
    for L in config.L_list:
        N = divisor_at_most(L, round(L ** 0.8))
        M = L // N
        if M <= 2:
            raise ConfigError(f"L = {L} leaves only M = {M} groups")
        cfg = config.replace(L=L, M=M)
        alpha = config.alpha if config.alpha is not None else config.c_bar * config.sigma2 / N
        errs = [run_single(cfg, M, s, alpha).report.l2_deriv for s in sorted(seeds)]
        records.append({"L": L, "M": M, "N": N, "alpha": alpha, "l2_deriv": float(np.median(errs))})
    err = np.log([r["l2_deriv"] for r in records])
    if noisy:
        xs = np.log([config.sigma2 / r["N"] for r in records])
        against = "sigma2/N"
    else:
        xs = np.log([1.0 / r["M"] for r in records])
        against = "h_M"
    slope = float(np.polyfit(xs, err, 1)[0])
    return ConvergenceResult(tuple(records), slope, against)


def convergence_config(**overrides) -> ExperimentConfig:
    base = ExperimentConfig(function_id="cubic", sigma2=0.2, L=1000, M=4, c_bar=DEFAULT_CBAR, n_seeds=20)
    return base.replace(**overrides)


@dataclass(frozen=True)
class BaselineResult:
    baseline: dict[str, float]
    grouped: dict[str, float]
    grouped_wins: float
    per_seed: tuple[tuple[int, ErrorReport, ErrorReport], ...] = field(repr=False)
    runtime_ms: dict[str, float] = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict:
        return {"baseline": self.baseline, "grouped": self.grouped, "grouped_wins": self.grouped_wins}


def check_baseline_size(M: int) -> None:
    if M > BASELINE_MAX_M:
        raise ResourceGuardError(
            f"ungrouped fit with M = {M} needs a dense {5 * M} x {5 * M} system; "
            f"limit is M <= {BASELINE_MAX_M}"
        )


def run_baseline(
    config: ExperimentConfig,
    seeds: Sequence[int] | None = None,
    grouped_M: int = 10,
) -> BaselineResult:
    """Ungrouped fit (M = L, N = 1, alpha = sigma^2) against the grouped method on the same seeds."""
    check_baseline_size(config.L)
    seeds = config.seeds if seeds is None else list(seeds)
    base_cfg = config.replace(M=config.L, alpha=config.sigma2, c_bar=None)
    grp_cfg = config.replace(M=grouped_M, alpha=None, c_bar=config.c_bar or DEFAULT_CBAR)
    per_seed = []
    for s in sorted(seeds):
        b = run_single(base_cfg, config.L, s).report
        g = run_single(grp_cfg, grouped_M, s).report
        per_seed.append((s, b, g))
    wins = sum(g.l2_value <= b.l2_value for _, b, g in per_seed) / len(per_seed)
    runtime = {
        "baseline": float(np.median([b.runtime_ms for _, b, _ in per_seed])),
        "grouped": float(np.median([g.runtime_ms for _, _, g in per_seed])),
    }
    return BaselineResult(
        baseline=_medians([b for _, b, _ in per_seed]),
        grouped=_medians([g for _, _, g in per_seed]),
        grouped_wins=wins,
        per_seed=tuple(per_seed),
        runtime_ms=runtime,
    )


def baseline_config(**overrides) -> ExperimentConfig:
    return ExperimentConfig(function_id="cubic", L=1000, sigma2=0.2, M=10, c_bar=DEFAULT_CBAR).replace(**overrides)


@dataclass(frozen=True)
class BigDataResult:
    medians: dict[str, float]
    relative_l2: float
    runs: tuple[RunResult, ...] = field(repr=False)

    def as_dict(self) -> dict:
        return {**self.medians, "relative_l2": self.relative_l2}


def run_bigdata(config: ExperimentConfig, seeds: Sequence[int] | None = None) -> BigDataResult:
    """Full pipeline on a large sample; ``alpha = c_bar sigma^2 / N`` with ``c_bar = 1`` by default."""
    seeds = config.seeds if seeds is None else list(seeds)
    M = config.M_list[0]
    runs = []
    for s in sorted(seeds):
        runs.append(run_single(config, M, s))
    y = config.function
    n = L2_REFINE * M
    x = np.arange(n + 1) / n
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    y_norm = math.sqrt(float(w @ np.asarray(y(x)) ** 2) / (3.0 * n))
    rel = float(np.median([r.report.l2_value for r in runs])) / y_norm
    return BigDataResult(_medians([r.report for r in runs]), rel, tuple(runs))


def bigdata_config(**overrides) -> ExperimentConfig:
    base = ExperimentConfig(function_id="bump", L=10**6, sigma2=0.25, M=10, c_bar=1.0, n_seeds=10)
    return base.replace(**overrides)
