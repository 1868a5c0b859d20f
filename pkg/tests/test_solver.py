from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupdiff.core import FitConfig, PiecewiseQuartic, UniformGrid
from groupdiff.errors import ConfigError, DomainError, OrderError
from groupdiff.harness import generate_samples, table1_config
from groupdiff.linalg import solve
from groupdiff.preprocess import group_samples, step_project
from groupdiff.solver import (
    assemble_full_kkt,
    assemble_reduced,
    evaluate,
    fit,
    fit_alpha,
    interval_mean,
    interval_means,
    invariant_violations,
    objective,
    recover_coefficients,
    seminorm_sq,
)

from conftest import add_quartics, brute_force_minimizer, make_grouped, random_grouped, random_perturbations

XS = np.linspace(0.0, 1.0, 1001)


def linear_grouped(M, y0, slope):
    # exact interval means of a linear function equal its midpoint values
    mids = (np.arange(M) + 0.5) / M
    return make_grouped(y0 + slope * mids, y0, y0 + slope)


def experiment_grouped(M, seed):
    cfg = table1_config(M=M, L=1000 if 1000 % M == 0 else 1200)
    g = group_samples(generate_samples(cfg, seed), M)
    return g, 0.0239 * 0.2 / g.N


# --- assembly --------------------------------------------------------------

def test_full_system_rows_by_category():
    g = make_grouped([1.0, -2.0, 0.5], 0.3, 0.7)
    system = assemble_full_kkt(g, 1.0)
    assert system.matrix.shape == (15, 15) and system.labeling == "full_kkt"
    counts = Counter(system.row_kinds)
    assert counts == {
        "continuity_0": 2, "continuity_1": 2, "continuity_2": 2, "continuity_3": 2,
        "euler_lagrange": 3, "natural_bc": 2, "endpoint": 2,
    }


def test_reduced_system_shape():
    system = assemble_reduced(make_grouped(np.arange(7.0)), 0.1)
    assert system.matrix.shape == (7, 7) and system.labeling == "reduced_e"


def test_assembly_preconditions():
    g = make_grouped([1.0, 2.0, 3.0])
    for assemble in (assemble_full_kkt, assemble_reduced):
        with pytest.raises(ConfigError):
            assemble(g, 0.0)
        with pytest.raises(ConfigError):
            assemble(g, -1.0)


@pytest.mark.parametrize("solver", ["reduced", "full_kkt"])
def test_zero_data_gives_zero(solver):
    g = make_grouped(np.zeros(6))
    f = fit_alpha(g, 0.3, solver)
    assert np.all(f.coefficients == 0.0)
    sol = solve(assemble_full_kkt(g, 0.3))
    assert sol.residual <= 1e-10


@pytest.mark.parametrize("M", [3, 10, 100])
@pytest.mark.parametrize("alpha", [1e-8, 1e-4, 1.0])
@pytest.mark.parametrize("solver", ["reduced", "full_kkt"])
def test_linear_reproduction(M, alpha, solver):
    g = linear_grouped(M, 1.0, -0.5)
    f = fit_alpha(g, alpha, solver)
    assert np.max(np.abs(evaluate(f, XS) - (1.0 - 0.5 * XS))) <= 1e-10
    np.testing.assert_allclose(f.coefficients[:, 2:], 0.0, atol=1e-9)
    np.testing.assert_allclose(f.coefficients[:, 4], 0.0, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([3, 4, 10, 37]))
def test_linear_reproduction_any_endpoints(y0, y1, M):
    g = linear_grouped(M, y0, y1 - y0)
    f = fit_alpha(g, 1e-3)
    assert np.max(np.abs(evaluate(f, XS) - (y0 + (y1 - y0) * XS))) <= 1e-10


# --- reduced vs full -------------------------------------------------------

@pytest.mark.parametrize("M", [3, 10, 50, 200])
def test_reduced_matches_full_on_experiment_data(M):
    for seed in range(5):
        g, alpha = experiment_grouped(M, seed)
        fr = fit_alpha(g, alpha, "reduced")
        ff = fit_alpha(g, alpha, "full_kkt")
        assert np.max(np.abs(fr.coefficients - ff.coefficients)) <= 1e-8


@pytest.mark.parametrize("M", [3, 7, 40])
@pytest.mark.parametrize("alpha", [1e-8, 1e-5, 1e-2, 1.0])
def test_reduced_matches_full_relative(rng, M, alpha):
    # at tiny alpha e is O(data / alpha); compare each coefficient family on its own scale
    g = random_grouped(rng, M)
    fr = fit_alpha(g, alpha, "reduced").coefficients
    ff = fit_alpha(g, alpha, "full_kkt").coefficients
    scale = np.maximum(1.0, np.max(np.abs(ff), axis=0))
    assert np.all(np.max(np.abs(fr - ff), axis=0) <= 1e-8 * scale)


def test_reduced_solution_solves_full_system(rng):
    g = random_grouped(rng, 12)
    sys_full = assemble_full_kkt(g, 0.01)
    f = recover_coefficients(solve(assemble_reduced(g, 0.01)).x, g, 0.01)
    r = sys_full.matrix @ f.coefficients.ravel() - sys_full.rhs
    assert np.max(np.abs(r)) <= 1e-10 * (1 + np.max(np.abs(sys_full.rhs)))


# --- invariants ------------------------------------------------------------

@pytest.mark.parametrize("M", [3, 10, 50, 200])
@pytest.mark.parametrize("solver", ["reduced", "full_kkt"])
def test_fitted_quartic_invariants(M, solver):
    g, alpha = experiment_grouped(M, 3)
    f = fit(g, FitConfig(alpha=alpha, solver=solver))
    assert invariant_violations(f, g) == []


@pytest.mark.parametrize("alpha", [1e-8, 1e-4, 1.0])
def test_invariants_random_data(rng, alpha):
    for M in (3, 5, 20, 100):
        g = random_grouped(rng, M)
        assert invariant_violations(fit_alpha(g, alpha), g) == []


def test_invariant_check_detects_breakage(rng):
    g = random_grouped(rng, 6)
    f = fit_alpha(g, 0.01)
    coef = f.coefficients.copy()
    coef[2, 0] += 1e-3
    assert any("derivative 0" in v for v in invariant_violations(PiecewiseQuartic(f.coarse_grid, coef, 0.01), g))
    coef = f.coefficients.copy()
    coef[0, 2] += 1.0
    broken = invariant_violations(PiecewiseQuartic(f.coarse_grid, coef, 0.01), g)
    assert any("natural boundary" in v for v in broken)


# --- evaluation ------------------------------------------------------------

def test_evaluate_examples():
    f = PiecewiseQuartic(UniformGrid(3), np.tile([1.0, 0, 0, 0, 0], (3, 1)), 1.0)
    assert evaluate(f, 0.77) == 1.0
    one = PiecewiseQuartic(UniformGrid(3), np.tile([0.0, 1.0, 0, 0, 0], (3, 1)), 1.0)
    assert evaluate(one, 0.5, 1) == 1.0
    np.testing.assert_array_equal(evaluate(one, np.array([0.0, 0.5, 1.0]), 2), 0.0)


def test_evaluate_errors():
    f = PiecewiseQuartic(UniformGrid(3), np.zeros((3, 5)), 1.0)
    with pytest.raises(DomainError):
        evaluate(f, 1.0000001)
    with pytest.raises(DomainError):
        evaluate(f, np.array([0.5, -1e-12]))
    with pytest.raises(OrderError):
        evaluate(f, 0.5, 5)


def test_knot_convention():
    coef = np.zeros((4, 5))
    coef[:, 0] = [10.0, 20.0, 30.0, 40.0]
    coef[3, 1] = 1.0
    f = PiecewiseQuartic(UniformGrid(4), coef, 1.0)
    assert evaluate(f, 0.25) == 20.0 and evaluate(f, 0.5) == 30.0
    assert evaluate(f, 1.0) == 40.25  # last interval closed on the right


def test_derivative_matches_finite_difference(rng):
    g, alpha = experiment_grouped(10, 1)
    f = fit_alpha(g, alpha)
    delta = 1e-6
    x = rng.uniform(0.01, 0.99, 200)
    x = x[np.abs(x * 10 - np.round(x * 10)) > 1e-4]
    fd = (evaluate(f, x + delta) - evaluate(f, x - delta)) / (2 * delta)
    exact = evaluate(f, x, 1)
    assert np.all(np.abs(fd - exact) <= 1e-5 * (1 + np.abs(exact)))


def test_higher_derivatives_consistent(rng):
    f = fit_alpha(random_grouped(rng, 8), 1e-3)
    x = rng.uniform(0.01, 0.99, 50)
    for order in (1, 2, 3):
        h = 1e-5
        fd = (evaluate(f, np.clip(x + h, 0, 1), order - 1) - evaluate(f, np.clip(x - h, 0, 1), order - 1)) / (2 * h)
        mask = np.abs(x * 8 - np.round(x * 8)) > 1e-3
        np.testing.assert_allclose(fd[mask], evaluate(f, x[mask], order), rtol=1e-5, atol=1e-5)


def test_interval_mean_examples():
    M = 4
    const = PiecewiseQuartic(UniformGrid(M), np.tile([2.5, 0, 0, 0, 0], (M, 1)), 1.0)
    assert all(interval_mean(const, i) == 2.5 for i in range(M))
    lin = PiecewiseQuartic(UniformGrid(M), np.tile([0.0, 1.0, 0, 0, 0], (M, 1)), 1.0)
    assert interval_mean(lin, 2) == pytest.approx(0.125, rel=1e-15)
    with pytest.raises(IndexError):
        interval_mean(lin, M)
    with pytest.raises(IndexError):
        interval_mean(lin, -1)


@pytest.mark.parametrize("M", [3, 10, 50])
def test_interval_mean_matches_quadrature(M):
    g, alpha = experiment_grouped(M, 2)
    f = fit_alpha(g, alpha)
    quad = step_project(lambda x: evaluate(f, x), f.coarse_grid).interval_values
    assert np.max(np.abs(quad - interval_means(f))) <= 1e-10


def test_seminorm_exact():
    # f = x^2 on one piece pattern: f'' = 2, ||f''||^2 = 4, ||f'||^2 = 4/3
    M = 5
    coef = np.zeros((M, 5))
    x0 = np.arange(M) / M
    coef[:, 0], coef[:, 1], coef[:, 2] = x0**2, 2 * x0, 1.0
    f = PiecewiseQuartic(UniformGrid(M), coef, 1.0)
    assert seminorm_sq(f, 2) == pytest.approx(4.0, rel=1e-14)
    assert seminorm_sq(f, 1) == pytest.approx(4 / 3, rel=1e-14)
    assert seminorm_sq(f, 0) == pytest.approx(1 / 5, rel=1e-14)


# --- optimality ------------------------------------------------------------

def test_optimality_gap_identity(rng):
    for _ in range(5):
        g = random_grouped(rng, 10)
        alpha = 10 ** rng.uniform(-6, 0)
        f = fit_alpha(g, alpha)
        phi = objective(f, g)
        for p in random_perturbations(rng, 10, 10):
            gap = objective(add_quartics(f, p), g) - phi
            expected = alpha * seminorm_sq(p, 2) + np.mean(interval_means(p) ** 2)
            assert gap == pytest.approx(expected, rel=1e-8)


def test_stationarity(rng):
    g, alpha = experiment_grouped(10, 4)
    f = fit_alpha(g, alpha)
    phi = objective(f, g)
    for p in random_perturbations(rng, 10, 20):
        step = 1e-6 * np.sqrt(seminorm_sq(p, 0))
        d = (objective(add_quartics(f, p, step), g) - objective(add_quartics(f, p, -step), g)) / (2 * step)
        assert abs(d) <= 1e-6 * phi + 1e-10


@pytest.mark.parametrize("alpha", [1e-4, 1e-2, 1.0])
def test_matches_brute_force(rng, alpha):
    for _ in range(5):
        g = random_grouped(rng, 4, scale=0.5)
        ref = brute_force_minimizer(g, alpha)
        for solver in ("reduced", "full_kkt"):
            f = fit_alpha(g, alpha, solver)
            assert np.max(np.abs(f.coefficients - ref)) <= 1e-6


def test_penalty_monotone_in_alpha(rng):
    g = random_grouped(rng, 4)
    alphas = np.logspace(-6, 1, 15)
    pen = [seminorm_sq(fit_alpha(g, a), 2) for a in alphas]
    assert np.all(np.diff(pen) <= 1e-10)
    # brute-force fits agree on the trend
    ref = []
    for a in alphas:
        c = brute_force_minimizer(g, a)
        ref.append(seminorm_sq(PiecewiseQuartic(g.coarse_grid, c, a), 2))
    np.testing.assert_allclose(pen, ref, rtol=1e-6)


def test_objective_below_competitors(rng):
    g = random_grouped(rng, 6)
    f = fit_alpha(g, 0.05)
    phi = objective(f, g)
    for p in random_perturbations(rng, 6, 10):
        assert objective(add_quartics(f, p, 1e-3), g) > phi


@pytest.mark.parametrize("M", [3, 4, 5, 8, 20, 64, 65, 128, 250, 500])
@pytest.mark.parametrize("alpha", [1e-8, 1e-4, 1.0])
def test_uniqueness_witness(rng, M, alpha):
    g = random_grouped(rng, M)
    sol = solve(assemble_reduced(g, alpha))
    assert np.isfinite(sol.condition) and sol.condition > 0
    if M <= 128:
        assert np.isfinite(solve(assemble_full_kkt(g, alpha)).condition)
