import numpy as np
import pytest

from nlcontrol.dense import dense_optimal_control
from nlcontrol.errors import InvalidArgumentError, NonConvergenceError
from nlcontrol.evolution import inner, norm, solve_forward
from nlcontrol.iterative import SolverConfig, conjugate_gradient
from nlcontrol.optimal import (
    ControlSetup,
    cost_J,
    free_state,
    grad_J,
    normal_operator,
    normal_rhs,
    solve_optimal_control,
)

from reference_values import CROSS_DATUM_GAMMA1, OPTIMAL_CONTROL_NORM, REL_TOL


@pytest.fixture(scope="module")
def paper_solutions(paper_dyn, paper_grid, paper_target):
    y0 = 2 * np.sin(np.pi * paper_grid.x)
    out = {}
    for beta in OPTIMAL_CONTROL_NORM:
        setup = ControlSetup(paper_dyn, beta, paper_target, y0)
        out[beta] = (setup, *solve_optimal_control(setup))
    return out


def test_uncontrolled_cost_is_pure_tracking(paper_dyn, paper_grid, paper_target):
    y0 = 2 * np.sin(np.pi * paper_grid.x)
    setup = ControlSetup(paper_dyn, 100.0, paper_target, y0)
    total, parts = cost_J(setup, np.zeros(paper_grid.shape))
    ybar = solve_forward(paper_dyn, None, y0)[1:]
    assert parts.cost_control == 0.0
    assert total == 100.0 * norm(paper_grid, ybar - paper_target) ** 2


@pytest.mark.parametrize("datum, y0", [
    ("const(3)", lambda x: np.full_like(x, 3.0)),
    ("sin10", lambda x: np.sin(np.pi * x) ** 10),
])
def test_uncontrolled_cost_reference(paper_dyn, paper_grid, paper_target, datum, y0):
    setup = ControlSetup(paper_dyn, 100.0, paper_target, y0(paper_grid.x))
    total, parts = cost_J(setup, np.zeros(paper_grid.shape))
    j_ref, dist_ref = CROSS_DATUM_GAMMA1[datum][:2]
    # the tabulated energy carries a factor 1/2
    assert total / 2 == pytest.approx(j_ref, rel=REL_TOL)
    assert parts.distance == pytest.approx(dist_ref, rel=REL_TOL)


def test_gradient_vanishes_for_zero_data(tiny_dyn, tiny_grid):
    setup = ControlSetup(tiny_dyn, 5.0, np.zeros(tiny_grid.shape))
    assert np.all(grad_J(setup, np.zeros(tiny_grid.shape)) == 0)


def test_gradient_central_difference(paper_dyn, paper_grid, paper_target, rng):
    setup = ControlSetup(paper_dyn, 10.0, paper_target, 2 * np.sin(np.pi * paper_grid.x))
    eps = 1e-5
    for _ in range(5):
        v, w = rng.standard_normal((2, *paper_grid.shape))
        fd = (cost_J(setup, v + eps * w)[0] - cost_J(setup, v - eps * w)[0]) / (2 * eps)
        an = inner(paper_grid, grad_J(setup, v), w)
        assert abs(fd - an) <= 1e-5 * abs(an)


def test_gradient_small_at_minimizer(paper_solutions):
    setup, v, report = paper_solutions[100.0]
    g = grad_J(setup, v)
    rhs = normal_rhs(setup)
    # grad = 2 (H v - rhs)
    assert np.linalg.norm(g) <= 2 * 1e-8 * np.linalg.norm(rhs)
    assert report.residual <= 1e-8


@pytest.mark.parametrize("beta", sorted(OPTIMAL_CONTROL_NORM))
def test_control_norm_reference(paper_solutions, beta):
    _, _, report = paper_solutions[beta]
    assert report.control_norm == pytest.approx(OPTIMAL_CONTROL_NORM[beta], rel=REL_TOL)


def test_monotone_in_beta(paper_solutions):
    reports = [paper_solutions[b][2] for b in sorted(paper_solutions)]
    costs = [r.control_norm for r in reports]
    dists = [r.distance for r in reports]
    assert costs[0] < costs[1] < costs[2]
    assert dists[0] > dists[1] > dists[2]


def test_report_parts_sum(paper_solutions):
    for setup, v, r in paper_solutions.values():
        assert r.cost_total == pytest.approx(r.cost_tracking + r.cost_control + r.offset, abs=1e-10)
        assert r.regret_term is None


def test_target_equal_to_free_state_gives_zero_control(paper_dyn, paper_grid):
    y0 = 2 * np.sin(np.pi * paper_grid.x)
    setup0 = ControlSetup(paper_dyn, 100.0, np.zeros(paper_grid.shape), y0)
    setup = ControlSetup(paper_dyn, 100.0, free_state(setup0), y0)
    v, report = solve_optimal_control(setup)
    assert np.all(v == 0) and report.iterations == 0 and report.residual == 0.0


def test_matches_dense_normal_equation(tiny_dyn, tiny_grid, tiny_mats, rng):
    target = rng.standard_normal(tiny_grid.shape)
    y0 = rng.standard_normal(tiny_grid.n_interior)
    setup = ControlSetup(tiny_dyn, 10.0, target, y0)
    v, _ = solve_optimal_control(setup, SolverConfig(tol=1e-13))
    ref = dense_optimal_control(tiny_mats, 10.0, target, y0)
    np.testing.assert_allclose(v, ref, rtol=0, atol=1e-8 * np.abs(ref).max())


def test_normal_operator_symmetric_positive(paper_dyn, paper_grid, paper_target, rng):
    setup = ControlSetup(paper_dyn, 100.0, paper_target)
    h_op = normal_operator(setup)
    mask = paper_dyn.control.mask
    for _ in range(5):
        v, w = rng.standard_normal((2, *paper_grid.shape))
        a, b = inner(paper_grid, h_op(v), w), inner(paper_grid, v, h_op(w))
        assert abs(a - b) <= 1e-10 * max(abs(a), abs(b))
        vm = v * mask
        bv = norm(paper_grid, vm) ** 2
        assert inner(paper_grid, h_op(vm), vm) >= bv > 0


def test_minimizer_beats_perturbations(paper_solutions, paper_grid, rng):
    setup, v, report = paper_solutions[10.0]
    for _ in range(5):
        w = rng.standard_normal(paper_grid.shape)
        assert report.cost_total <= cost_J(setup, v + 1e-3 * w)[0]


def test_gradient_descent_agrees_with_cg(paper_dyn, paper_grid, paper_target, paper_solutions):
    setup, v_cg, _ = paper_solutions[10.0]
    v_gd, report = solve_optimal_control(setup, SolverConfig(method="gd", tol=1e-6, max_iter=5000))
    assert report.residual <= 1e-6
    assert norm(paper_grid, v_gd - v_cg) <= 1e-4 * norm(paper_grid, v_cg)


def test_nonconvergence_carries_iterate(paper_dyn, paper_grid, paper_target):
    setup = ControlSetup(paper_dyn, 1000.0, paper_target, 2 * np.sin(np.pi * paper_grid.x))
    with pytest.raises(NonConvergenceError) as info:
        solve_optimal_control(setup, SolverConfig(max_iter=2))
    assert info.value.iterate.shape == paper_grid.shape
    assert info.value.residual > 1e-8 and len(info.value.history) == 3


def test_cg_on_small_spd_system(rng):
    a = rng.standard_normal((8, 8))
    a = a @ a.T + 8 * np.eye(8)
    b = rng.standard_normal(8)
    res = conjugate_gradient(lambda x: a @ x, b, tol=1e-12)
    np.testing.assert_allclose(res.x, np.linalg.solve(a, b), rtol=1e-10)
    assert res.iterations <= 8 + 2


def test_setup_validation(tiny_dyn, tiny_grid):
    with pytest.raises(InvalidArgumentError):
        ControlSetup(tiny_dyn, 0.0, np.zeros(tiny_grid.shape))
    with pytest.raises(InvalidArgumentError):
        ControlSetup(tiny_dyn, 1.0, np.zeros((3, 5)))
    with pytest.raises(InvalidArgumentError):
        SolverConfig(method="newton")
    with pytest.raises(InvalidArgumentError):
        cost_J(ControlSetup(tiny_dyn, 1.0, np.zeros(tiny_grid.shape)), np.zeros((2, 2)))
