import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcontrol.dense import dense_operator
from nlcontrol.errors import EmptyControlRegionError, InvalidArgumentError, InvalidKernelError
from nlcontrol.grid import (
    assemble_control,
    assemble_operator,
    build_grid,
    kernel_from_samples,
    named_kernel,
    paper_kernel_factors,
    sample_kernel,
)


@pytest.mark.parametrize("n, m, t, nu, h, dt", [
    (60, 100, 1.0, 0.1, 1 / 61, 0.01),
    (1, 1, 1.0, 0.0, 0.5, 1.0),
    (5, 4, 1.0, 0.1, 1 / 6, 0.25),
])
def test_build_grid_spacing(n, m, t, nu, h, dt):
    g = build_grid(n, m, t, nu)
    assert g.h == pytest.approx(h, rel=1e-15)
    assert g.dt == pytest.approx(dt, rel=1e-15)
    assert g.h * (n + 1) == pytest.approx(1.0, abs=1e-15)
    assert g.dt * m == pytest.approx(t, abs=1e-15)
    np.testing.assert_allclose(g.x, np.arange(1, n + 1) * h)
    assert g.t.shape == (m + 1,) and g.t[0] == 0.0


@pytest.mark.parametrize("args", [(0, 10, 1.0, 0.1), (10, 0, 1.0, 0.1), (10, 10, 0.0, 0.1),
                                  (10, 10, -1.0, 0.1), (10, 10, 1.0, -0.1)])
def test_build_grid_rejects_bad_input(args):
    with pytest.raises(InvalidArgumentError):
        build_grid(*args)


def test_paper_kernel_vanishes_right_of_half(paper_grid):
    kern = named_kernel("paper", paper_grid)
    x = paper_grid.x
    assert np.all(kern.k2[x >= 0.5] == 0.0)
    assert np.all(kern.k2[(x > 0) & (x < 0.5)] > 0.0)
    np.testing.assert_allclose(kern.k1, np.sin(5 * np.pi * x))


def test_trivial_kernels():
    g = build_grid(3, 2)
    assert np.all(sample_kernel(lambda x: 0.0, np.cos, g).k1 == 0)
    k = sample_kernel(lambda x: 1.0, lambda x: 1.0, g)
    np.testing.assert_array_equal(k.k1, [1, 1, 1])
    np.testing.assert_array_equal(k.k2, [1, 1, 1])


def test_non_finite_kernel_rejected():
    g = build_grid(3, 2)
    with pytest.raises(InvalidKernelError), np.errstate(divide="ignore"):
        sample_kernel(lambda x: 1.0 / (x - x[1]), lambda x: 1.0, g)
    with pytest.raises(InvalidKernelError):
        named_kernel("gaussian", g)


def test_two_node_rank_one_operator():
    g = build_grid(2, 1, 1.0, 0.0)
    a, b, c, d = 0.3, -1.1, 2.0, 0.7
    op = assemble_operator(g, kernel_from_samples([a, b], [c, d], g))
    np.testing.assert_allclose(op.dense(), np.array([[a * c, a * d], [b * c, b * d]]) / 3,
                               rtol=1e-15)


def test_zero_kernel_gives_pure_laplacian():
    g = build_grid(3, 1, 1.0, 0.1)
    op = assemble_operator(g, named_kernel("zero", g))
    c = 0.1 / g.h**2
    expected = np.array([[2 * c, -c, 0], [-c, 2 * c, -c], [0, -c, 2 * c]])
    np.testing.assert_allclose(op.dense(), expected, rtol=1e-15)


def test_paper_operator_matches_brute_force(paper_grid):
    k1f, k2f = paper_kernel_factors()
    x = paper_grid.x
    brute = dense_operator(paper_grid, [k1f(xi) for xi in x], [k2f(xi) for xi in x])
    op = assemble_operator(paper_grid, named_kernel("paper", paper_grid))
    np.testing.assert_allclose(op.dense(), brute, rtol=0, atol=1e-14 * np.abs(brute).max())


def test_operator_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        assemble_operator(build_grid(4, 1), named_kernel("paper", build_grid(5, 1)))


def test_structured_matvec_matches_dense(paper_grid, rng):
    op = assemble_operator(paper_grid, named_kernel("paper", paper_grid))
    a = op.dense()
    for _ in range(100):
        y = rng.standard_normal(paper_grid.n_interior)
        assert np.max(np.abs(op.matvec(y) - a @ y)) <= 1e-12 * np.abs(a).max() * np.abs(y).sum()


def test_transpose(paper_grid, rng):
    op = assemble_operator(paper_grid, named_kernel("paper", paper_grid))
    np.testing.assert_allclose(op.transpose().dense(), op.dense().T)
    for _ in range(20):
        y, z = rng.standard_normal((2, paper_grid.n_interior))
        lhs, rhs = op.matvec(y) @ z, y @ op.rmatvec(z)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_control_region_paper():
    g = build_grid(60, 100)
    mask = assemble_control(g, (0.2, 0.8)).mask
    # enumerate nodes i/61 strictly inside (0.2, 0.8)
    expected = [i for i in range(1, 61) if 0.2 < i / 61 < 0.8]
    assert expected == list(range(13, 49))
    np.testing.assert_array_equal(np.flatnonzero(mask) + 1, expected)


def test_control_region_full_and_empty():
    assert assemble_control(build_grid(7, 1), (0.0, 1.0)).mask.all()
    with pytest.raises(EmptyControlRegionError):
        assemble_control(build_grid(4, 1), (0.9, 0.95))
    with pytest.raises(InvalidArgumentError):
        assemble_control(build_grid(4, 1), (0.5, 0.3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=8),
       st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=8))
def test_control_operator_idempotent_and_symmetric(y, z):
    b = assemble_control(build_grid(8, 1), (0.2, 0.7))
    y, z = np.array(y), np.array(z)
    np.testing.assert_array_equal(b.apply(b.apply(y)), b.apply(y))
    assert b.apply(y) @ z == y @ b.apply(z)


def test_riemann_sum_quadrature_first_order():
    # K1 = cos(x), K2 = exp(theta), y = sin(pi theta):  int_0^1 e^t sin(pi t) dt = pi (e + 1) / (1 + pi^2)
    exact_int = np.pi * (np.e + 1) / (1 + np.pi**2)
    errors = []
    for n in (20, 40, 80, 160):
        g = build_grid(n, 1, 1.0, 0.0)
        op = assemble_operator(g, sample_kernel(np.cos, np.exp, g))
        approx = op.matvec(np.sin(np.pi * g.x))
        errors.append(np.max(np.abs(approx - np.cos(g.x) * exact_int)))
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(rates > 0.9)
