import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurnorm.errors import BadGridSize, DimensionMismatch, LengthMismatch
from schurnorm.kernel import KernelParams, kernel_kbar_abs, sample_k, sample_sides
from schurnorm.quadrature import integrate_1d, integrate_2d, make_grid, sample_kernel

odd_m = st.integers(1, 200).map(lambda k: 2 * k + 1)


def test_three_point_rule():
    g = make_grid(1.0, 3)
    np.testing.assert_array_equal(g.nodes, [-1.0, -0.5, 0.0])
    np.testing.assert_allclose(g.weights, [1 / 6, 4 / 6, 1 / 6], rtol=1e-15)


def test_five_point_rule_tau_two():
    g = make_grid(2.0, 5)
    np.testing.assert_allclose(g.weights, 0.5 / 3 * np.array([1, 4, 2, 4, 1]), rtol=1e-15)


@pytest.mark.parametrize("m", [0, 1, 2, 4, 250])
def test_bad_sizes(m):
    with pytest.raises(BadGridSize):
        make_grid(1.0, m)


def test_grid_is_immutable():
    g = make_grid(1.0, 5)
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0


@settings(max_examples=40, deadline=None)
@given(tau=st.floats(0.05, 10.0), m=odd_m)
def test_grid_invariants(tau, m):
    g = make_grid(tau, m)
    assert abs(g.weights.sum() - tau) <= 1e-12 * tau
    assert np.all(g.weights > 0)
    assert g.nodes[0] == -tau and g.nodes[-1] == 0.0
    assert np.all(np.diff(g.nodes) > 0)


@settings(max_examples=40, deadline=None)
@given(tau=st.floats(0.1, 5.0), m=odd_m, coef=st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_exact_for_cubics(tau, m, coef):
    g = make_grid(tau, m)
    poly = np.polynomial.Polynomial(coef)
    anti = poly.integ()
    exact = anti(0.0) - anti(-tau)
    scale = max(1.0, np.abs(poly(g.nodes)).max() * tau)
    assert abs(integrate_1d(poly(g.nodes), g) - exact) <= 1e-13 * scale


def test_simple_integrals():
    g = make_grid(1.0, 3)
    assert integrate_1d(g.nodes**2, g) == pytest.approx(1 / 3, abs=1e-15)
    g = make_grid(2.5, 11)
    assert integrate_1d(np.ones(11), g) == pytest.approx(2.5, rel=1e-14)
    g = make_grid(1.0, 251)
    assert abs(integrate_1d(np.exp(g.nodes), g) - (1 - np.exp(-1))) <= 1e-10


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        integrate_1d(np.ones(4), make_grid(1.0, 5))


def test_sample_triangular_indicator():
    g = make_grid(1.0, 3)
    tri = sample_kernel(lambda th, s: kernel_kbar_abs(KernelParams(0.0, 0.0), th, s), g, g)
    expected = (g.nodes[:, None] + g.nodes[None, :] >= -1.0).astype(float)
    np.testing.assert_array_equal(tri, expected)


def test_sample_constant():
    g = make_grid(1.0, 5)
    np.testing.assert_array_equal(sample_kernel(lambda th, s: 1.0, g, g), np.ones((5, 5)))


def test_sample_diagonal_kernel_matches_closed_form():
    params = KernelParams(-0.3, 0.0, 1.0, 0.05, 2.0)
    g = make_grid(1.0, 251)
    th, s = g.nodes[:, None], g.nodes[None, :]
    support = np.where(np.isclose(th + s, -1.0, atol=1e-12), 0.5, (th + s > -1.0).astype(float))
    expected = -support * np.exp((params.a - params.p) * (th + 1.0 + s))
    assert np.abs(sample_k(params, g, g) - expected).max() <= 1e-12


def test_jump_line_passes_through_nodes():
    g = make_grid(1.0, 251)
    i = np.arange(g.m)
    np.testing.assert_allclose(g.nodes[i] + g.nodes[g.m - 1 - i], -1.0, atol=1e-14)


def test_integrate_2d_area_and_separable():
    g1, g2 = make_grid(1.0, 21), make_grid(2.0, 11)
    assert integrate_2d(np.ones((21, 11)), g1, g2) == pytest.approx(2.0, rel=1e-14)
    f, h = np.cos(g1.nodes), np.exp(g2.nodes)
    prod = integrate_2d(np.outer(f, h), g1, g2)
    assert abs(prod - integrate_1d(f, g1) * integrate_1d(h, g2)) <= 1e-12


def test_integrate_2d_dimension_mismatch():
    g = make_grid(1.0, 5)
    with pytest.raises(DimensionMismatch):
        integrate_2d(np.ones((5, 7)), g, g)


def test_triangle_area():
    g = make_grid(1.0, 251)
    sq = sample_sides(kernel_kbar_abs, KernelParams(0.0, 0.0), g, g).modulus_sq
    assert abs(integrate_2d(sq, g, g) - 0.5) <= 1e-6


def test_jump_sides_differ_only_on_line():
    g = make_grid(1.0, 21)
    samples = sample_sides(kernel_kbar_abs, KernelParams(0.0, 0.0), g, g)
    diff = samples.closed != samples.open
    np.testing.assert_array_equal(diff, np.fliplr(np.eye(21, dtype=bool)))
    np.testing.assert_array_equal(samples.values[diff], 0.5)
