import numpy as np
import pytest

from schurnorm.nlp import NlpProblem, Status, kkt_residual, max_violation, solve


def linear_t(n):
    def objective(z):
        g = np.zeros(n)
        g[-1] = 1.0
        return z[-1], g

    return objective


def test_parabola_epigraph():
    prob = NlpProblem(
        2,
        linear_t(2),
        [lambda z: (z[0] ** 2 - z[1], np.array([2 * z[0], -1.0]))],
        start=np.array([1.0, 2.0]),
    )
    res = solve(prob)
    assert res.ok
    np.testing.assert_allclose(res.z, [0.0, 0.0], atol=1e-6)


def test_active_linear_constraint():
    prob = NlpProblem(1, lambda z: (z[0], np.ones(1)), [lambda z: (1.0 - z[0], -np.ones(1))],
                      start=np.array([5.0]))
    res = solve(prob)
    assert res.ok
    assert res.z[0] == pytest.approx(1.0, abs=1e-8)
    assert res.max_violation <= 1e-8


def test_constrained_rosenbrock():
    def rosen(z):
        x, y = z
        val = (1 - x) ** 2 + 100 * (y - x * x) ** 2
        grad = np.array([-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)])
        return val, grad

    prob = NlpProblem(2, rosen, [lambda z: (z @ z - 2.0, 2 * z)], start=np.zeros(2))
    res = solve(prob, max_iter=500)
    np.testing.assert_allclose(res.z, [1.0, 1.0], atol=1e-6)
    assert res.fun <= 1e-6
    assert res.max_violation <= 1e-8


QPS = [
    # min 1/2 |z - c|^2  s.t.  A z <= b, with the known minimizer
    (np.array([2.0, 2.0]), np.array([[1.0, 1.0]]), np.array([2.0]), np.array([1.0, 1.0])),
    (np.array([-1.0, 3.0]), np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([1.0, 0.0]),
     np.array([0.0, 1.0])),
    (np.array([1.0, 2.0, 3.0]), np.array([[1.0, 1.0, 1.0]]), np.array([3.0]),
     np.array([0.0, 1.0, 2.0])),
]


@pytest.mark.parametrize("c,a,b,expected", QPS)
def test_convex_qps(c, a, b, expected):
    prob = NlpProblem(
        c.size,
        lambda z: (0.5 * (z - c) @ (z - c), z - c),
        [lambda z: (a @ z - b, a)],
        start=np.zeros(c.size),
    )
    res = solve(prob)
    assert res.ok
    np.testing.assert_allclose(res.z, expected, atol=1e-8)
    assert res.kkt_residual <= 1e-8


def test_bounds_respected():
    prob = NlpProblem(2, linear_t(2), [lambda z: (z[0] ** 2 - z[1], np.array([2 * z[0], -1.0]))],
                      bounds=[(None, None), (0.5, None)], start=np.array([1.0, 2.0]))
    res = solve(prob)
    assert res.z[1] == pytest.approx(0.5, abs=1e-8)
    assert res.max_violation <= 1e-8


def test_feasible_start_never_worsened():
    # a tiny iteration budget on a nonconvex problem still returns a point
    # no less feasible than the start
    def cons(z):
        return np.array([np.sin(3 * z[0]) - z[1], z[0] ** 2 - 4]), np.array(
            [[3 * np.cos(3 * z[0]), -1.0], [2 * z[0], 0.0]]
        )

    start = np.array([0.3, 5.0])
    prob = NlpProblem(2, linear_t(2), [cons], start=start)
    res = solve(prob, max_iter=2)
    assert res.max_violation <= max(max_violation(prob, start), 1e-8)
    assert res.status in (Status.MAX_ITERATIONS, Status.CONVERGED, Status.LINE_SEARCH_FAILURE)


def test_deterministic():
    prob = NlpProblem(2, linear_t(2), [lambda z: (np.cosh(z[0] - 0.3) - z[1], np.array([np.sinh(z[0] - 0.3), -1.0]))],
                      start=np.array([2.0, 10.0]))
    a, b = solve(prob), solve(prob)
    assert a.z.tobytes() == b.z.tobytes()
    np.testing.assert_allclose(a.z, [0.3, 1.0], atol=1e-6)


def test_kkt_residual_at_optimum_and_away():
    prob = NlpProblem(1, lambda z: (z[0], np.ones(1)), [lambda z: (1.0 - z[0], -np.ones(1))])
    assert kkt_residual(prob, np.array([1.0])) <= 1e-12
    assert kkt_residual(prob, np.array([3.0])) > 0.1


def test_bad_start_shape():
    with pytest.raises(ValueError):
        NlpProblem(3, linear_t(3), start=np.zeros(2))
