"""Neural-network Schur test functions and the discretized minimax objective.

The pair of test functions is ``p = N1**2 + 0.01`` and ``q = N2**2 + 0.01``
where ``N = M2 @ sigma(M1 x + b1) + b2`` is a (1, 30, 2) network with the
activation ``sigma(y) = 1 / (1 + y**2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchurNormError
from .quadrature import QuadGrid

HIDDEN = 30
N_PARAMS = HIDDEN + HIDDEN + 2 * HIDDEN + 2  # m1, b1, m2, b2
FLOOR = 0.01
DEFAULT_SEED = 20250101


def sigma(y):
    return 1.0 / (1.0 + y * y)


def dsigma(y):
    return -2.0 * y / (1.0 + y * y) ** 2


@dataclass(frozen=True, eq=False)
class SchurModel:
    """Flat parameter vector in the order ``(m1, b1, m2, b2)``; ``m2`` row-major."""

    params: np.ndarray

    def __post_init__(self):
        params = np.array(self.params, dtype=float).ravel()
        if params.size != N_PARAMS:
            raise ValueError(f"expected {N_PARAMS} parameters, got {params.size}")
        if not np.all(np.isfinite(params)):
            raise ValueError("model parameters must be finite")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)

    @property
    def m1(self):
        return self.params[:HIDDEN]

    @property
    def b1(self):
        return self.params[HIDDEN : 2 * HIDDEN]

    @property
    def m2(self):
        return self.params[2 * HIDDEN : 4 * HIDDEN].reshape(2, HIDDEN)

    @property
    def b2(self):
        return self.params[4 * HIDDEN :]

    @classmethod
    def zeros(cls) -> "SchurModel":
        return cls(np.zeros(N_PARAMS))

    @classmethod
    def random(cls, seed: int = DEFAULT_SEED) -> "SchurModel":
        """Uniform draw from ``[-1, 1]^122`` using numpy's PCG64 generator."""
        rng = np.random.default_rng(seed)
        return cls(rng.uniform(-1.0, 1.0, N_PARAMS))


def eval_n(model: SchurModel, x):
    """Network output ``(N1(x), N2(x))``; broadcasts over ``x``."""
    x = np.asarray(x, dtype=float)
    z = np.multiply.outer(x, model.m1) + model.b1
    out = sigma(z) @ model.m2.T + model.b2
    return out[..., 0], out[..., 1]


def _n_with_jac(model: SchurModel, x: np.ndarray):
    """Outputs and Jacobians ``dN_k / dparams`` at nodes ``x``, each (m, 122)."""
    z = np.multiply.outer(x, model.m1) + model.b1
    h, dh = sigma(z), dsigma(z)
    out = h @ model.m2.T + model.b2
    m = x.size
    jacs = []
    for k in range(2):
        jac = np.zeros((m, N_PARAMS))
        chain = dh * model.m2[k]
        jac[:, :HIDDEN] = chain * x[:, None]
        jac[:, HIDDEN : 2 * HIDDEN] = chain
        start = 2 * HIDDEN + k * HIDDEN
        jac[:, start : start + HIDDEN] = h
        jac[:, 4 * HIDDEN + k] = 1.0
        jacs.append(jac)
    return out[:, 0], out[:, 1], jacs[0], jacs[1]


def eval_pq(model: SchurModel, grid: QuadGrid):
    n1, n2 = eval_n(model, grid.nodes)
    return n1 * n1 + FLOOR, n2 * n2 + FLOOR


@dataclass(frozen=True, eq=False)
class SchurField:
    p: np.ndarray
    q: np.ndarray
    rx: np.ndarray
    ry: np.ndarray

    @property
    def kappa_x(self) -> float:
        return float(self.rx.max())

    @property
    def kappa_y(self) -> float:
        return float(self.ry.max())

    @property
    def estimate(self) -> float:
        """Schur test bound ``sqrt(kappa_x * kappa_y)`` over the grid."""
        return float(np.sqrt(self.kappa_x * self.kappa_y))


def ratios(kabs, model: SchurModel, grid_theta: QuadGrid, grid_s: QuadGrid) -> SchurField:
    kabs = np.asarray(kabs, dtype=float)
    p, _ = eval_pq(model, grid_theta)
    _, q = eval_pq(model, grid_s)
    rx = (kabs @ (grid_s.weights * q)) / p
    ry = ((grid_theta.weights * p) @ kabs) / q
    return SchurField(p=p, q=q, rx=rx, ry=ry)


def pair_value(field: SchurField, i: int, j: int) -> float:
    if not (0 <= i < field.rx.size and 0 <= j < field.ry.size):
        raise IndexError(f"pair ({i}, {j}) out of range")
    return float(field.rx[i] * field.ry[j])


def objective_grad(kabs, model: SchurModel, grid_theta: QuadGrid, grid_s: QuadGrid, pairs):
    """Values ``F(i, j) = rx(i) * ry(j)`` and their exact parameter Jacobian."""
    kabs = np.asarray(kabs, dtype=float)
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise SchurNormError("objective_grad needs at least one pair")
    ii, jj = pairs[:, 0], pairs[:, 1]

    n1, _, j1, _ = _n_with_jac(model, grid_theta.nodes)
    _, n2, _, j2 = _n_with_jac(model, grid_s.nodes)
    p = n1 * n1 + FLOOR
    q = n2 * n2 + FLOOR
    dp = 2.0 * n1[:, None] * j1
    dq = 2.0 * n2[:, None] * j2

    kw_s = kabs * grid_s.weights
    kw_t = kabs * grid_theta.weights[:, None]
    rows = kw_s[ii]
    cols = kw_t[:, jj].T
    a = rows @ q
    b = cols @ p
    pi, qj = p[ii], q[jj]
    rx = a / pi
    ry = b / qj
    drx = (rows @ dq) / pi[:, None] - (a / pi**2)[:, None] * dp[ii]
    dry = (cols @ dp) / qj[:, None] - (b / qj**2)[:, None] * dq[jj]
    values = rx * ry
    jac = drx * ry[:, None] + rx[:, None] * dry
    return values, jac


class SchurProblem:
    """Minimax family over grid pairs for a fixed sampled ``|K|``.

    Exposes the interface the minimax engine expects: ``n_params``,
    ``grid_values(params)`` and ``pair_values(params, pairs)``.
    """

    n_params = N_PARAMS

    def __init__(self, kabs, grid_theta: QuadGrid, grid_s: QuadGrid):
        self.kabs = np.asarray(kabs, dtype=float)
        if np.any(self.kabs < 0):
            raise ValueError("kernel modulus samples must be nonnegative")
        self.grid_theta = grid_theta
        self.grid_s = grid_s

    @property
    def shape(self):
        return self.kabs.shape

    def field(self, params) -> SchurField:
        return ratios(self.kabs, SchurModel(params), self.grid_theta, self.grid_s)

    def grid_values(self, params) -> np.ndarray:
        f = self.field(params)
        return np.multiply.outer(f.rx, f.ry)

    def pair_values(self, params, pairs):
        return objective_grad(
            self.kabs, SchurModel(params), self.grid_theta, self.grid_s, pairs
        )
