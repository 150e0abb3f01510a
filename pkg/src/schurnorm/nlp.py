"""Smooth inequality-constrained local NLP solves (SLSQP backend).

Constraints follow the convention ``g(z) <= 0``. Each constraint callable
returns ``(value, gradient)``; a callable may also be vector valued, in which
case it returns an array of values and the matching Jacobian.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, nnls

FEAS_TOL = 1e-8
_ACTIVE_TOL = 1e-6
_POLISH_ROUNDS = 3


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass
class NlpProblem:
    n: int
    objective: Callable
    constraints: Sequence[Callable] = field(default_factory=list)
    bounds: Optional[Sequence] = None
    start: Optional[np.ndarray] = None

    def __post_init__(self):
        self.start = np.zeros(self.n) if self.start is None else np.asarray(self.start, float)
        if self.start.shape != (self.n,):
            raise ValueError(f"start must have shape ({self.n},)")


@dataclass
class NlpResult:
    z: np.ndarray
    status: Status
    fun: float
    max_violation: float
    kkt_residual: float
    nit: int

    @property
    def ok(self) -> bool:
        return self.status is Status.CONVERGED


def _stack_constraints(problem: NlpProblem, z):
    vals, jacs = [], []
    for con in problem.constraints:
        v, g = con(z)
        v = np.atleast_1d(np.asarray(v, float))
        g = np.asarray(g, float).reshape(v.size, problem.n)
        vals.append(v)
        jacs.append(g)
    if not vals:
        return np.zeros(0), np.zeros((0, problem.n))
    return np.concatenate(vals), np.vstack(jacs)


def _bound_arrays(problem: NlpProblem):
    lo = np.full(problem.n, -np.inf)
    hi = np.full(problem.n, np.inf)
    if problem.bounds is not None:
        for k, (l, u) in enumerate(problem.bounds):
            if l is not None:
                lo[k] = l
            if u is not None:
                hi[k] = u
    return lo, hi


def max_violation(problem: NlpProblem, z) -> float:
    g, _ = _stack_constraints(problem, z)
    lo, hi = _bound_arrays(problem)
    viol = [0.0]
    if g.size:
        viol.append(float(np.max(g)))
    viol.append(float(np.max(lo - z)))
    viol.append(float(np.max(z - hi)))
    return max(viol)


def kkt_residual(problem: NlpProblem, z) -> float:
    """Stationarity residual with nonnegative multipliers on near-active constraints.

    Solves ``min ||grad f + J_A^T lam||`` over ``lam >= 0`` and returns the
    residual scaled by ``1 + ||grad f||``.
    """
    _, grad = problem.objective(z)
    grad = np.asarray(grad, float)
    g, jac = _stack_constraints(problem, z)
    lo, hi = _bound_arrays(problem)
    rows = [jac[g >= -_ACTIVE_TOL]]
    eye = np.eye(problem.n)
    rows.append(-eye[lo - z >= -_ACTIVE_TOL])
    rows.append(eye[z - hi >= -_ACTIVE_TOL])
    active = np.vstack(rows)
    if active.shape[0] == 0:
        res = float(np.linalg.norm(grad))
    else:
        _, res = nnls(active.T, -grad, maxiter=50 * max(active.shape))
    return res / (1.0 + float(np.linalg.norm(grad)))


def solve(problem: NlpProblem, kkt_tol: float = 1e-8, max_iter: int = 200) -> NlpResult:
    """Local solve from ``problem.start``.

    The returned point has the smallest constraint violation seen between the
    start and the SLSQP result, so a feasible start is never made worse.
    """
    cache = {}

    def cons(z):
        key = z.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = _stack_constraints(problem, z)
        return cache[key]

    scipy_cons = []
    if problem.constraints:
        scipy_cons.append(
            {
                "type": "ineq",
                "fun": lambda z: -cons(z)[0],
                "jac": lambda z: -cons(z)[1],
            }
        )
    bounds = None
    if problem.bounds is not None:
        bounds = [(l, u) for l, u in problem.bounds]

    def run(start, ftol, iters):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return minimize(
                lambda z: problem.objective(z)[0],
                start,
                jac=lambda z: np.asarray(problem.objective(z)[1], float),
                method="SLSQP",
                bounds=bounds,
                constraints=scipy_cons,
                options={"maxiter": iters, "ftol": ftol},
            )

    # SLSQP stops on a small change of the objective, which can happen well
    # before stationarity; restart with a tighter ftol while the KKT test fails.
    ftol = kkt_tol
    res = run(problem.start, ftol, max_iter)
    nit = int(res.nit)
    for _ in range(_POLISH_ROUNDS):
        if res.status != 0 or not np.all(np.isfinite(res.x)) or nit >= max_iter:
            break
        if kkt_residual(problem, res.x) <= kkt_tol and max_violation(problem, res.x) <= FEAS_TOL:
            break
        ftol = max(ftol * 1e-3, 1e-16)
        res = run(res.x, ftol, max_iter - nit)
        nit += int(res.nit)

    z = np.asarray(res.x, float)
    viol = max_violation(problem, z) if np.all(np.isfinite(z)) else np.inf
    start_viol = max_violation(problem, problem.start)
    if not viol <= max(start_viol, FEAS_TOL):
        z, viol = problem.start.copy(), start_viol
        status = Status.LINE_SEARCH_FAILURE
    elif res.status == 9:
        status = Status.MAX_ITERATIONS
    else:
        kkt = kkt_residual(problem, z)
        if res.status == 0 and viol <= FEAS_TOL and kkt <= kkt_tol:
            status = Status.CONVERGED
        else:
            status = Status.LINE_SEARCH_FAILURE
    fun = float(problem.objective(z)[0])
    return NlpResult(
        z=z,
        status=status,
        fun=fun,
        max_violation=viol,
        kkt_residual=kkt_residual(problem, z),
        nit=nit,
    )
