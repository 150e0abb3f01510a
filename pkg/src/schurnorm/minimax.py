"""Iterative nonlinear programming for discrete minimax problems.

The engine minimizes ``max_{i,j} F(i, j; z)`` over parameters ``z`` by
enforcing the maximum only on a growing set of reference pairs.  Each step
solves the epigraph problem

    minimize t  subject to  F(i, j; z) <= t  for every reference (i, j),
                            t >= t_start - delta_step

and then adds the full-grid maximizer of the new iterate to the set.

A problem object supplies ``n_params``, ``grid_values(z)`` (the full matrix
of ``F``) and ``pair_values(z, pairs)`` (values and Jacobian on given pairs).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from . import nlp
from .errors import SolverFailure

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReferencePoint:
    i: int
    j: int
    added_at: int


@dataclass(frozen=True)
class HistoryEntry:
    t: float
    n_refs: int
    grid_max: float


@dataclass(frozen=True, eq=False)
class OptState:
    """Optimizer state; ``t`` is the optimized maximum over reference pairs.

    ``iteration`` counts steps for the current problem, ``total_iterations``
    never resets and is what reference tags refer to.
    """

    params: np.ndarray
    t: float
    refs: Tuple[ReferencePoint, ...] = ()
    iteration: int = 0
    total_iterations: int = 0
    history: Tuple[HistoryEntry, ...] = ()

    def pairs(self) -> np.ndarray:
        return np.array([(r.i, r.j) for r in self.refs], dtype=int).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "params": [float(x) for x in self.params],
            "t": float(self.t),
            "refs": [[r.i, r.j, r.added_at] for r in self.refs],
            "iteration": self.iteration,
            "total_iterations": self.total_iterations,
            "history": [[h.t, h.n_refs, h.grid_max] for h in self.history],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptState":
        return cls(
            params=np.asarray(d["params"], dtype=float),
            t=float(d["t"]),
            refs=tuple(ReferencePoint(int(i), int(j), int(k)) for i, j, k in d["refs"]),
            iteration=int(d["iteration"]),
            total_iterations=int(d.get("total_iterations", d["iteration"])),
            history=tuple(HistoryEntry(float(t), int(n), float(g)) for t, n, g in d.get("history", [])),
        )


@dataclass
class OptimizeOptions:
    delta_step: float = 0.005
    gap_tol: float = 1e-6
    stall_tol: float = 1e-9
    stall_window: int = 10
    max_outer: int = 5000
    kkt_tol: float = 1e-8
    max_inner: int = 200


def init_state(problem, params) -> OptState:
    params = np.array(params, dtype=float)
    t0 = float(np.max(problem.grid_values(params)))
    return OptState(params=params, t=t0)


def _argmax(values: np.ndarray) -> Tuple[int, int]:
    # np.argmax on the C-ordered ravel picks the lowest (i, then j) among ties
    flat = int(np.argmax(values))
    i, j = np.unravel_index(flat, values.shape)
    return int(i), int(j)


def collect_reference(state: OptState, values: np.ndarray) -> OptState:
    """Add the maximizer of the full-grid values, tagged with the current iteration."""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    i, j = _argmax(values)
    if any(r.i == i and r.j == j for r in state.refs):
        return state
    ref = ReferencePoint(i, j, state.total_iterations)
    return replace(state, refs=state.refs + (ref,))


def ref_max(state: OptState, problem, params=None) -> float:
    if not state.refs:
        return -np.inf
    params = state.params if params is None else params
    vals, _ = problem.pair_values(params, state.pairs())
    return float(np.max(vals))


_RETRY_RADII = (None, 1.0, 1e-1, 1e-2, 1e-3)


def step(state: OptState, problem, delta_step: float = 0.005,
         opts: Optional[OptimizeOptions] = None) -> OptState:
    """One NLP solve over the current reference pairs."""
    if not state.refs:
        raise ValueError("step needs at least one reference point")
    opts = opts or OptimizeOptions(delta_step=delta_step)
    n = problem.n_params
    pairs = state.pairs()
    t_start = max(state.t, ref_max(state, problem))
    z0 = np.append(state.params, t_start)

    def objective(z):
        g = np.zeros(n + 1)
        g[-1] = 1.0
        return z[-1], g

    def constraints(z):
        vals, jac = problem.pair_values(z[:-1], pairs)
        full = np.hstack([jac, -np.ones((len(pairs), 1))])
        return vals - z[-1], full

    t_bound = (t_start - delta_step, None)

    def solve(radius):
        if radius is None:
            box = [(None, None)] * n
        else:
            box = [(c - radius, c + radius) for c in state.params]
        result = nlp.solve(
            nlp.NlpProblem(n + 1, objective, [constraints], box + [t_bound], z0),
            kkt_tol=opts.kkt_tol,
            max_iter=opts.max_inner,
        )
        if not np.all(np.isfinite(result.z)):
            raise SolverFailure("NLP returned a non-finite iterate", state)
        params = result.z[:-1]
        # t is a slack variable: lifting it to the constraint maximum restores
        # exact feasibility without touching the model.
        attained = ref_max(state, problem, params)
        if not np.isfinite(attained):
            raise SolverFailure("constraint values are not finite at the NLP iterate", state)
        return result, params, max(float(result.z[-1]), attained)

    # SLSQP occasionally wanders off from a feasible start; retry inside
    # shrinking boxes around the current parameters before giving up
    for radius in _RETRY_RADII:
        result, params, t_new = solve(radius)
        if t_new <= t_start + 1e-12 * max(1.0, abs(t_start)):
            break
        log.debug("inner solve ended above its start (%.6g > %.6g), radius %s",
                  t_new, t_start, radius)
    else:
        raise SolverFailure(
            f"NLP iterate is worse than its start ({t_new:.6g} > {t_start:.6g}, "
            f"status {result.status.value})",
            state,
        )
    if not result.ok:
        log.debug("inner solve status %s accepted at t=%.8g", result.status.value, t_new)
    grid_max = float(np.max(problem.grid_values(params)))
    entry = HistoryEntry(t_new, len(state.refs), grid_max)
    return replace(
        state,
        params=params,
        t=t_new,
        iteration=state.iteration + 1,
        total_iterations=state.total_iterations + 1,
        history=state.history + (entry,),
    )


def _stalled(state: OptState, window: int, tol: float) -> bool:
    h = state.history
    if len(h) <= window:
        return False
    recent = [e.t for e in h[-window - 1 :]]
    return max(recent) - min(recent) < tol


def is_converged(state: OptState, problem, opts: OptimizeOptions, values=None) -> bool:
    if not state.refs:
        return False
    if values is None:
        values = problem.grid_values(state.params)
    gap_ok = float(np.max(values)) <= ref_max(state, problem) + opts.gap_tol * (1.0 + abs(state.t))
    return gap_ok and _stalled(state, opts.stall_window, opts.stall_tol)


def optimize(state: OptState, problem, opts: Optional[OptimizeOptions] = None,
             callback=None) -> Tuple[OptState, bool]:
    """Alternate reference collection and NLP steps until the stopping test holds.

    Stops when the full-grid maximum is matched by the reference maximum and
    ``t`` has moved by less than ``stall_tol`` over the last ``stall_window``
    steps.  Returns ``(state, converged)``.
    """
    opts = opts or OptimizeOptions()
    for _ in range(opts.max_outer):
        values = problem.grid_values(state.params)
        if is_converged(state, problem, opts, values):
            return state, True
        state = collect_reference(state, values)
        state = step(state, problem, opts.delta_step, opts)
        if callback is not None:
            callback(state)
    values = problem.grid_values(state.params)
    return state, is_converged(state, problem, opts, values)


def carryover(state: OptState, problem, keep_threshold: int = 200, window: int = 100) -> OptState:
    """Warm start for a neighbouring problem (e.g. the next frequency).

    Keeps the parameters; keeps all references when there are fewer than
    ``keep_threshold``, otherwise only those added in the last ``window``
    iterations.  ``t`` is reset to the full-grid maximum on ``problem``.
    """
    refs = state.refs
    if len(refs) >= keep_threshold:
        cutoff = state.total_iterations - window
        refs = tuple(r for r in refs if r.added_at > cutoff)
    t0 = float(np.max(problem.grid_values(state.params)))
    return replace(state, t=t0, refs=refs, iteration=0, history=())
