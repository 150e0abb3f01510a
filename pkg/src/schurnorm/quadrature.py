"""Uniform grids on ``[-tau, 0]`` with composite Simpson 1/3 weights."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadGridSize, DimensionMismatch, LengthMismatch


@dataclass(frozen=True, eq=False)
class QuadGrid:
    tau: float
    m: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def h(self) -> float:
        return self.tau / (self.m - 1)


def simpson_weights(m: int, h: float) -> np.ndarray:
    if m < 3 or m % 2 == 0:
        raise BadGridSize(f"Simpson 1/3 rule needs an odd node count >= 3, got {m}")
    w = np.full(m, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def make_grid(tau: float, m: int) -> QuadGrid:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    m = int(m)
    h = tau / (m - 1) if m > 1 else tau
    weights = simpson_weights(m, h)
    nodes = -tau + h * np.arange(m)
    nodes[-1] = 0.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadGrid(tau=float(tau), m=m, nodes=nodes, weights=weights)


def integrate_1d(values, grid: QuadGrid):
    values = np.asarray(values)
    if values.shape != (grid.m,):
        raise LengthMismatch(f"expected {grid.m} values, got shape {values.shape}")
    return values @ grid.weights


def sample_kernel(k, grid_theta: QuadGrid, grid_s: QuadGrid) -> np.ndarray:
    """Matrix ``k(theta_i, s_j)``; ``k`` must broadcast over its arguments."""
    th = grid_theta.nodes[:, None]
    s = grid_s.nodes[None, :]
    out = np.asarray(k(th, s))
    return np.broadcast_to(out, (grid_theta.m, grid_s.m)).copy()


def integrate_2d(samples, grid_theta: QuadGrid, grid_s: QuadGrid):
    samples = np.asarray(samples)
    if samples.shape != (grid_theta.m, grid_s.m):
        raise DimensionMismatch(
            f"samples have shape {samples.shape}, grids need "
            f"({grid_theta.m}, {grid_s.m})"
        )
    return grid_theta.weights @ samples @ grid_s.weights
