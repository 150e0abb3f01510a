"""Reference norms that bracket the operator norm of ``T_K``.

* ``l2_norm``: Hilbert-Schmidt norm of the kernel (upper bound).
* ``nystrom_norm``: largest singular value of the weighted sampled kernel.
* ``truncation_matrix`` / ``matrix_norm``: Galerkin truncation in the
  orthonormal trigonometric basis ``exp(2 pi i k theta / tau) / sqrt(tau)``,
  ``-N <= k <= N`` (lower bound for ``||T_K||``).

For the asymptotic kernel both the L2 norm and the truncation entries have
closed forms; they reduce to integrals of exponentials over the triangle
``0 <= y <= x <= 1``, i.e. second divided differences of ``exp``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .kernel import KernelParams, KernelSamples, sample_k
from .quadrature import QuadGrid, integrate_2d

POWER_RTOL = 1e-10
POWER_MAXITER = 10000
_TAYLOR_SPREAD = 1e-3


def _exp_dd1(x, y):
    """First divided difference ``(e^y - e^x) / (y - x)``, stable near ``y = x``."""
    h = y - x
    small = np.abs(h) < 1e-8
    safe = np.where(small, 1.0, h)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        phi = np.where(small, 1.0 + h / 2.0 + h * h / 6.0, np.expm1(h) / safe)
    return np.exp(x) * phi


def exp_divdiff2(z0, z1, z2):
    """Second divided difference ``exp[z0, z1, z2]`` for complex nodes.

    Equals ``int_0^1 int_0^x exp(z0 (1-x) + z1 (x-y) + z2 y) dy dx``.  Uses
    the difference quotient over the farthest node pair, and a Taylor
    series about the centroid when all three nodes are clustered.
    """
    z = np.broadcast_arrays(
        np.asarray(z0, complex), np.asarray(z1, complex), np.asarray(z2, complex)
    )
    z = np.stack(z, axis=-1)
    d01 = np.abs(z[..., 0] - z[..., 1])
    d02 = np.abs(z[..., 0] - z[..., 2])
    d12 = np.abs(z[..., 1] - z[..., 2])
    spread = np.maximum(np.maximum(d01, d02), d12)

    # reorder so that (x, w) is the farthest pair and y the middle node
    far = np.argmax(np.stack([d12, d02, d01], axis=-1), axis=-1)  # index of middle node
    idx = np.array([[1, 0, 2], [0, 1, 2], [0, 2, 1]])[far]
    x = np.take_along_axis(z, idx[..., 0:1], -1)[..., 0]
    y = np.take_along_axis(z, idx[..., 1:2], -1)[..., 0]
    w = np.take_along_axis(z, idx[..., 2:3], -1)[..., 0]
    clustered = spread < _TAYLOR_SPREAD
    denom = np.where(clustered, 1.0, w - x)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        direct = (_exp_dd1(y, w) - _exp_dd1(x, y)) / denom

    c = z.mean(axis=-1)
    d = z - c[..., None]
    e2 = d[..., 0] * d[..., 1] + d[..., 0] * d[..., 2] + d[..., 1] * d[..., 2]
    e3 = d[..., 0] * d[..., 1] * d[..., 2]
    # complete homogeneous polynomials via h_n = -e2 h_{n-2} + e3 h_{n-3} (e1 = 0)
    h = [np.ones_like(c), np.zeros_like(c), -e2]
    total = h[0] / 2.0 + h[2] / 24.0
    fact = 24.0
    for n in range(3, 9):
        h.append(-e2 * h[n - 2] + e3 * h[n - 3])
        fact *= n + 2
        total = total + h[n] / fact
    series = np.exp(c) * total
    out = np.where(clustered, series, direct)
    return out if out.ndim else complex(out)


def l2_norm(samples, grid_theta: QuadGrid, grid_s: QuadGrid) -> float:
    """``sqrt(int int |k|^2)`` by tensor-product Simpson.

    ``samples`` is a sampled kernel matrix or a ``KernelSamples``; for the
    latter ``|k|^2`` is averaged across the jump line before integrating.
    """
    if isinstance(samples, KernelSamples):
        sq = samples.modulus_sq
    else:
        sq = np.abs(np.asarray(samples)) ** 2
    return float(np.sqrt(max(integrate_2d(sq, grid_theta, grid_s), 0.0)))


def l2_kbar_closed(params: KernelParams) -> float:
    """Closed-form L2 norm of the asymptotic kernel."""
    tau, a = params.tau, params.a
    c = a + params.nu0
    val = tau**2 * exp_divdiff2(0.0, 2 * c * tau, 2 * (c - a) * tau)
    return float(np.sqrt(max(val.real, 0.0)))


def _power_top_eig(matvec, n, dtype, rtol=POWER_RTOL, maxiter=POWER_MAXITER):
    """Largest eigenvalue of a Hermitian PSD operator by power iteration."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    if np.issubdtype(dtype, np.complexfloating):
        v = v + 1j * rng.standard_normal(n)
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(maxiter):
        w = matvec(v)
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= rtol * lam_new:
            return lam_new
        lam = lam_new
    raise NoConvergence(f"power iteration did not converge in {maxiter} iterations")


def largest_singular_value(a, rtol=POWER_RTOL, maxiter=POWER_MAXITER) -> float:
    a = np.asarray(a)
    if a.size == 0 or not np.any(a):
        return 0.0
    ah = a.conj().T
    lam = _power_top_eig(lambda v: ah @ (a @ v), a.shape[1], a.dtype, rtol, maxiter)
    return float(np.sqrt(lam))


def nystrom_norm(samples, grid_theta: QuadGrid, grid_s: QuadGrid) -> float:
    """Norm of the Nystrom discretization ``diag(sqrt w) K diag(sqrt w')``."""
    a = np.sqrt(grid_theta.weights)[:, None] * np.asarray(samples) * np.sqrt(grid_s.weights)[None, :]
    return largest_singular_value(a)


@dataclass(frozen=True, eq=False)
class TruncationMatrix:
    n: int
    entries: np.ndarray

    def __post_init__(self):
        size = 2 * self.n + 1
        if self.entries.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} matrix, got {self.entries.shape}")


def fourier_basis(grid: QuadGrid, n: int) -> np.ndarray:
    """Columns ``phi_k`` at the grid nodes, ``k = -n..n``."""
    k = np.arange(-n, n + 1)
    return np.exp(2j * np.pi * np.outer(grid.nodes, k) / grid.tau) / np.sqrt(grid.tau)


def truncation_from_samples(samples, n: int, grid_theta: QuadGrid, grid_s: QuadGrid) -> TruncationMatrix:
    phi_t = fourier_basis(grid_theta, n)
    phi_s = fourier_basis(grid_s, n)
    weighted = grid_theta.weights[:, None] * np.asarray(samples) * grid_s.weights[None, :]
    return TruncationMatrix(n, phi_t.conj().T @ weighted @ phi_s)


def truncation_matrix(params: KernelParams, n: int, grid_theta: QuadGrid, grid_s: QuadGrid) -> TruncationMatrix:
    """Galerkin truncation of ``T_K`` (complex kernel) by Simpson quadrature."""
    k = sample_k(params, grid_theta, grid_s)
    return truncation_from_samples(k, n, grid_theta, grid_s)


def truncation_kbar_analytic(params: KernelParams, n: int) -> TruncationMatrix:
    """Exact Galerkin entries of the asymptotic kernel; no quadrature involved."""
    tau, a, p = params.tau, params.a, params.p
    k = np.arange(-n, n + 1)
    z1 = (a - p) * tau + 2j * np.pi * k[None, :]
    entries = np.empty((k.size, k.size), complex)
    for lo in range(0, k.size, 256):
        rows = k[lo : lo + 256]
        z2 = -p * tau + 2j * np.pi * (rows[:, None] + k[None, :])
        entries[lo : lo + rows.size] = -tau * exp_divdiff2(0.0, z1, z2)
    return TruncationMatrix(n, entries)


def matrix_norm(m) -> float:
    entries = m.entries if isinstance(m, TruncationMatrix) else np.asarray(m)
    return largest_singular_value(entries)
