"""Transfer-operator kernels of the twofold additive compound delay operator.

All kernel functions broadcast over ``theta`` and ``s`` so that a whole grid
can be sampled in one call, e.g. ``kernel_k(params, th[:, None], s[None, :])``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateDenominator, DomainError
from .quadrature import sample_kernel

DEN_EPS = 1e-10
# Relative slack for closed indicator intervals and the domain check; grid
# nodes on the jump line s = -tau - theta are off by a few ulps in floating point.
_EDGE_EPS = 1e-12
_SERIES_CUTOFF = 1e-6
# Above this |Re(delta t)| the cosh/sinh form loses digits to cancellation
# between e^{+delta t} and e^{-delta t}; the spectral-projector form is used.
_STIFF_CUTOFF = 1.0


@dataclass(frozen=True)
class KernelParams:
    """Scalars defining ``D0`` and the kernels; ``p = -nu0 + i*omega``."""

    a: float
    b: float
    tau: float = 1.0
    nu0: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def p(self) -> complex:
        return complex(-self.nu0, self.omega)

    def with_omega(self, omega: float) -> "KernelParams":
        return replace(self, omega=float(omega))


@dataclass(frozen=True)
class MackeyGlassParams:
    gamma: float
    beta: float
    kappa: float
    tau_prime: float

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")


def mg_map(mg: MackeyGlassParams, nu0: float = 0.0, omega: float = 0.0):
    """Map Mackey-Glass constants to kernel parameters.

    Returns
    -------
    (KernelParams, float)
        Parameters with ``tau = 1`` and the threshold constant ``Lambda``;
        the frequency inequality to verify is ``||T_K|| < 1 / Lambda``.
    """
    tp = mg.tau_prime
    lam = 0.5 * tp * mg.beta * ((mg.kappa - 1.0) ** 2 / mg.kappa + 1.0)
    a = -tp * mg.gamma
    b = tp * mg.beta - lam
    return KernelParams(a=a, b=b, tau=1.0, nu0=nu0, omega=omega), lam


def build_d0(params: KernelParams) -> np.ndarray:
    p = params.p
    a, b = params.a, params.b
    return np.array(
        [[-a, b], [-b * np.exp(-p * params.tau), a - p]], dtype=complex
    )


def _delta(d0: np.ndarray) -> complex:
    alpha = 0.5 * (d0[0, 0] + d0[1, 1])
    shifted = d0 - alpha * np.eye(2)
    det = shifted[0, 0] * shifted[1, 1] - shifted[0, 1] * shifted[1, 0]
    return complex(np.sqrt(complex(-det)))


def expm_2x2(d0: np.ndarray, t, delta: complex | None = None) -> np.ndarray:
    """``exp(d0 * t)`` via the cosh/sinh closed form.

    ``t`` may be an array; the result has shape ``t.shape + (2, 2)``.
    ``delta`` overrides the square-root branch (either sign gives the same
    matrix up to rounding).
    """
    t = np.asarray(t, dtype=float)
    alpha = 0.5 * (d0[0, 0] + d0[1, 1])
    if delta is None:
        delta = _delta(d0)
    dt = delta * t
    small = np.abs(dt) < _SERIES_CUTOFF
    safe_delta = delta if delta != 0 else 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        shc = np.where(
            small,
            t * (1.0 + dt**2 / 6.0 + dt**4 / 120.0),
            np.sinh(dt) / safe_delta,
        )
    ch = np.cosh(dt)
    scale = np.exp(alpha * t)
    c0 = scale * (ch - alpha * shc)
    c1 = scale * shc
    out = c0[..., None, None] * np.eye(2) + c1[..., None, None] * d0
    stiff = np.abs(dt.real) > _STIFF_CUTOFF
    if np.any(stiff):
        out[stiff] = _expm_projectors(d0, alpha, delta, t[stiff])
    return out


def _expm_projectors(d0, alpha, delta, t):
    """``exp(d0 t) = e^{(alpha+delta)t} P+ + e^{(alpha-delta)t} P-`` for well separated eigenvalues.

    The diagonal projector entries ``(delta -/+ h) / (2 delta)`` are formed
    without cancellation via ``(delta - h)(delta + h) = d12 d21``.
    """
    h = 0.5 * (d0[0, 0] - d0[1, 1])
    prod = d0[0, 1] * d0[1, 0]
    plus, minus = delta + h, delta - h
    if abs(plus) >= abs(minus):
        minus = prod / plus
    else:
        plus = prod / minus
    two_d = 2.0 * delta
    p_plus = np.array([[plus, d0[0, 1]], [d0[1, 0], minus]]) / two_d
    p_minus = np.array([[minus, -d0[0, 1]], [-d0[1, 0], plus]]) / two_d
    with np.errstate(over="ignore", invalid="ignore"):
        e_plus = np.exp((alpha + delta) * t)[..., None, None]
        e_minus = np.exp((alpha - delta) * t)[..., None, None]
        # an exactly zero projector entry times an overflowed exponential is 0
        up = np.where(p_plus == 0, 0.0, e_plus * p_plus)
        down = np.where(p_minus == 0, 0.0, e_minus * p_minus)
    return up + down


def expm_d0(params: KernelParams, t) -> np.ndarray:
    return expm_2x2(build_d0(params), t)


def denom(params: KernelParams) -> complex:
    """``1 - e^{p tau} g21(tau)``; raises if it is degenerate."""
    d0 = build_d0(params)
    g21 = expm_2x2(d0, params.tau)[1, 0]
    val = complex(1.0 - np.exp(params.p * params.tau) * g21)
    if abs(val) <= DEN_EPS:
        raise DegenerateDenominator(
            f"|1 - e^(p tau) g21(tau)| = {abs(val):.3g} for nu0={params.nu0}, "
            f"omega={params.omega}; the line -nu0 + iR meets the spectrum"
        )
    return val


def _check_domain(tau: float, theta, s):
    tol = _EDGE_EPS * tau
    for name, x in (("theta", theta), ("s", s)):
        x = np.asarray(x)
        if np.any(x < -tau - tol) or np.any(x > tol):
            raise DomainError(f"{name} outside [-{tau}, 0]")


def _chi_upper(tau, theta, s, edge=1.0):
    """Indicator of ``s`` in ``[-tau - theta, 0]``; ``edge`` at the moving endpoint."""
    cut = -tau - theta
    tol = _EDGE_EPS * tau
    return np.where(np.abs(s - cut) <= tol, edge, np.where(s > cut, 1.0, 0.0))


def _chi_lower(tau, theta, s, edge=1.0):
    """Indicator of ``s`` in ``[-tau, theta]``; ``edge`` at the moving endpoint."""
    tol = _EDGE_EPS * tau
    return np.where(np.abs(s - theta) <= tol, edge, np.where(s < theta, 1.0, 0.0))


def kernel_k(params: KernelParams, theta, s, edge: float = 1.0):
    """Transfer-operator kernel ``K(theta, s)`` (complex).

    ``edge`` is the indicator value on the moving endpoints (1 = closed
    intervals); ``sample_sides`` uses both 1 and 0 for quadrature.
    """
    tau, p = params.tau, params.p
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_domain(tau, theta, s)
    den = denom(params)
    d0 = build_d0(params)

    def g(t, row, col):
        return expm_2x2(d0, t)[..., row, col]

    lead = np.exp(p * (theta + tau)) * g(tau + theta, 1, 0)
    tail = np.exp(-p * s) * g(-s, 1, 0) - g(tau + s, 1, 1)
    out = lead * tail / den
    out = out + _chi_lower(tau, theta, s, edge) * np.exp(-p * s) * g(theta - s, 1, 0)
    out = out - _chi_upper(tau, theta, s, edge) * g(theta + tau + s, 1, 1)
    return out


def kernel_kbar(params: KernelParams, theta, s, edge: float = 1.0):
    """Asymptotic kernel: the ``|omega| -> inf`` limit of ``K``."""
    tau, p, a = params.tau, params.p, params.a
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_domain(tau, theta, s)
    val = -np.exp(a * theta) * np.exp((a - p) * (tau + s))
    return _chi_upper(tau, theta, s, edge) * val


def kernel_kbar_abs(params: KernelParams, theta, s, edge: float = 1.0):
    """``|Kbar|``; does not depend on ``omega``."""
    tau, a = params.tau, params.a
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_domain(tau, theta, s)
    val = np.exp(a * theta) * np.exp((a + params.nu0) * (tau + s))
    return _chi_upper(tau, theta, s, edge) * val


def kernel_klimit(params: KernelParams, theta, s, edge: float = 1.0):
    """Pointwise ``|omega| -> inf`` limit of ``kernel_k``.

    Differs from ``kernel_kbar`` by the factor ``exp(-p * theta)``, a
    multiplication operator of modulus ``exp(nu0 * theta)``; this is the
    kernel for which ``K - limit = O(1/|omega|)`` holds uniformly.
    """
    tau, p, a = params.tau, params.p, params.a
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_domain(tau, theta, s)
    return -_chi_upper(tau, theta, s, edge) * np.exp((a - p) * (theta + tau + s))


@dataclass(frozen=True, eq=False)
class KernelSamples:
    """Kernel values on a grid pair from both sides of the jump line.

    ``closed`` uses closed indicators (value of the support side on the
    line), ``open`` open ones; they differ only at nodes on ``s = -tau - theta``.
    Averaging a pointwise quantity over the two sides gives the value that
    keeps composite Simpson second order across the jump.
    """

    closed: np.ndarray
    open: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return 0.5 * (self.closed + self.open)

    @property
    def modulus(self) -> np.ndarray:
        return 0.5 * (np.abs(self.closed) + np.abs(self.open))

    @property
    def modulus_sq(self) -> np.ndarray:
        return 0.5 * (np.abs(self.closed) ** 2 + np.abs(self.open) ** 2)


def jump_line(tau: float, grid_theta, grid_s) -> np.ndarray:
    """Mask of grid pairs lying on ``s = -tau - theta``."""
    th = grid_theta.nodes[:, None]
    s = grid_s.nodes[None, :]
    return np.abs(s + tau + th) <= _EDGE_EPS * tau


def sample_sides(kernel, params: KernelParams, grid_theta, grid_s) -> KernelSamples:
    """Sample ``kernel(params, theta, s, edge)`` on a grid pair; see ``KernelSamples``."""
    closed = sample_kernel(lambda th, s: kernel(params, th, s, edge=1.0), grid_theta, grid_s)
    mask = jump_line(params.tau, grid_theta, grid_s)
    opened = closed.copy()
    if mask.any():
        rows, cols = np.nonzero(mask)
        opened[mask] = kernel(params, grid_theta.nodes[rows], grid_s.nodes[cols], edge=0.0)
    return KernelSamples(closed, opened)


def sample_k(params: KernelParams, grid_theta, grid_s) -> np.ndarray:
    """``K`` on a grid pair, averaged across the jump line."""
    return sample_sides(kernel_k, params, grid_theta, grid_s).values


def sample_k_abs(params: KernelParams, grid_theta, grid_s) -> np.ndarray:
    """``|K|`` on a grid pair, averaged across the jump line."""
    return sample_sides(kernel_k, params, grid_theta, grid_s).modulus
