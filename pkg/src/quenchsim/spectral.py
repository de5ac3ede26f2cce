"""Principal Robin eigenpair on (0, 1) and heat-semigroup lower envelopes.

The eigenproblem is -psi'' = chi * psi with Robin conditions
-psi'(0) + beta*psi(0) = 0 and psi'(1) + beta*psi(1) = 0, and psi normalized
to unit integral.  The ansatz psi(x) = cos(r x) + (beta/r) sin(r x) satisfies
the left condition identically; the right condition gives the characteristic
equation

    (beta^2 - r^2) sin(r) + 2 beta r cos(r) = 0,

whose smallest positive root lies in (0, pi).  chi = r^2.  The heat semigroup
S_t with homogeneous Robin conditions acts diagonally on psi:
S_t psi = exp(-chi t) psi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "RobinEigenpair",
    "SemigroupBound",
    "solve_robin_eigenpair",
    "semigroup_on_eigenfunction",
    "mu_lower",
    "make_semigroup_bound",
]

PSI_MIN_GRID = 10_000  # uniform interior points (plus endpoints) scanned for min psi


def _characteristic(beta: float, r):
    return (beta * beta - r * r) * np.sin(r) + 2.0 * beta * r * np.cos(r)


@dataclass(frozen=True)
class RobinEigenpair:
    """Principal eigenpair (chi, psi) of the 1D Robin Laplacian, unit-integral psi."""

    beta: float
    r: float
    chi: float
    psi_scale: float
    psi_min: float = field(default=0.0)
    psi_max: float = field(default=0.0)
    psi_sq_integral: float = field(default=0.0)

    def psi(self, x):
        """Evaluate the normalized eigenfunction at x in [0, 1] (vectorized)."""
        x = np.asarray(x, dtype=float)
        out = self.psi_scale * (np.cos(self.r * x) + (self.beta / self.r) * np.sin(self.r * x))
        return out if out.ndim else float(out)

    def psi_second(self, x):
        """psi''(x) = -chi * psi(x) analytically; provided for residual checks."""
        return -self.chi * self.psi(x)

    def ode_residual(self, x) -> float:
        """max |-psi'' - chi psi| over the given points (zero up to roundoff)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vals = self.psi_scale * (np.cos(self.r * x) + (self.beta / self.r) * np.sin(self.r * x))
        second = -self.r**2 * vals
        return float(np.max(np.abs(-second - self.chi * vals)))

    def boundary_residuals(self) -> tuple[float, float]:
        """(|-psi'(0) + beta psi(0)|, |psi'(1) + beta psi(1)|) for the normalized psi."""
        r, b, sc = self.r, self.beta, self.psi_scale
        dpsi0 = sc * b
        psi0 = sc
        dpsi1 = sc * (-r * math.sin(r) + b * math.cos(r))
        psi1 = sc * (math.cos(r) + (b / r) * math.sin(r))
        return abs(-dpsi0 + b * psi0), abs(dpsi1 + b * psi1)

    def normalization_residual(self, n_panels: int = 64, order: int = 8) -> float:
        """|int_0^1 psi - 1| by composite Gauss-Legendre quadrature."""
        return abs(quad_gauss(self.psi, n_panels=n_panels, order=order) - 1.0)


def quad_gauss(f, a: float = 0.0, b: float = 1.0, n_panels: int = 64, order: int = 8) -> float:
    """Composite Gauss-Legendre quadrature of a vectorized callable on [a, b]."""
    nodes, weights = leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    x = (mid[:, None] + half * nodes[None, :]).ravel()
    w = np.broadcast_to(half * weights, (n_panels, order)).ravel()
    return float(np.dot(w, np.asarray(f(x), dtype=float)))


def solve_robin_eigenpair(beta: float, tol: float = 1e-13) -> RobinEigenpair:
    """Solve for the principal Robin eigenpair by bracketing bisection on (0, pi).

    The characteristic function is positive near 0 and negative at pi for any
    beta > 0, so the bracket never fails; bisection runs to |dr| < tol and is
    polished by a few Newton steps.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    lo, hi = 1e-12, math.pi - 1e-12
    flo = _characteristic(beta, lo)
    fhi = _characteristic(beta, hi)
    if not (flo > 0 > fhi):
        raise RuntimeError(
            f"characteristic-equation bracket failed on ({lo}, {hi}) for beta={beta}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _characteristic(beta, mid) > 0:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    for _ in range(4):
        f = _characteristic(beta, r)
        df = ((beta * beta - r * r) * math.cos(r) - 2.0 * r * math.sin(r)
              + 2.0 * beta * math.cos(r) - 2.0 * beta * r * math.sin(r))
        if df == 0.0:
            break
        step = f / df
        if not math.isfinite(step) or abs(step) > 0.5:
            break
        r -= step

    chi = r * r
    # closed-form integral of the unnormalized ansatz
    integral = math.sin(r) / r + beta * (1.0 - math.cos(r)) / (r * r)
    scale = 1.0 / integral

    pair = RobinEigenpair(beta=beta, r=r, chi=chi, psi_scale=scale)
    xs = np.linspace(0.0, 1.0, PSI_MIN_GRID + 2)
    vals = pair.psi(xs)
    psi_min = float(vals.min())
    psi_max = float(vals.max())
    psi_sq = quad_gauss(lambda x: pair.psi(x) ** 2)
    return RobinEigenpair(beta=beta, r=r, chi=chi, psi_scale=scale,
                          psi_min=psi_min, psi_max=psi_max, psi_sq_integral=psi_sq)


def semigroup_on_eigenfunction(pair: RobinEigenpair, t: float) -> float:
    """Diagonal semigroup factor: S_t psi = exp(-chi t) psi."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return math.exp(-pair.chi * t)


@dataclass(frozen=True)
class SemigroupBound:
    """Lower envelope mu(t) = exp(-k1^2 t / 2) * inf_x S_t g(x).

    For g proportional to the eigenfunction the envelope is exact,
    mu(t) = amplitude * exp(-decay_rate * t).  Otherwise it is tabulated from
    a deterministic implicit-Euler heat solve on the simulation grid and
    interpolated linearly in between.
    """

    method: str  # "eigen_exact" | "fem_numeric"
    amplitude: float = 0.0
    decay_rate: float = 0.0
    grid_times: np.ndarray | None = None
    grid_values: np.ndarray | None = None

    def __call__(self, t) -> float | np.ndarray:
        if self.method == "eigen_exact":
            out = self.amplitude * np.exp(-self.decay_rate * np.asarray(t, dtype=float))
            return out if out.ndim else float(out)
        out = np.interp(np.asarray(t, dtype=float), self.grid_times, self.grid_values)
        return out if out.ndim else float(out)

    def values_on(self, times: np.ndarray) -> np.ndarray:
        return np.asarray(self(times), dtype=float)


def make_semigroup_bound(pair: RobinEigenpair, g_nodal: np.ndarray | None, k1: float,
                         *, eigen_amplitude: float | None = None,
                         horizon: float | None = None, n_steps: int | None = None,
                         mesh_points: int = 200) -> SemigroupBound:
    """Build mu(t) for initial data g.

    Pass `eigen_amplitude` = L when g = L * psi exactly (exact exponential
    envelope); otherwise pass nodal values of g on a uniform mesh together
    with `horizon`/`n_steps` for the numeric heat solve with homogeneous Robin
    conditions (coefficient beta of `pair`).
    """
    half_k2 = 0.5 * k1 * k1
    if eigen_amplitude is not None:
        if eigen_amplitude <= 0:
            raise ValueError("eigenfunction multiple must be positive")
        return SemigroupBound(method="eigen_exact",
                              amplitude=eigen_amplitude * pair.psi_min,
                              decay_rate=pair.chi + half_k2)
    if g_nodal is None or horizon is None or n_steps is None:
        raise ValueError("numeric mode needs g_nodal, horizon and n_steps")
    g_nodal = np.asarray(g_nodal, dtype=float)
    if np.min(g_nodal) <= 0:
        raise ValueError("initial data g must be strictly positive")
    times, mins = _heat_minimum(pair.beta, g_nodal, horizon, n_steps)
    values = mins * np.exp(-half_k2 * times)
    return SemigroupBound(method="fem_numeric", grid_times=times, grid_values=values)


def _heat_minimum(beta: float, g_nodal: np.ndarray, horizon: float, n_steps: int):
    """Grid minimum of the homogeneous-Robin heat evolution of g, implicit Euler."""
    from scipy.linalg import cholesky_banded, cho_solve_banded

    m = len(g_nodal) - 1
    dx = 1.0 / m
    dt = horizon / n_steps
    mass_d = np.full(m + 1, 2.0 * dx / 3.0)
    mass_d[0] = mass_d[-1] = dx / 3.0
    mass_o = np.full(m, dx / 6.0)
    stiff_d = np.full(m + 1, 2.0 / dx)
    stiff_d[0] = stiff_d[-1] = 1.0 / dx + beta
    stiff_o = np.full(m, -1.0 / dx)

    ab = np.zeros((2, m + 1))
    ab[0, 1:] = mass_o + dt * stiff_o
    ab[1, :] = mass_d + dt * stiff_d
    factor = cholesky_banded(ab)

    w = g_nodal.copy()
    times = np.arange(n_steps + 1) * dt
    mins = np.empty(n_steps + 1)
    mins[0] = w.min()
    for n in range(1, n_steps + 1):
        rhs = mass_d * w
        rhs[:-1] += mass_o * w[1:]
        rhs[1:] += mass_o * w[:-1]
        w = cho_solve_banded((factor, False), rhs)
        mins[n] = w.min()
    return times, mins


def mu_lower(pair: RobinEigenpair, g, k1: float, t: float, *,
             eigen_amplitude: float | None = None,
             horizon: float | None = None, n_steps: int | None = None) -> float:
    """Evaluate mu(t) = exp(-k1^2 t / 2) inf_x S_t g(x) at a single time.

    `g` is either ignored (when `eigen_amplitude` is given, meaning
    g = eigen_amplitude * psi) or an array of nodal values on a uniform mesh.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if eigen_amplitude is not None:
        bound = make_semigroup_bound(pair, None, k1, eigen_amplitude=eigen_amplitude)
        return float(bound(t))
    if horizon is None:
        horizon = max(t, 1e-12)
    if n_steps is None:
        n_steps = 2000
    bound = make_semigroup_bound(pair, np.asarray(g, dtype=float), k1,
                                 horizon=horizon, n_steps=n_steps)
    return float(bound(t))
