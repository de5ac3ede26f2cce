"""Galerkin linear-element semi-implicit Euler solver with quench detection.

Space is discretized with hat functions on a uniform mesh of M elements over
(0, 1); time stepping treats diffusion implicitly and the singular reaction
and multiplicative noise explicitly:

    (A + dt B) a^{n+1} = A a^n + dt (load(F(u^n)) + bc_load)
                         + load(1 - u_i^n) * dN_i^n,

where A/B are the tridiagonal mass/stiffness matrices, load(.) is the
Galerkin projection of the nodal interpolant (mass-matrix action, equivalent
to exact quadrature of hat-function products), and dN_i^n are left-endpoint
increments of the mixed noise.

Component i feels its own singularity with strength lam[i][0] and the other
component's with lam[i][1]:

    F_1 = lam11/(1-u1)^2 + lam12/(1-u2)^2,
    F_2 = lam21/(1-u2)^2 + lam22/(1-u1)^2.

Quenching is flagged at the first step where max_i ||u_i||_inf >= 1 - eps;
integration never continues past that step (the reaction is undefined beyond
the singular level).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .config import BC_DIRICHLET, BC_ROBIN, SystemConfig
from .noise import MixedNoise, NoisePath, TimeGrid, mixed_noise, sample_noise_path
from .spectral import RobinEigenpair, solve_robin_eigenpair

__all__ = [
    "FemMatrices",
    "QuenchEvent",
    "Trajectory",
    "StepError",
    "assemble",
    "galerkin_load",
    "step",
    "detect_quench",
    "simulate",
]


class StepError(RuntimeError):
    """Time step produced an unusable state (non-finite load or solve failure)."""


@dataclass(frozen=True)
class FemMatrices:
    """Tridiagonal mass/stiffness in banded storage plus the prefactored system.

    Dirichlet keeps interior nodes only; Robin keeps all M+1 nodes and carries
    the boundary stiffness correction beta and the constant boundary forcing
    beta_c in `bc_load`.
    """

    bc: str
    n_dof: int
    x: np.ndarray
    mass_d: np.ndarray
    mass_o: np.ndarray
    stiff_d: np.ndarray
    stiff_o: np.ndarray
    bc_load: np.ndarray
    factor: np.ndarray  # Cholesky (banded) of A + dt*B
    dt: float

    def mass_action(self, v: np.ndarray) -> np.ndarray:
        out = self.mass_d * v
        out[:-1] += self.mass_o * v[1:]
        out[1:] += self.mass_o * v[:-1]
        return out

    def stiffness_action(self, v: np.ndarray) -> np.ndarray:
        out = self.stiff_d * v
        out[:-1] += self.stiff_o * v[1:]
        out[1:] += self.stiff_o * v[:-1]
        return out

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve_banded((self.factor, False), rhs)

    def l2_norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(v @ self.mass_action(v)))


def assemble(config: SystemConfig) -> FemMatrices:
    """Assemble mass/stiffness for linear hat functions on the uniform mesh."""
    if config.M < 3:
        raise ValueError(f"M must be >= 3, got {config.M}")
    m = config.M
    dx = config.dx
    dt = config.dt
    if config.bc == BC_DIRICHLET:
        n = m - 1
        x = np.arange(1, m) * dx
        mass_d = np.full(n, 2.0 * dx / 3.0)
        mass_o = np.full(n - 1, dx / 6.0)
        stiff_d = np.full(n, 2.0 / dx)
        stiff_o = np.full(n - 1, -1.0 / dx)
        bc_load = np.zeros(n)
    else:
        n = m + 1
        x = np.arange(m + 1) * dx
        mass_d = np.full(n, 2.0 * dx / 3.0)
        mass_d[0] = mass_d[-1] = dx / 3.0
        mass_o = np.full(n - 1, dx / 6.0)
        stiff_d = np.full(n, 2.0 / dx)
        stiff_d[0] = stiff_d[-1] = 1.0 / dx + config.beta
        stiff_o = np.full(n - 1, -1.0 / dx)
        bc_load = np.zeros(n)
        bc_load[0] = bc_load[-1] = config.beta_c

    ab = np.zeros((2, n))
    ab[0, 1:] = mass_o + dt * stiff_o
    ab[1, :] = mass_d + dt * stiff_d
    factor = cholesky_banded(ab)
    return FemMatrices(bc=config.bc, n_dof=n, x=x, mass_d=mass_d, mass_o=mass_o,
                       stiff_d=stiff_d, stiff_o=stiff_o, bc_load=bc_load,
                       factor=factor, dt=dt)


def galerkin_load(mats: FemMatrices, nodal: np.ndarray) -> np.ndarray:
    """Galerkin load of the nodal interpolant: exact hat-product quadrature."""
    return mats.mass_action(nodal)


def step(state: tuple[np.ndarray, np.ndarray], mats: FemMatrices, config: SystemConfig,
         dn1: float, dn2: float) -> tuple[np.ndarray, np.ndarray]:
    """Advance one semi-implicit Euler step; returns the new coefficient pair."""
    u1, u2 = state
    z1 = 1.0 - u1
    z2 = 1.0 - u2
    floor = 0.5 * config.eps_quench
    if np.min(z1) < floor or np.min(z2) < floor:
        raise StepError("state beyond the quench threshold; caller must stop")
    lam = config.lam
    inv1 = z1**-2
    inv2 = z2**-2
    f1 = lam[0][0] * inv1 + lam[0][1] * inv2
    f2 = lam[1][0] * inv2 + lam[1][1] * inv1
    new = []
    for u, f, z, dn in ((u1, f1, z1, dn1), (u2, f2, z2, dn2)):
        rhs = mats.mass_action(u)
        rhs += mats.dt * (mats.mass_action(f) + mats.bc_load)
        rhs += mats.mass_action(z) * dn
        if not np.all(np.isfinite(rhs)):
            raise StepError("non-finite load (missed quench stop)")
        new.append(mats.solve(rhs))
    return new[0], new[1]


def detect_quench(sup_norms: tuple[float, float], eps: float) -> tuple[int, ...]:
    """Components whose sup norm has reached 1 - eps; empty tuple if none."""
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    level = 1.0 - eps
    return tuple(i + 1 for i, s in enumerate(sup_norms) if s >= level)


@dataclass(frozen=True)
class QuenchEvent:
    step: int
    time: float
    components: tuple[int, ...]  # (1,), (2,) or (1, 2); (1, 2) = same-step crossing

    @property
    def label(self) -> str:
        return "both" if len(self.components) == 2 else str(self.components[0])


@dataclass
class Trajectory:
    """Recorded sample path of the coupled system up to quench/abort/horizon."""

    config: SystemConfig
    seed: int
    times: np.ndarray
    sup_u1: np.ndarray
    sup_u2: np.ndarray
    min_z1: np.ndarray
    min_z2: np.ndarray
    quench: QuenchEvent | None
    aborted: str | None
    noise: NoisePath
    mixed: MixedNoise
    near_cross_t1: float | None
    near_cross_t2: float | None
    final_u1: np.ndarray
    final_u2: np.ndarray
    x: np.ndarray
    fields: list[tuple[int, np.ndarray, np.ndarray]] | None = None

    @property
    def quench_time(self) -> float | None:
        return self.quench.time if self.quench else None


def _initial_nodal(config: SystemConfig, x: np.ndarray,
                   pair: RobinEigenpair | None) -> tuple[np.ndarray, np.ndarray]:
    f = config.initial.f_values(x, pair)
    if np.min(f) < 0 or np.max(f) >= 1.0:
        raise ValueError("initial data must satisfy 0 <= f < 1 on the mesh")
    return f[0].copy(), f[1].copy()


def simulate(config: SystemConfig, seed: int,
             pair: RobinEigenpair | None = None,
             noise: NoisePath | None = None,
             dump_every: int | None = None) -> Trajectory:
    """Integrate one realization until quench detection, abort, or step N.

    The noise path is sampled from `seed` (per the configured dependence mode)
    unless one is supplied.  Results are bitwise reproducible for a fixed
    (config, seed).  `dump_every` stores the full nodal fields every k steps.
    """
    if pair is None and config.initial.kind == "eigen":
        pair = solve_robin_eigenpair(config.beta)
    mats = assemble(config)
    u1, u2 = _initial_nodal(config, mats.x, pair)

    if noise is None:
        grid = TimeGrid(n_steps=config.N, dt=config.dt)
        noise = sample_noise_path(grid, config.hurst, seed, config.dependence)
    (k11, k12), (k21, k22) = config.k
    mixed = mixed_noise(noise, k11, k12, k21, k22)
    dn1 = np.diff(mixed.N1)
    dn2 = np.diff(mixed.N2)

    n_steps = config.N
    dt = config.dt
    times = np.empty(n_steps + 1)
    sup1 = np.empty(n_steps + 1)
    sup2 = np.empty(n_steps + 1)
    near_level = 1.0 - min(10.0 * config.eps_quench, 0.5)
    near_t1 = near_t2 = None
    quench = None
    aborted = None
    fields = [] if dump_every else None

    mx1 = np.empty(n_steps + 1)
    mx2 = np.empty(n_steps + 1)
    n_rec = 0
    for n in range(n_steps + 1):
        s1 = float(np.max(np.abs(u1)))
        s2 = float(np.max(np.abs(u2)))
        times[n] = n * dt
        sup1[n] = s1
        sup2[n] = s2
        mx1[n] = np.max(u1)
        mx2[n] = np.max(u2)
        n_rec = n + 1
        if fields is not None and n % dump_every == 0:
            fields.append((n, u1.copy(), u2.copy()))
        if near_t1 is None and s1 >= near_level:
            near_t1 = n * dt
        if near_t2 is None and s2 >= near_level:
            near_t2 = n * dt
        hit = detect_quench((s1, s2), config.eps_quench)
        if hit:
            quench = QuenchEvent(step=n, time=n * dt, components=hit)
            break
        if n == n_steps:
            break
        try:
            u1, u2 = step((u1, u2), mats, config, dn1[n], dn2[n])
        except StepError as exc:
            aborted = str(exc)
            break
        if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
            aborted = "non-finite coefficients"
            break

    times = times[:n_rec]
    sup1 = sup1[:n_rec]
    sup2 = sup2[:n_rec]
    return Trajectory(
        config=config, seed=seed, times=times, sup_u1=sup1, sup_u2=sup2,
        min_z1=1.0 - mx1[:n_rec], min_z2=1.0 - mx2[:n_rec], quench=quench,
        aborted=aborted, noise=noise, mixed=mixed,
        near_cross_t1=near_t1, near_cross_t2=near_t2,
        final_u1=u1, final_u2=u2, x=mats.x, fields=fields,
    )
