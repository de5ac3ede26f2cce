"""Noise drivers: Brownian motion, fractional Brownian motion, and their mixtures.

All processes live on a uniform time grid.  Fractional Brownian motion (fBm)
with Hurst index H is the centered Gaussian process with covariance

    R_H(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2,

so Var(B^H(t)) = t^{2H}.  Two exact samplers are provided (dense Cholesky and
Davies-Harte circulant embedding) together with a Volterra construction that
builds the fBm from the increments of a given Wiener path, making the two
drivers dependent.  The mixed processes are N_i = k_i1 * W + k_i2 * B^H.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.linalg import lapack

__all__ = [
    "TimeGrid",
    "Dependence",
    "NoisePath",
    "MixedNoise",
    "FactorizationError",
    "CirculantFallbackWarning",
    "path_rng",
    "brownian_path",
    "fbm_covariance",
    "fbm_path_cholesky",
    "fbm_path_circulant",
    "volterra_kernel",
    "volterra_kernel_constant",
    "volterra_kernel_matrix",
    "fbm_from_brownian",
    "wiener_fbm_covariance",
    "mixed_noise",
    "sample_noise_path",
    "write_noise_csv",
]

CHOLESKY_MAX_STEPS = 4096
# Circulant eigenvalues this far (relative) below zero are treated as roundoff.
CIRCULANT_EIG_TOL = 1e-10


class FactorizationError(RuntimeError):
    """Dense covariance factorization failed (matrix numerically non-PD)."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(
            f"covariance factorization failed at pivot index {pivot} "
            "(matrix numerically not positive definite)"
        )


class CirculantFallbackWarning(UserWarning):
    """Circulant embedding produced negative eigenvalues; fell back to Cholesky."""


class Dependence(str, enum.Enum):
    """How the Wiener and fBm drivers are coupled."""

    INDEPENDENT = "independent"
    VOLTERRA = "volterra"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*dt for k = 0..n_steps."""

    n_steps: int
    dt: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def t_end(self) -> float:
        return self.n_steps * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class NoisePath:
    """One realization of the driver pair (W, B^H) at the grid nodes."""

    grid: TimeGrid
    W: np.ndarray
    BH: np.ndarray
    hurst: float
    dependence: Dependence

    def __post_init__(self):
        n = self.grid.n_steps + 1
        if len(self.W) != n or len(self.BH) != n:
            raise ValueError("W and BH must have length n_steps + 1")
        if self.W[0] != 0.0 or self.BH[0] != 0.0:
            raise ValueError("paths must start at zero")
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (1/2, 1), got {self.hurst}")


@dataclass(frozen=True)
class MixedNoise:
    """Mixed drivers N_i = k_i1*W + k_i2*B^H on a common grid."""

    grid: TimeGrid
    N1: np.ndarray
    N2: np.ndarray
    k11: float
    k12: float
    k21: float
    k22: float


def path_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for substream `stream` of a base seed.

    Streams derived this way are independent and schedule-independent, so
    ensemble results do not depend on worker count or execution order.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def brownian_path(grid: TimeGrid, seed: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Sample a standard Wiener path at the grid nodes, W[0] = 0."""
    if rng is None:
        rng = path_rng(seed, stream=0)
    dW = rng.standard_normal(grid.n_steps) * math.sqrt(grid.dt)
    out = np.empty(grid.n_steps + 1)
    out[0] = 0.0
    np.cumsum(dW, out=out[1:])
    return out


def fbm_covariance(hurst: float, s, t):
    """Covariance R_H(s, t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.

    Accepts scalars or arrays (broadcast).  H = 1/2 reduces to the Brownian
    covariance min(s, t).
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("times must be nonnegative")
    h2 = 2.0 * hurst
    out = 0.5 * (s**h2 + t**h2 - np.abs(t - s) ** h2)
    return out if out.ndim else float(out)


@lru_cache(maxsize=32)
def _cholesky_factor(hurst: float, n_steps: int, dt: float) -> np.ndarray:
    t = (np.arange(1, n_steps + 1)) * dt
    cov = fbm_covariance(hurst, t[:, None], t[None, :])
    c, info = lapack.dpotrf(cov, lower=1)
    if info > 0:
        raise FactorizationError(pivot=info - 1)
    if info < 0:
        raise RuntimeError(f"dpotrf: illegal argument {-info}")
    factor = np.tril(c)
    factor.setflags(write=False)
    return factor


def fbm_path_cholesky(hurst: float, grid: TimeGrid, seed: int,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Exact fBm sample via dense Cholesky factorization of R_H.

    The joint law of the returned nodes is exactly the centered Gaussian with
    covariance R_H(t_j, t_k).  Dense factorization: refuses grids longer than
    CHOLESKY_MAX_STEPS.
    """
    if grid.n_steps > CHOLESKY_MAX_STEPS:
        raise ValueError(
            f"n_steps={grid.n_steps} exceeds dense-factorization guard {CHOLESKY_MAX_STEPS}"
        )
    factor = _cholesky_factor(hurst, grid.n_steps, grid.dt)
    if rng is None:
        rng = path_rng(seed, stream=0)
    z = rng.standard_normal(grid.n_steps)
    out = np.empty(grid.n_steps + 1)
    out[0] = 0.0
    out[1:] = factor @ z
    return out


@lru_cache(maxsize=32)
def _circulant_sqrt_eigs(hurst: float, n_steps: int) -> np.ndarray | None:
    """sqrt of circulant eigenvalues for unit-spaced fGn, or None if non-embeddable."""
    n = n_steps
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([gamma, gamma[-2:0:-1]])  # length 2n
    eigs = np.fft.fft(row).real
    lam_max = eigs.max()
    lam_min = eigs.min()
    if lam_min < 0:
        if abs(lam_min) < CIRCULANT_EIG_TOL * lam_max:
            eigs = np.clip(eigs, 0.0, None)
        else:
            return None
    out = np.sqrt(eigs)
    out.setflags(write=False)
    return out


def fbm_path_circulant(hurst: float, grid: TimeGrid, seed: int,
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """Exact fBm sample via Davies-Harte circulant embedding, O(n log n).

    Same marginal law as `fbm_path_cholesky`.  If the embedding has genuinely
    negative eigenvalues the call falls back to the Cholesky sampler and emits
    a `CirculantFallbackWarning`.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    sq = _circulant_sqrt_eigs(hurst, grid.n_steps)
    if sq is None:
        warnings.warn(
            "circulant embedding not nonnegative definite; falling back to Cholesky",
            CirculantFallbackWarning,
        )
        return fbm_path_cholesky(hurst, grid, seed, rng=rng)
    if rng is None:
        rng = path_rng(seed, stream=0)
    n = grid.n_steps
    m = 2 * n
    z = np.zeros(m, dtype=complex)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    a = rng.standard_normal(n - 1)
    b = rng.standard_normal(n - 1)
    z[1:n] = (a + 1j * b) / math.sqrt(2.0)
    z[n + 1:] = np.conj(z[1:n][::-1])
    fgn = math.sqrt(m) * np.fft.ifft(sq * z).real[:n]
    fgn *= grid.dt**hurst
    out = np.empty(n + 1)
    out[0] = 0.0
    np.cumsum(fgn, out=out[1:])
    return out


def _kernel_bracket(hurst: float, t: float, s: float) -> float:
    """Unnormalized Volterra kernel: power term minus the weighted tail integral."""
    hm = hurst - 0.5
    first = (t / s) ** hm * (t - s) ** hm

    def integrand(u):
        return u ** (hurst - 1.5) * (u - s) ** hm

    tail, _ = quad(integrand, s, t, limit=200)
    return first - hm * s ** (-hm) * tail


@lru_cache(maxsize=16)
def volterra_kernel_constant(hurst: float) -> float:
    """Normalizer C_H fixed by the isometry  int_0^t K_H(t,s)^2 ds = t^{2H}.

    By the (H - 1/2)-self-similarity of the kernel it suffices to normalize at
    t = 1.  The squared-bracket integral has an integrable s^{1-2H} singularity
    at s = 0, split off analytically for quadrature robustness.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    val, _ = quad(lambda s: _kernel_bracket(hurst, 1.0, s) ** 2, 0.0, 1.0,
                  limit=400, points=[0.0, 1.0])
    return 1.0 / math.sqrt(val)


def volterra_kernel(hurst: float, t: float, s: float) -> float:
    """Volterra kernel K_H(t, s) for 0 < s < t, adaptive-quadrature evaluation.

    K_H(t,s) = C_H [ (t/s)^{H-1/2} (t-s)^{H-1/2}
                     - (H-1/2) \\int_s^t u^{H-3/2} s^{1/2-H} (u-s)^{H-1/2} du ],

    with C_H from `volterra_kernel_constant`, so that the Ito isometry
    reproduces Var(B^H(t)) = t^{2H}.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    if not 0.0 < s < t:
        raise ValueError(f"need 0 < s < t, got s={s}, t={t}")
    return volterra_kernel_constant(hurst) * _kernel_bracket(hurst, t, s)


_GL_NODES, _GL_WEIGHTS = leggauss(24)


@lru_cache(maxsize=16)
def _kernel_matrix_cached(hurst: float, n_steps: int, dt: float) -> np.ndarray:
    """Lower-triangular K_H(t_k, s_{j+1/2}) for all 0 <= j < k <= n_steps.

    Uses the integrated-by-parts form
        K_H(t,s) = C_H s^{1/2-H} \\int_0^{(t-s)^{H-1/2}} (s + w^{1/(H-1/2)})^{H-1/2} dw,
    whose integrand is smooth, evaluated with fixed Gauss-Legendre nodes
    (vectorized over all grid pairs).  Row k gives the weights mapping Wiener
    increments dW_j to B^H(t_k).
    """
    hm = hurst - 0.5
    t = np.arange(1, n_steps + 1)[:, None] * dt
    s = (np.arange(n_steps)[None, :] + 0.5) * dt
    mask = s < t
    tt = np.where(mask, t, 1.0)
    ss = np.where(mask, s, 0.5)
    upper = (tt - ss) ** hm
    # map GL nodes from [-1, 1] onto [0, upper]
    w_nodes = 0.5 * upper[..., None] * (_GL_NODES + 1.0)
    vals = (ss[..., None] + w_nodes ** (1.0 / hm)) ** hm
    integral = 0.5 * upper * (vals @ _GL_WEIGHTS)
    out = volterra_kernel_constant(hurst) * ss ** (-hm) * integral
    out[~mask] = 0.0
    out.setflags(write=False)
    return out


def volterra_kernel_matrix(hurst: float, grid: TimeGrid) -> np.ndarray:
    """Kernel matrix K[k-1, j] = K_H(t_k, t_{j+1/2}) used by `fbm_from_brownian`."""
    if grid.n_steps > CHOLESKY_MAX_STEPS:
        raise ValueError(
            f"n_steps={grid.n_steps} exceeds kernel-matrix guard {CHOLESKY_MAX_STEPS}"
        )
    return _kernel_matrix_cached(hurst, grid.n_steps, grid.dt)


def fbm_from_brownian(hurst: float, w_increments: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Build the dependent fBm from Wiener increments via the Volterra kernel.

    B^H(t_k) = sum_{j<k} K_H(t_k, t_{j+1/2}) dW_j.  Midpoint kernel nodes avoid
    the s -> 0 singularity and the degenerate s -> t endpoint.  The covariance
    of the output converges to R_H as dt -> 0.
    """
    w_increments = np.asarray(w_increments, dtype=float)
    if len(w_increments) != grid.n_steps:
        raise ValueError(
            f"expected {grid.n_steps} increments, got {len(w_increments)}"
        )
    kmat = volterra_kernel_matrix(hurst, grid)
    out = np.empty(grid.n_steps + 1)
    out[0] = 0.0
    out[1:] = kmat @ w_increments
    return out


@lru_cache(maxsize=16)
def _wiener_fbm_cov_unit(hurst: float) -> float:
    val, _ = quad(lambda r: volterra_kernel(hurst, 1.0, r), 0.0, 1.0,
                  limit=400, points=[0.0, 1.0])
    return val


def wiener_fbm_covariance(hurst: float, t: float) -> float:
    """Cov(W(t), B^H(t)) = int_0^t K_H(t, r) dr for the Volterra-coupled pair.

    Self-similarity gives Cov(t) = Cov(1) * t^{H + 1/2}; the unit value is
    computed once by adaptive quadrature and cached.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    return _wiener_fbm_cov_unit(hurst) * t ** (hurst + 0.5)


def mixed_noise(path: NoisePath, k11: float, k12: float, k21: float, k22: float) -> MixedNoise:
    """Form N_i = k_i1 * W + k_i2 * B^H, exactly, node by node."""
    for name, val in (("k11", k11), ("k12", k12), ("k21", k21), ("k22", k22)):
        if val < 0:
            raise ValueError(f"{name} must be nonnegative, got {val}")
    return MixedNoise(
        grid=path.grid,
        N1=k11 * path.W + k12 * path.BH,
        N2=k21 * path.W + k22 * path.BH,
        k11=k11, k12=k12, k21=k21, k22=k22,
    )


def sample_noise_path(grid: TimeGrid, hurst: float, seed: int,
                      dependence: Dependence | str = Dependence.INDEPENDENT,
                      method: str = "circulant") -> NoisePath:
    """Sample the (W, B^H) pair for one realization.

    Independent mode draws W and B^H from separate substreams of `seed`;
    Volterra mode drives B^H by the same Wiener increments as W.  `method`
    selects the fBm sampler in independent mode ("circulant" or "cholesky").
    """
    dependence = Dependence(dependence)
    w = brownian_path(grid, seed, rng=path_rng(seed, stream=0))
    if dependence is Dependence.VOLTERRA:
        bh = fbm_from_brownian(hurst, np.diff(w), grid)
    elif method == "cholesky":
        bh = fbm_path_cholesky(hurst, grid, seed, rng=path_rng(seed, stream=1))
    else:
        bh = fbm_path_circulant(hurst, grid, seed, rng=path_rng(seed, stream=1))
    return NoisePath(grid=grid, W=w, BH=bh, hurst=hurst, dependence=dependence)


def write_noise_csv(fh, path: NoisePath, mixed: MixedNoise) -> None:
    """Write the path as CSV rows `t,W,BH,N1,N2` at full double precision."""
    fh.write("t,W,BH,N1,N2\n")
    for t, w, bh, n1, n2 in zip(path.grid.times(), path.W, path.BH, mixed.N1, mixed.N2):
        fh.write(f"{t:.17g},{w:.17g},{bh:.17g},{n1:.17g},{n2:.17g}\n")
