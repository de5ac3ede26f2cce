"""Dataclass configuration for the solver and for Monte Carlo ensembles."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .noise import Dependence
from .spectral import RobinEigenpair

__all__ = ["InitialData", "SystemConfig", "EnsembleConfig", "BC_ROBIN", "BC_DIRICHLET"]

BC_ROBIN = "robin"
BC_DIRICHLET = "dirichlet"

DEFAULT_EPS_QUENCH = 1e-3


@dataclass(frozen=True)
class InitialData:
    """Initial membrane state u_i(0, x) = f_i(x), per component.

    kind "quadratic": f_i(x) = c_i * x * (1 - x)   (c_i = coefficient).
    kind "eigen":     the complementary variable z = 1 - u starts on the
                      eigenfunction, z_i(0) = c_i * psi(x), i.e.
                      f_i(x) = 1 - c_i * psi(x).  Closed-form bound envelopes
                      are available only for this kind.
    """

    kind: str
    c1: float
    c2: float

    def __post_init__(self):
        if self.kind not in ("quadratic", "eigen"):
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if self.kind == "quadratic" and not (0.0 <= self.c1 < 4.0 and 0.0 <= self.c2 < 4.0):
            # max of x(1-x) is 1/4, so c < 4 keeps f < 1
            raise ValueError("quadratic coefficients must lie in [0, 4)")
        if self.kind == "eigen" and not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("eigen coefficients must be positive")

    def f_values(self, x: np.ndarray, pair: RobinEigenpair | None = None) -> np.ndarray:
        """Nodal values of (f_1, f_2), shape (2, len(x))."""
        x = np.asarray(x, dtype=float)
        if self.kind == "quadratic":
            base = x * (1.0 - x)
            return np.stack([self.c1 * base, self.c2 * base])
        if pair is None:
            raise ValueError("eigen initial data needs the Robin eigenpair")
        psi = pair.psi(x)
        return np.stack([1.0 - self.c1 * psi, 1.0 - self.c2 * psi])

    def g_values(self, x: np.ndarray, pair: RobinEigenpair | None = None) -> np.ndarray:
        """Nodal values of z_i(0) = 1 - f_i."""
        return 1.0 - self.f_values(x, pair)


@dataclass(frozen=True)
class SystemConfig:
    """All model constants plus discretization and detection thresholds.

    lam[i][j] are the absorption strengths (row i = component, column 0 = own
    singularity, column 1 = cross term); k[i][j] are the noise intensities
    (column 0 = Wiener, column 1 = fBm).  M spatial elements on (0, 1), N time
    steps on [0, T].
    """

    lam: tuple[tuple[float, float], tuple[float, float]]
    k: tuple[tuple[float, float], tuple[float, float]]
    hurst: float
    beta: float
    beta_c: float
    bc: str
    M: int
    N: int
    T: float
    initial: InitialData
    eps_quench: float = DEFAULT_EPS_QUENCH
    dependence: Dependence = Dependence.INDEPENDENT

    def __post_init__(self):
        object.__setattr__(self, "dependence", Dependence(self.dependence))
        lam = tuple(tuple(float(v) for v in row) for row in self.lam)
        k = tuple(tuple(float(v) for v in row) for row in self.k)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "k", k)
        if any(v < 0 for row in lam for v in row):
            raise ValueError("absorption strengths must be nonnegative")
        if any(v < 0 for row in k for v in row):
            raise ValueError("noise intensities must be nonnegative")
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (1/2, 1), got {self.hurst}")
        if self.bc not in (BC_ROBIN, BC_DIRICHLET):
            raise ValueError(f"bc must be 'robin' or 'dirichlet', got {self.bc!r}")
        if self.bc == BC_ROBIN and not (self.beta > 0 and self.beta_c > 0):
            raise ValueError("Robin coefficients beta, beta_c must be positive")
        if self.M < 3:
            raise ValueError(f"M must be >= 3, got {self.M}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not 0.0 < self.eps_quench < 0.5:
            raise ValueError(f"eps_quench must lie in (0, 0.5), got {self.eps_quench}")
        if self.initial.kind == "eigen" and self.bc != BC_ROBIN:
            raise ValueError("eigenfunction initial data requires Robin boundary conditions")

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def dx(self) -> float:
        return 1.0 / self.M

    def lam_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=float)

    def k_array(self) -> np.ndarray:
        return np.asarray(self.k, dtype=float)

    def noise_rows_symmetric(self, tol: float = 1e-12) -> bool:
        """True when both components share the same noise intensities."""
        (k11, k12), (k21, k22) = self.k
        return abs(k21 - k11) <= tol and abs(k22 - k12) <= tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dependence"] = self.dependence.value
        d["initial"] = asdict(self.initial)
        return d


@dataclass(frozen=True)
class EnsembleConfig:
    """Monte Carlo ensemble: n_paths independent realizations of `base`."""

    base: SystemConfig
    n_paths: int
    base_seed: int
    horizon: float | None = None
    variant: str | None = None  # bound-formula variant, None = per-bound default
    alpha: float | None = None  # exponent for the lower probability bound

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.base.T)
        elif self.horizon > self.base.T + 1e-12:
            raise ValueError("ensemble horizon cannot exceed the simulated T")
        if self.variant not in (None, "proof", "statement"):
            raise ValueError(f"variant must be 'proof' or 'statement', got {self.variant!r}")
        if self.alpha is not None and not self.base.hurst < self.alpha < 1.0:
            raise ValueError("alpha must lie in (hurst, 1)")

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d.update(n_paths=self.n_paths, base_seed=self.base_seed,
                 horizon=self.horizon, variant=self.variant, alpha=self.alpha)
        return d
