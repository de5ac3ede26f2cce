"""Pathwise quenching-time bounds and quenching-probability bounds.

Everything here is driven by exponential functionals of the noise pair,

    J(t) = int_0^t exp(rho_1 W(s) + rho_2 B^H(s) + sigma s) ds,

whose first passage over fixed levels yields lower/upper bounds for the
quenching time of a sample path, and whose moment/tail estimates yield global
probability bounds.  Running integrals use the trapezoid rule on the
simulation grid; stochastic first-passage times are reported at the right
endpoint of the crossing step.  Configurations with zero noise intensity
reduce to deterministic integrands, for which the passage times are returned
in closed form instead.

Two printed variants exist for two of the probability bounds (a squared vs an
unsquared concentration denominator, and a factor-2 vs factor-4 fBm moment
exponent); both are exposed through the `variant` arguments ("statement" and
"proof"), with per-bound defaults.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .config import BC_ROBIN, SystemConfig
from .noise import Dependence, MixedNoise, wiener_fbm_covariance
from .spectral import RobinEigenpair, SemigroupBound, make_semigroup_bound, quad_gauss

__all__ = [
    "BoundParams",
    "BoundReport",
    "ProbBound",
    "SupRatioEstimate",
    "CoefficientConditionError",
    "exp_functional",
    "exp_functional_cumulative",
    "first_passage_time",
    "depletion_factor",
    "depletion_factor_series",
    "tau_star",
    "tau_upper",
    "tau_double_star",
    "rate_envelopes",
    "rate_envelope_series",
    "mean_exp_functional",
    "quench_prob_upper",
    "tail_bound_dependent",
    "tail_bound_independent",
    "quench_prob_lower",
    "estimate_sup_ratio",
    "PathBoundEvaluator",
]

SATURATION_CAP = 1e300
SYMMETRY_TOL = 1e-12


class CoefficientConditionError(ValueError):
    """Noise intensities violate the symmetric-rows condition required here."""


@dataclass(frozen=True)
class BoundParams:
    """Scalar coefficients entering every closed-form bound.

    sigma = 3(chi + k2) with k2 = min(k11^2, k21^2)/2; lambda_tilde =
    min(lam11 + lam22, lam12 + lam21); E0 = int (g1 + g2) psi; the passage
    level is U = E0^3 / (12 lambda_tilde).  rho[i][j] = 3 k[i][j]; when both
    noise rows agree (rho1, rho2) are set and the single-exponential
    reductions apply.
    """

    chi: float
    psi_min: float
    psi_sq: float
    k: tuple[tuple[float, float], tuple[float, float]]
    lam: tuple[tuple[float, float], tuple[float, float]]
    hurst: float
    dependence: Dependence
    sigma: float
    k2: float
    lambda_tilde: float
    E0: float
    symmetric: bool
    rho1: float | None
    rho2: float | None
    eigen_c: tuple[float, float] | None

    @property
    def rho(self) -> np.ndarray:
        return 3.0 * np.asarray(self.k, dtype=float)

    @property
    def threshold(self) -> float:
        if self.lambda_tilde == 0.0:
            return math.inf
        return self.E0**3 / (12.0 * self.lambda_tilde)

    def require_symmetric(self):
        if not self.symmetric:
            raise CoefficientConditionError(
                "noise rows must agree (k21 = k11, k22 = k12) for this bound"
            )

    @classmethod
    def from_config(cls, config: SystemConfig, pair: RobinEigenpair) -> "BoundParams":
        if config.bc != BC_ROBIN:
            raise ValueError("bound formulas are defined for Robin boundary conditions")
        (k11, k12), (k21, k22) = config.k
        lam = config.lam
        k2 = 0.5 * min(k11 * k11, k21 * k21)
        chi = pair.chi
        lam_tilde = min(lam[0][0] + lam[1][1], lam[0][1] + lam[1][0])
        init = config.initial
        if init.kind == "eigen":
            eigen_c = (init.c1, init.c2)
        else:
            eigen_c = None
        e0 = quad_gauss(lambda x: np.sum(init.g_values(x, pair), axis=0) * pair.psi(x))
        symmetric = config.noise_rows_symmetric(SYMMETRY_TOL)
        return cls(
            chi=chi, psi_min=pair.psi_min, psi_sq=pair.psi_sq_integral,
            k=config.k, lam=lam, hurst=config.hurst, dependence=config.dependence,
            sigma=3.0 * (chi + k2), k2=k2, lambda_tilde=lam_tilde, E0=e0,
            symmetric=symmetric,
            rho1=3.0 * k11 if symmetric else None,
            rho2=3.0 * k12 if symmetric else None,
            eigen_c=eigen_c,
        )


@dataclass(frozen=True)
class ProbBound:
    """A probability bound value in [0, 1] with evaluation flags."""

    value: float
    vacuous: bool = False
    clipped: bool = False

    @property
    def flags(self) -> tuple[str, ...]:
        out = []
        if self.vacuous:
            out.append("vacuous")
        if self.clipped:
            out.append("clipped")
        return tuple(out)


def _cap(values: np.ndarray) -> tuple[np.ndarray, bool]:
    saturated = bool(np.any(values > SATURATION_CAP))
    if saturated:
        values = np.minimum(values, SATURATION_CAP)
    return values, saturated


def exp_functional_cumulative(times: np.ndarray, W: np.ndarray, BH: np.ndarray,
                              rho1: float, rho2: float, sigma: float) -> tuple[np.ndarray, bool]:
    """Running trapezoid integral of exp(rho1 W + rho2 B^H + sigma t)."""
    f = np.exp(rho1 * np.asarray(W) + rho2 * np.asarray(BH) + sigma * np.asarray(times))
    f, saturated = _cap(f)
    dt = np.diff(times)
    out = np.empty(len(times))
    out[0] = 0.0
    np.cumsum(0.5 * dt * (f[:-1] + f[1:]), out=out[1:])
    return out, saturated


def exp_functional(times: np.ndarray, W: np.ndarray, BH: np.ndarray,
                   rho1: float, rho2: float, sigma: float, upto: int | None = None) -> float:
    """Trapezoid value of the exponential functional up to grid step `upto`."""
    cum, _ = exp_functional_cumulative(times, W, BH, rho1, rho2, sigma)
    return float(cum[-1 if upto is None else upto])


def first_passage_time(times: np.ndarray, cumulative: np.ndarray, threshold: float) -> float | None:
    """Right endpoint of the step on which the running integral crosses `threshold`."""
    if not math.isfinite(threshold):
        return None
    idx = int(np.searchsorted(cumulative, threshold, side="left"))
    if idx >= len(times):
        return None
    return float(times[idx])


def _max_exp_pair(mixed: MixedNoise, i: int) -> np.ndarray:
    """max(exp(3 N_i), exp(N_i + 2 N_j)) on the grid, capped."""
    ni = mixed.N1 if i == 1 else mixed.N2
    nj = mixed.N2 if i == 1 else mixed.N1
    vals = np.exp(np.maximum(3.0 * ni, ni + 2.0 * nj))
    return _cap(vals)[0]


def depletion_factor_series(i: int, mixed: MixedNoise, mu: SemigroupBound,
                            lam_row_sum: float) -> np.ndarray:
    """G_i(t_k) on the grid; NaN marks depleted entries (negative bracket).

    G_i = [1 - 4 (lam_i1 + lam_i2) int_0^t max(e^{3N_i}, e^{N_i+2N_j})
           mu_i(r)^{-3} dr]^{1/4}.
    """
    times = mixed.grid.times()
    mu_vals = mu.values_on(times)
    if np.any(mu_vals <= 0):
        raise ValueError("semigroup envelope must stay positive on the grid")
    f = _cap(_max_exp_pair(mixed, i) * mu_vals**-3)[0]
    dt = np.diff(times)
    integral = np.empty(len(times))
    integral[0] = 0.0
    np.cumsum(0.5 * dt * (f[:-1] + f[1:]), out=integral[1:])
    bracket = 1.0 - 4.0 * lam_row_sum * integral
    out = np.full(len(times), np.nan)
    ok = bracket >= 0.0
    out[ok] = bracket[ok] ** 0.25
    return out


def depletion_factor(i: int, mixed: MixedNoise, mu: SemigroupBound,
                     lam_i1: float, lam_i2: float, upto: int) -> float | None:
    """G_i at grid step `upto`; None once the bracket has gone negative."""
    series = depletion_factor_series(i, mixed, mu, lam_i1 + lam_i2)
    val = series[upto]
    return None if math.isnan(val) else float(val)


def _zero_noise(params: BoundParams) -> bool:
    return all(v == 0.0 for row in params.k for v in row)


def tau_star(mixed: MixedNoise, mu1: SemigroupBound, mu2: SemigroupBound,
             lam: tuple[tuple[float, float], tuple[float, float]],
             params: BoundParams | None = None) -> float | None:
    """Pathwise lower bound for the quenching time (first depletion of G_1 or G_2).

    Zero-noise configurations with exact exponential envelopes admit the
    closed form per component,

        tau_i = ln(1 + 3 r_i amp_i^3 / (4 (lam_i1 + lam_i2))) / (3 r_i),

    where mu_i(t) = amp_i exp(-r_i t); otherwise the crossing of the running
    integral over 1 / (4 (lam_i1 + lam_i2)) is located on the grid.
    """
    rows = (lam[0][0] + lam[0][1], lam[1][0] + lam[1][1])
    deterministic = (params is not None and _zero_noise(params)
                     and mu1.method == "eigen_exact" and mu2.method == "eigen_exact")
    if deterministic:
        taus = []
        for mu, row in ((mu1, rows[0]), (mu2, rows[1])):
            if row == 0.0:
                continue
            rate3 = 3.0 * mu.decay_rate
            taus.append(math.log1p(rate3 * mu.amplitude**3 / (4.0 * row)) / rate3)
        return min(taus) if taus else None

    times = mixed.grid.times()
    dt = np.diff(times)
    best = None
    for i, (mu, row) in enumerate(((mu1, rows[0]), (mu2, rows[1])), start=1):
        if row == 0.0:
            continue
        mu_vals = mu.values_on(times)
        f = _cap(_max_exp_pair(mixed, i) * mu_vals**-3)[0]
        integral = np.empty(len(times))
        integral[0] = 0.0
        np.cumsum(0.5 * dt * (f[:-1] + f[1:]), out=integral[1:])
        t = first_passage_time(times, integral, 1.0 / (4.0 * row))
        if t is not None and (best is None or t < best):
            best = t
    return best


def _min_exp_combo(mixed: MixedNoise, combos, W: np.ndarray, BH: np.ndarray) -> np.ndarray:
    exponents = np.min([a * W + b * BH for a, b in combos], axis=0)
    return exponents


def tau_upper(mixed: MixedNoise, params: BoundParams,
              W: np.ndarray, BH: np.ndarray) -> float | None:
    """Pathwise upper bound for the quenching time under symmetric noise rows.

    First passage of int_0^t min_i exp(rho_i1 W + rho_i2 B^H) e^{sigma s} ds
    over E0^3 / (12 lambda_tilde); with zero noise the closed form
    ln(1 + sigma U) / sigma is returned.
    """
    params.require_symmetric()
    u = params.threshold
    if not math.isfinite(u):
        return None
    if _zero_noise(params):
        return math.log1p(params.sigma * u) / params.sigma
    rho = params.rho
    times = mixed.grid.times()
    expo = _min_exp_combo(mixed, [(rho[0, 0], rho[0, 1]), (rho[1, 0], rho[1, 1])], W, BH)
    f = _cap(np.exp(expo + params.sigma * times))[0]
    dt = np.diff(times)
    cum = np.empty(len(times))
    cum[0] = 0.0
    np.cumsum(0.5 * dt * (f[:-1] + f[1:]), out=cum[1:])
    return first_passage_time(times, cum, u)


def tau_double_star(mixed: MixedNoise, params: BoundParams,
                    W: np.ndarray, BH: np.ndarray) -> float | None:
    """Upper bound without the symmetric-rows condition (four-way minimum)."""
    u = params.threshold
    if not math.isfinite(u):
        return None
    if _zero_noise(params):
        return math.log1p(params.sigma * u) / params.sigma
    (k11, k12), (k21, k22) = params.k
    combos = [
        (3.0 * k11, 3.0 * k12),
        (k11 + 2.0 * k21, k12 + 2.0 * k22),
        (3.0 * k21, 3.0 * k22),
        (k21 + 2.0 * k11, k22 + 2.0 * k12),
    ]
    times = mixed.grid.times()
    expo = _min_exp_combo(mixed, combos, W, BH)
    f = _cap(np.exp(expo + params.sigma * times))[0]
    dt = np.diff(times)
    cum = np.empty(len(times))
    cum[0] = 0.0
    np.cumsum(0.5 * dt * (f[:-1] + f[1:]), out=cum[1:])
    return first_passage_time(times, cum, u)


def _upper_bracket_series(mixed: MixedNoise, params: BoundParams, c1: float, c2: float,
                          W: np.ndarray, BH: np.ndarray) -> np.ndarray:
    rho = params.rho
    times = mixed.grid.times()
    expo = np.max([rho[0, 0] * W + rho[0, 1] * BH, rho[1, 0] * W + rho[1, 1] * BH], axis=0)
    f = _cap(np.exp(expo + params.sigma * times))[0]
    dt = np.diff(times)
    cum = np.empty(len(times))
    cum[0] = 0.0
    np.cumsum(0.5 * dt * (f[:-1] + f[1:]), out=cum[1:])
    return (c1 + c2) ** 3 * params.psi_sq**3 - 12.0 * params.lambda_tilde * cum


def rate_envelope_series(mixed: MixedNoise, params: BoundParams, c1: float, c2: float,
                         W: np.ndarray, BH: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper envelopes for min_x min_i z_i(t) on the grid (NaN = undefined).

    Requires symmetric noise rows and eigenfunction initial data z_i(0) = c_i psi:

        lower(t) = min(c1, c2) psi_min e^{-(chi + k2) t} min(G_1, G_2),
        upper(t) = (1/2) e^{-(chi + k2) t} [ (c1+c2)^3 (int psi^2)^3
                     - 12 lambda_tilde int_0^t max_i e^{rho_i1 W + rho_i2 B^H}
                       e^{sigma s} ds ]^{1/3}.
    """
    params.require_symmetric()
    (k11, _), (k21, _) = params.k
    times = mixed.grid.times()
    decay = np.exp(-(params.chi + params.k2) * times)

    g_series = []
    for i, (c, k1) in enumerate(((c1, k11), (c2, k21)), start=1):
        mu = SemigroupBound(method="eigen_exact", amplitude=c * params.psi_min,
                            decay_rate=params.chi + 0.5 * k1 * k1)
        row = params.lam[i - 1][0] + params.lam[i - 1][1]
        g_series.append(depletion_factor_series(i, mixed, mu, row))
    g_min = np.minimum(g_series[0], g_series[1])  # NaN propagates
    lower = min(c1, c2) * params.psi_min * decay * g_min

    bracket = _upper_bracket_series(mixed, params, c1, c2, W, BH)
    upper = np.full(len(times), np.nan)
    ok = bracket >= 0.0
    upper[ok] = 0.5 * decay[ok] * bracket[ok] ** (1.0 / 3.0)
    return lower, upper


def rate_envelopes(mixed: MixedNoise, params: BoundParams, c1: float, c2: float,
                   W: np.ndarray, BH: np.ndarray, t: float) -> tuple[float | None, float | None]:
    """Envelope pair at a single time (grid lookup); None where undefined."""
    times = mixed.grid.times()
    idx = int(np.argmin(np.abs(times - t)))
    lower, upper = rate_envelope_series(mixed, params, c1, c2, W, BH)
    lo = None if math.isnan(lower[idx]) else float(lower[idx])
    up = None if math.isnan(upper[idx]) else float(upper[idx])
    return lo, up


def _pair_variance(params: BoundParams, s: float) -> float:
    """Var(rho1 W(s) + rho2 B^H(s)) under the configured dependence mode."""
    rho1, rho2 = params.rho1, params.rho2
    var = rho1 * rho1 * s + rho2 * rho2 * s ** (2.0 * params.hurst)
    if params.dependence is Dependence.VOLTERRA and rho1 * rho2 != 0.0:
        var += 2.0 * rho1 * rho2 * wiener_fbm_covariance(params.hurst, s)
    return var


def mean_exp_functional(T: float, params: BoundParams) -> float:
    """m0(T) = int_0^T e^{sigma s} E[exp(rho1 W(s) + rho2 B^H(s))] ds.

    The Gaussian moment is exp(Var/2) with the cross term present only in
    Volterra (dependent) mode.
    """
    params.require_symmetric()
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0:
        return 0.0

    def integrand(s):
        return math.exp(params.sigma * s + 0.5 * _pair_variance(params, s))

    val, _ = quad(integrand, 0.0, T, limit=200)
    return val


def quench_prob_upper(T: float, params: BoundParams, variant: str = "statement") -> ProbBound:
    """Gaussian concentration upper bound on the probability of quenching by T.

    2 exp(-(ln U - ln m0(T))^2 / denom) with U = E0^3/(12 lambda_tilde); the
    "statement" variant uses denom = 2 (2 rho1^2 T + 2 rho2^2 T^{2H})^2, the
    "proof" variant the unsquared denom = 2 (2 rho1^2 T + 2 rho2^2 T^{2H}).
    Hypothesis U > m0(T); otherwise the bound is vacuous (value 1).
    """
    params.require_symmetric()
    if variant not in ("statement", "proof"):
        raise ValueError(f"variant must be 'statement' or 'proof', got {variant!r}")
    u = params.threshold
    m0 = mean_exp_functional(T, params)
    if not math.isfinite(u) or u <= m0:
        return ProbBound(value=1.0, vacuous=True)
    mt = 2.0 * params.rho1**2 * T + 2.0 * params.rho2**2 * T ** (2.0 * params.hurst)
    if mt == 0.0:
        # deterministic integrand cannot reach U before its closed-form time
        return ProbBound(value=0.0)
    denom = 2.0 * mt**2 if variant == "statement" else 2.0 * mt
    val = 2.0 * math.exp(-((math.log(u) - math.log(m0)) ** 2) / denom)
    if val > 1.0:
        return ProbBound(value=1.0, clipped=True)
    return ProbBound(value=val)


def tail_bound_dependent(T: float, params: BoundParams, variant: str = "proof") -> ProbBound:
    """Markov tail bound on P(tau_upper <= T) for Volterra-coupled drivers.

    (6 lambda_tilde / E0^3) [ (e^{(rho1^2 + sigma) T} - 1)/(rho1^2 + sigma)
      + int_0^T e^{sigma s + c rho2^2 s^{2H}} ds ],  c = 4 ("proof", default)
    or c = 2 ("statement").
    """
    params.require_symmetric()
    if params.dependence is not Dependence.VOLTERRA:
        raise ValueError("dependent-case tail bound needs Volterra-coupled drivers")
    if variant not in ("statement", "proof"):
        raise ValueError(f"variant must be 'statement' or 'proof', got {variant!r}")
    if T < 0:
        raise ValueError("T must be nonnegative")
    c = 4.0 if variant == "proof" else 2.0
    rho1, rho2, sigma = params.rho1, params.rho2, params.sigma
    a = rho1 * rho1 + sigma
    first = (math.expm1(a * T) / a) if a > 0 else T
    second, _ = quad(lambda s: math.exp(sigma * s + c * rho2 * rho2 * s ** (2 * params.hurst)),
                     0.0, T, limit=200)
    raw = 6.0 * params.lambda_tilde / params.E0**3 * (first + second)
    if raw > 1.0:
        return ProbBound(value=1.0, clipped=True, vacuous=True)
    return ProbBound(value=raw)


def tail_bound_independent(T: float, params: BoundParams) -> ProbBound:
    """Markov tail bound on P(tau_upper <= T) for independent drivers.

    (12 lambda_tilde / E0^3) int_0^T exp((rho1^2/2 + sigma) s
                                          + (rho2^2/2) s^{2H}) ds.
    """
    params.require_symmetric()
    if params.dependence is not Dependence.INDEPENDENT:
        raise ValueError("independent-case tail bound needs independent drivers")
    if T < 0:
        raise ValueError("T must be nonnegative")
    rho1, rho2, sigma = params.rho1, params.rho2, params.sigma
    val, _ = quad(lambda s: math.exp((0.5 * rho1 * rho1 + sigma) * s
                                     + 0.5 * rho2 * rho2 * s ** (2 * params.hurst)),
                  0.0, T, limit=200)
    raw = 12.0 * params.lambda_tilde / params.E0**3 * val
    if raw > 1.0:
        return ProbBound(value=1.0, clipped=True, vacuous=True)
    return ProbBound(value=raw)


def quench_prob_lower(alpha: float, params: BoundParams, sup_ratio: float) -> ProbBound:
    """Lower bound on the probability of finite-time quenching.

    1 - exp(-alpha^2 (L-1)^2 / (rho1^2 (2a-1)^{2-1/a} ln(U+1)^{1/a-2}
            + 2 rho2^2 a^2 ln(U+1)^{2H/a-2} ((a-H)/a)^{2-2H/a})),
    where L = `sup_ratio` (Monte Carlo estimate of the expected supremum
    ratio, >= 1) and a = alpha in (H, 1).
    """
    params.require_symmetric()
    h = params.hurst
    if not h < alpha < 1.0:
        raise ValueError(f"alpha must lie in (hurst, 1), got {alpha}")
    clipped = False
    if sup_ratio < 1.0:
        # Monte Carlo noise can put the estimate marginally below its
        # theoretical floor of 1; the bound is monotone so clamp up.
        sup_ratio = 1.0
        clipped = True
    u = params.threshold
    if not math.isfinite(u):
        return ProbBound(value=0.0, vacuous=True)
    rho1, rho2 = params.rho1, params.rho2
    lnu = math.log1p(u)
    denom = (rho1**2 * (2 * alpha - 1) ** (2 - 1 / alpha) * lnu ** (1 / alpha - 2)
             + 2 * rho2**2 * alpha**2 * lnu ** (2 * h / alpha - 2)
             * ((alpha - h) / alpha) ** (2 - 2 * h / alpha))
    if denom == 0.0:
        return ProbBound(value=0.0, vacuous=True)
    val = 1.0 - math.exp(-(alpha**2) * (sup_ratio - 1.0) ** 2 / denom)
    return ProbBound(value=min(max(val, 0.0), 1.0), clipped=clipped,
                     vacuous=(sup_ratio == 1.0))


@dataclass(frozen=True)
class SupRatioEstimate:
    """Monte Carlo estimate of the expected supremum ratio (with diagnostics)."""

    value: float
    std_error: float
    frac_sup_at_tmax: float
    truncation_warning: bool


def estimate_sup_ratio(alpha: float, params: BoundParams, n_paths: int, t_max: float,
                       seed: int, n_grid: int = 2000) -> SupRatioEstimate:
    """Estimate E[sup_{t <= t_max} (ln(J(t) + 1) + t^alpha)/(ln(U+1) + t^alpha)].

    J is the exponential functional with drift sigma.  The supremum over all
    t >= 0 is truncated at `t_max`; if more than 5% of paths attain their
    supremum at the last grid point the estimate carries a truncation warning.
    """
    from .noise import TimeGrid, sample_noise_path

    params.require_symmetric()
    if not params.hurst < alpha < 1.0:
        raise ValueError(f"alpha must lie in (hurst, 1), got {alpha}")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    u = params.threshold
    lnu = math.log1p(u if math.isfinite(u) else SATURATION_CAP)
    grid = TimeGrid(n_steps=n_grid, dt=t_max / n_grid)
    times = grid.times()
    talpha = times**alpha
    sups = np.empty(n_paths)
    at_tmax = 0
    for p in range(n_paths):
        path = sample_noise_path(grid, params.hurst, seed + p, params.dependence)
        cum, _ = exp_functional_cumulative(times, path.W, path.BH,
                                           params.rho1, params.rho2, params.sigma)
        ratio = (np.log1p(cum) + talpha) / (lnu + talpha)
        idx = int(np.argmax(ratio))
        sups[p] = ratio[idx]
        if idx == n_grid:
            at_tmax += 1
    value = float(sups.mean())
    se = float(sups.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0
    frac = at_tmax / n_paths
    return SupRatioEstimate(value=value, std_error=se, frac_sup_at_tmax=frac,
                            truncation_warning=frac > 0.05)


@dataclass
class BoundReport:
    """Per-path bound evaluation: passage times, envelopes, ordering flag."""

    tau_star: float | None
    tau_upper: float | None
    tau_double_star: float | None
    g1: np.ndarray
    g2: np.ndarray
    envelope_lower: np.ndarray | None
    envelope_upper: np.ndarray | None
    satisfied_ordering: bool | None


class PathBoundEvaluator:
    """Evaluates the pathwise bounds for many paths of one configuration.

    The semigroup envelopes are deterministic, so they are built once (exact
    exponential envelopes for eigenfunction initial data, a single implicit
    heat solve otherwise) and reused across all paths of an ensemble.
    """

    def __init__(self, config: SystemConfig, pair: RobinEigenpair):
        self.config = config
        self.pair = pair
        self.params = BoundParams.from_config(config, pair)
        (k11, _), (k21, _) = config.k
        init = config.initial
        if init.kind == "eigen":
            self.mu1 = make_semigroup_bound(pair, None, k11, eigen_amplitude=init.c1)
            self.mu2 = make_semigroup_bound(pair, None, k21, eigen_amplitude=init.c2)
        else:
            x = np.linspace(0.0, 1.0, max(config.M, 64) + 1)
            g = init.g_values(x, pair)
            self.mu1 = make_semigroup_bound(pair, g[0], k11,
                                            horizon=config.T, n_steps=config.N)
            self.mu2 = make_semigroup_bound(pair, g[1], k21,
                                            horizon=config.T, n_steps=config.N)

    def evaluate(self, noise, mixed: MixedNoise, with_envelopes: bool = False) -> BoundReport:
        p = self.params
        t_star = tau_star(mixed, self.mu1, self.mu2, p.lam, params=p)
        t_up = tau_upper(mixed, p, noise.W, noise.BH) if p.symmetric else None
        t_dd = tau_double_star(mixed, p, noise.W, noise.BH)
        g1 = depletion_factor_series(1, mixed, self.mu1, p.lam[0][0] + p.lam[0][1])
        g2 = depletion_factor_series(2, mixed, self.mu2, p.lam[1][0] + p.lam[1][1])
        lo = up = None
        if with_envelopes and p.symmetric and p.eigen_c is not None:
            lo, up = rate_envelope_series(mixed, p, p.eigen_c[0], p.eigen_c[1],
                                          noise.W, noise.BH)
        ordering = None
        if t_star is not None and t_up is not None:
            ordering = t_star <= t_up + mixed.grid.dt
        return BoundReport(tau_star=t_star, tau_upper=t_up, tau_double_star=t_dd,
                           g1=g1, g2=g2, envelope_lower=lo, envelope_upper=up,
                           satisfied_ordering=ordering)
