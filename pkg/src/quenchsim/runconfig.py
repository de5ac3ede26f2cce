"""Flat JSON run-configuration parsing with exhaustive validation.

The file mirrors the solver configuration plus optional ensemble/bound knobs.
Validation is strict: unknown keys are rejected by name, and every violation
is reported at once rather than only the first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .config import BC_DIRICHLET, BC_ROBIN, DEFAULT_EPS_QUENCH, InitialData, SystemConfig

__all__ = ["RunConfig", "ConfigError", "parse_config", "parse_config_dict"]

_REQUIRED_NUMERIC = [
    "lambda11", "lambda12", "lambda21", "lambda22",
    "k11", "k12", "k21", "k22",
    "hurst", "T",
]
_REQUIRED_INT = ["M", "N"]
_OPTIONAL_KEYS = {
    "bc", "beta", "beta_c", "eps_quench", "dependence",
    "initial_kind", "initial_c1", "initial_c2",
    "n_paths", "base_seed", "variant", "alpha", "t_max",
}
_KNOWN_KEYS = set(_REQUIRED_NUMERIC) | set(_REQUIRED_INT) | _OPTIONAL_KEYS


class ConfigError(ValueError):
    """Invalid run configuration; `violations` lists every problem found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration: the solver config plus ensemble knobs."""

    system: SystemConfig
    n_paths: int | None = None
    base_seed: int | None = None
    variant: str | None = None
    alpha: float | None = None
    t_max: float | None = None


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_config_dict(raw: dict) -> RunConfig:
    """Validate a parsed JSON document; raises ConfigError with all violations."""
    errors: list[str] = []
    for key in sorted(raw):
        if key not in _KNOWN_KEYS:
            errors.append(f"unknown key {key!r}")

    def number(key, default=None):
        if key not in raw:
            if default is None:
                errors.append(f"{key}: missing required field")
            return default
        if not _is_number(raw[key]):
            errors.append(f"{key}: expected a number, got {raw[key]!r}")
            return default
        return float(raw[key])

    def integer(key, default=None):
        if key not in raw:
            if default is None:
                errors.append(f"{key}: missing required field")
            return default
        if not _is_int(raw[key]):
            errors.append(f"{key}: expected an integer, got {raw[key]!r}")
            return default
        return int(raw[key])

    def string(key, default=None, choices=None):
        val = raw.get(key, default)
        if val is not None and not isinstance(val, str):
            errors.append(f"{key}: expected a string, got {val!r}")
            return default
        if choices and val not in choices:
            errors.append(f"{key}: must be one of {sorted(choices)}, got {val!r}")
            return default
        return val

    numbers = {key: number(key) for key in _REQUIRED_NUMERIC}
    ints = {key: integer(key) for key in _REQUIRED_INT}
    bc = string("bc", default=BC_ROBIN, choices={BC_ROBIN, BC_DIRICHLET})
    beta = number("beta", default=1.0) if bc == BC_DIRICHLET and "beta" not in raw \
        else number("beta")
    beta_c = number("beta_c", default=beta if beta is not None else 1.0)
    eps_quench = number("eps_quench", default=DEFAULT_EPS_QUENCH)
    dependence = string("dependence", default="independent",
                        choices={"independent", "volterra"})
    initial_kind = string("initial_kind", default=None,
                          choices={"quadratic", "eigen"})
    if initial_kind is None and "initial_kind" not in raw:
        errors.append("initial_kind: missing required field")
    c1 = number("initial_c1")
    c2 = number("initial_c2")

    hurst = numbers.get("hurst")
    if hurst is not None and not 0.5 < hurst < 1.0:
        errors.append(f"hurst: must lie in the open interval (1/2, 1), got {hurst}")

    n_paths = integer("n_paths", default=0) if "n_paths" in raw else None
    base_seed = integer("base_seed", default=0) if "base_seed" in raw else None
    variant = string("variant", default=None, choices={"proof", "statement", None})
    alpha = number("alpha", default=0.0) if "alpha" in raw else None
    t_max = number("t_max", default=0.0) if "t_max" in raw else None

    if n_paths is not None and n_paths < 1:
        errors.append(f"n_paths: must be >= 1, got {n_paths}")
    if alpha is not None and hurst is not None and not hurst < alpha < 1.0:
        errors.append(f"alpha: must lie in (hurst, 1) = ({hurst}, 1), got {alpha}")
    if t_max is not None and t_max <= 0:
        errors.append(f"t_max: must be positive, got {t_max}")

    system = None
    if not errors:
        try:
            system = SystemConfig(
                lam=((numbers["lambda11"], numbers["lambda12"]),
                     (numbers["lambda21"], numbers["lambda22"])),
                k=((numbers["k11"], numbers["k12"]),
                   (numbers["k21"], numbers["k22"])),
                hurst=hurst, beta=beta, beta_c=beta_c, bc=bc,
                M=ints["M"], N=ints["N"], T=numbers["T"],
                initial=InitialData(kind=initial_kind, c1=c1, c2=c2),
                eps_quench=eps_quench, dependence=dependence,
            )
        except ValueError as exc:
            errors.append(str(exc))
    if errors:
        raise ConfigError(errors)
    return RunConfig(system=system, n_paths=n_paths, base_seed=base_seed,
                     variant=variant, alpha=alpha, t_max=t_max)


def parse_config(path) -> RunConfig:
    """Load and validate a JSON run configuration from `path`."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top-level JSON value must be an object"])
    return parse_config_dict(raw)
