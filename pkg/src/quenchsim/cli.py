"""Command-line interface: eigen | simulate | ensemble | bounds | compare.

Every run that writes to an output directory also writes a manifest.json
capturing the full configuration, seeds, and code version, so any CSV can be
reproduced byte for byte.  Exit codes: 0 success, 2 configuration error,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bounds import (BoundParams, PathBoundEvaluator, estimate_sup_ratio,
                     mean_exp_functional, quench_prob_lower, quench_prob_upper,
                     tail_bound_dependent, tail_bound_independent)
from .config import BC_ROBIN, EnsembleConfig
from .fem import simulate
from .montecarlo import check_theorem_consistency, run_ensemble
from .noise import Dependence
from .runconfig import ConfigError, RunConfig, parse_config
from .spectral import solve_robin_eigenpair

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_manifest(out_dir: Path, command: str, config_dict: dict, extra: dict) -> None:
    manifest = {
        "version": __version__,
        "command": command,
        "config": config_dict,
        **extra,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cmd_eigen(args) -> int:
    pair = solve_robin_eigenpair(args.beta)
    print("chi,psi_min,psi_max,normalization_residual")
    print(",".join(_fmt(v) for v in (
        pair.chi, pair.psi_min, pair.psi_max, pair.normalization_residual())))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    run = parse_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = simulate(run.system, args.seed, dump_every=args.dump_every)

    with open(out_dir / "trajectory.csv", "w") as fh:
        fh.write("step,t,sup_u1,sup_u2,min_z1,min_z2\n")
        for n in range(len(traj.times)):
            fh.write(",".join(_fmt(v) for v in (
                n, traj.times[n], traj.sup_u1[n], traj.sup_u2[n],
                traj.min_z1[n], traj.min_z2[n])) + "\n")
    from .noise import write_noise_csv

    with open(out_dir / "noise.csv", "w") as fh:
        write_noise_csv(fh, traj.noise, traj.mixed)
    if traj.fields is not None:
        with open(out_dir / "fields.csv", "w") as fh:
            fh.write("t,x,u1,u2\n")
            for step_idx, u1, u2 in traj.fields:
                t = step_idx * run.system.dt
                for x, a, b in zip(traj.x, u1, u2):
                    fh.write(",".join(_fmt(v) for v in (t, x, a, b)) + "\n")
    _write_manifest(out_dir, "simulate", run.system.to_dict(), {
        "seed": args.seed,
        "dump_every": args.dump_every,
        "quench": None if traj.quench is None else {
            "step": traj.quench.step, "time": traj.quench.time,
            "components": traj.quench.label},
        "aborted": traj.aborted,
    })
    return EXIT_NUMERIC if traj.aborted else EXIT_OK


def _record_flags(rec) -> str:
    flags = []
    if rec.aborted:
        flags.append(f"aborted:{rec.aborted}")
    if not rec.quenched and not rec.aborted:
        flags.append("no_quench")
    if rec.quench_components:
        flags.append(f"component:{rec.quench_components}")
    if rec.ordering_ok is False:
        flags.append("ordering_violation")
    return ";".join(flags)


def _cmd_ensemble(args) -> int:
    run = parse_config(args.config)
    cfg = EnsembleConfig(base=run.system, n_paths=args.n, base_seed=args.seed,
                         variant=run.variant, alpha=run.alpha)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = run_ensemble(cfg, workers=args.workers)

    verdicts = []
    if run.system.bc == BC_ROBIN:
        pair = solve_robin_eigenpair(run.system.beta)
        params = BoundParams.from_config(run.system, pair)
        sup_ratio = None
        if run.alpha is not None and params.symmetric:
            est = estimate_sup_ratio(run.alpha, params,
                                     n_paths=min(cfg.n_paths, 200),
                                     t_max=run.t_max or 4.0 * summary.horizon,
                                     seed=args.seed)
            sup_ratio = est.value
        verdicts = check_theorem_consistency(summary, params, variant=run.variant,
                                             alpha=run.alpha, sup_ratio=sup_ratio)
    summary.bound_comparisons = verdicts

    with open(out_dir / "summary.csv", "w") as fh:
        fh.write("name,bound_value,empirical_value,satisfied,vacuous,note\n")
        for v in verdicts:
            fh.write(",".join((v.name, _fmt(v.bound_value), _fmt(v.empirical_value),
                               _fmt(v.satisfied), _fmt(v.vacuous),
                               '"' + v.note + '"')) + "\n")
    with open(out_dir / "quench_times.csv", "w") as fh:
        fh.write("path_id,tau_num,tau_star,tau_upper,tau_double_star,flags\n")
        for rec in summary.records:
            fh.write(",".join((str(rec.path_id), _fmt(rec.tau_num), _fmt(rec.tau_star),
                               _fmt(rec.tau_upper), _fmt(rec.tau_double_star),
                               _record_flags(rec))) + "\n")
    _write_manifest(out_dir, "ensemble", cfg.to_dict(), {
        "workers_note": "outputs are worker-count independent",
        "stats": {
            "n_paths": summary.n_paths,
            "n_quenched": summary.n_quenched,
            "n_aborted": summary.n_aborted,
            "p_hat": summary.p_hat,
            "p_interval": list(summary.p_interval),
            "horizon": summary.horizon,
            "ordering_violations": summary.ordering_violations,
            "ordering_checked": summary.ordering_checked,
        },
    })
    return EXIT_NUMERIC if summary.n_effective == 0 else EXIT_OK


def _cmd_bounds(args) -> int:
    run = parse_config(args.config)
    if run.system.bc != BC_ROBIN:
        print("error: bound formulas require Robin boundary conditions", file=sys.stderr)
        return EXIT_CONFIG
    pair = solve_robin_eigenpair(run.system.beta)
    params = BoundParams.from_config(run.system, pair)
    variant = args.variant or run.variant
    T = args.T

    rows: list[tuple[str, float, str]] = [
        ("chi", params.chi, ""),
        ("psi_min", params.psi_min, ""),
        ("psi_sq_integral", params.psi_sq, ""),
        ("sigma", params.sigma, ""),
        ("k2", params.k2, ""),
        ("lambda_tilde", params.lambda_tilde, ""),
        ("E0", params.E0, ""),
        ("threshold_U", params.threshold, ""),
    ]
    if params.symmetric:
        rows.append(("m0", mean_exp_functional(T, params), ""))
        ub = quench_prob_upper(T, params, variant or "statement")
        rows.append(("prob_upper_concentration", ub.value, ";".join(ub.flags)))
        if params.dependence is Dependence.VOLTERRA:
            tb = tail_bound_dependent(T, params, variant or "proof")
            rows.append(("prob_upper_tail_dependent", tb.value, ";".join(tb.flags)))
        else:
            tb = tail_bound_independent(T, params)
            rows.append(("prob_upper_tail_independent", tb.value, ";".join(tb.flags)))
        alpha = args.alpha if args.alpha is not None else run.alpha
        if alpha is not None:
            est = estimate_sup_ratio(alpha, params, n_paths=args.sup_paths,
                                     t_max=run.t_max or 4.0 * T,
                                     seed=run.base_seed or 0)
            flags = "truncated" if est.truncation_warning else ""
            rows.append(("sup_ratio_mean", est.value, flags))
            rows.append(("sup_ratio_stderr", est.std_error, ""))
            rows.append(("sup_ratio_frac_at_tmax", est.frac_sup_at_tmax, ""))
            lb = quench_prob_lower(alpha, params, est.value)
            rows.append(("prob_lower", lb.value, ";".join(lb.flags)))
    else:
        rows.append(("symmetric_rows", 0.0, "required_for_probability_bounds"))

    print("quantity,value,flags")
    for name, value, flags in rows:
        print(f"{name},{_fmt(value)},{flags}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    run = parse_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ("kind,path_id,tau_star,tau_num,tau_upper,"
              "name,bound_value,empirical_value,satisfied\n")
    if args.n == 0:
        (out_dir / "compare.csv").write_text(header)
        _write_manifest(out_dir, "compare", run.system.to_dict(),
                        {"n_paths": 0, "base_seed": args.seed})
        return EXIT_OK
    cfg = EnsembleConfig(base=run.system, n_paths=args.n, base_seed=args.seed,
                         variant=run.variant, alpha=run.alpha)
    summary = run_ensemble(cfg, workers=args.workers)
    verdicts = []
    if run.system.bc == BC_ROBIN:
        pair = solve_robin_eigenpair(run.system.beta)
        params = BoundParams.from_config(run.system, pair)
        sup_ratio = None
        if run.alpha is not None and params.symmetric:
            est = estimate_sup_ratio(run.alpha, params, n_paths=min(cfg.n_paths, 200),
                                     t_max=run.t_max or 4.0 * summary.horizon,
                                     seed=args.seed)
            sup_ratio = est.value
        verdicts = check_theorem_consistency(summary, params, variant=run.variant,
                                             alpha=run.alpha, sup_ratio=sup_ratio)
    with open(out_dir / "compare.csv", "w") as fh:
        fh.write(header)
        for rec in summary.records:
            fh.write(",".join(("path", str(rec.path_id), _fmt(rec.tau_star),
                               _fmt(rec.tau_num), _fmt(rec.tau_upper), "", "", "", ""))
                     + "\n")
        for v in verdicts:
            fh.write(",".join(("verdict", "", "", "", "", v.name, _fmt(v.bound_value),
                               _fmt(v.empirical_value), _fmt(v.satisfied))) + "\n")
    _write_manifest(out_dir, "compare", cfg.to_dict(), {
        "stats": {"n_quenched": summary.n_quenched, "n_aborted": summary.n_aborted,
                  "p_hat": summary.p_hat},
    })
    return EXIT_NUMERIC if summary.n_effective == 0 else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quenchsim",
        description="Stochastic reaction-diffusion quenching laboratory",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="principal Robin eigenpair")
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=_cmd_eigen)

    p = sub.add_parser("simulate", help="one sample path")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-every", type=int, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ensemble", help="Monte Carlo ensemble with bound verdicts")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("bounds", help="closed-form bound values for a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--variant", choices=("proof", "statement"), default=None)
    p.add_argument("--sup-paths", type=int, default=200)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("compare", help="per-path bound interval vs numerical quench time")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
