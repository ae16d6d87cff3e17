"""Command-line entry point: constants, equilibrium, simulate, verify, pipeline.

Exit status: 0 on success, 1 on failed verification or aborted simulation,
2 on configuration errors. All randomness flows from the config seed; rerunning
a subcommand with the same inputs reproduces byte-identical outputs except for
the manifest's wall_time_s field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .constants import (
    RateConstants,
    certified_rate,
    moment_bound_quartic,
    support_bound_report,
)
from .dynamics import (
    NearCollisionError,
    SimulationConfig,
    SupportEscapeError,
    Trajectory,
    build_initial_positions,
    default_target,
    simulate,
)
from .equilibrium import confining_equilibrium, nonconfining_equilibrium
from .potentials import (
    QUARTIC_CONFINING,
    QUARTIC_NONCONFINING,
    from_config as potential_from_config,
    quartic_confining,
    quartic_nonconfining,
)
from .verifier import verify_convergence


class ConfigError(Exception):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, subcommand: str, config_path, wall_time: float, inputs=()):
    manifest = {
        "subcommand": subcommand,
        "config": str(config_path) if config_path else None,
        "out_dir": str(out_dir),
        "tool_version": __version__,
        "wall_time_s": wall_time,
        "input_hashes": {str(p): _sha256(Path(p)) for p in inputs if Path(p).is_file()},
    }
    _write_json(out_dir / "manifest.json", manifest)


def _constants_payload(potential, m2_init: float) -> dict:
    if potential.kind == QUARTIC_CONFINING:
        M = moment_bound_quartic(potential.c, m2_init)
        rates = certified_rate(potential, m2_init)
        sharp = certified_rate(potential, m2_init, sharp_gamma=True)
        payload = {
            "potential": potential.to_config(),
            "m2_init": m2_init,
            "M": M,
            "certified": rates is not None,
            "r_best": rates.r if rates else None,
            "beta_star": rates.beta_star if rates else None,
            "lambda": rates.lam if rates else None,
            "rate_2lambda": rates.rate_2lambda if rates else None,
            "variants": {
                "sharp_gamma": sharp.to_dict() if sharp else None,
                "moment_identity": "unhalved (authoritative); halved variant differs only "
                "for the normal-form bound, see moment_bound_general",
                "rate_condition_note": "the lower convexity threshold is compared against "
                "beta*(r) at the searched r",
                "largest_root_reading": True,
            },
        }
        if rates:
            payload["rate_constants"] = rates.to_dict()
        return payload
    if potential.kind == QUARTIC_NONCONFINING:
        report = support_bound_report(m2_init if m2_init > 0 else 1.0, potential.g)
        return {
            "potential": potential.to_config(),
            "m": report["m"],
            "M": report["radius_used"],
            "certified": report["certified"],
            "lambda": None,
            "rate_2lambda": None,
            "support_bound": report,
            "variants": {
                "admissibility_as_printed": report["admissibility_as_printed"],
                "admissibility_squared_variant": report["admissibility_squared_variant"],
            },
        }
    raise ConfigError("constants are available for the quartic families only")


def _cmd_constants(args) -> int:
    t0 = time.perf_counter()
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        potential = potential_from_config(cfg["potential"])
        m2_init = float(cfg.get("m2_init", 0.0))
    elif args.quartic_confining:
        potential = quartic_confining(args.c)
        m2_init = args.m2_init
    elif args.quartic_nonconfining:
        potential = quartic_nonconfining(args.g)
        m2_init = args.m if args.m is not None else 1.0
    else:
        raise ConfigError("choose --config, --quartic-confining or --quartic-nonconfining")
    payload = _constants_payload(potential, m2_init)
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "constants.json").write_text(text + "\n")
        _write_manifest(out, "constants", args.config, time.perf_counter() - t0,
                        [args.config] if args.config else [])
    return 0


def _equilibrium_from_args(args):
    if args.quartic_confining:
        return confining_equilibrium(args.c)
    if args.quartic_nonconfining:
        return nonconfining_equilibrium(args.g)
    raise ConfigError("choose --quartic-confining or --quartic-nonconfining")


def _cmd_equilibrium(args) -> int:
    t0 = time.perf_counter()
    eq = _equilibrium_from_args(args)
    params = eq.params()
    print(json.dumps(params, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "params.json", params)
        if args.grid > 0:
            xs = np.linspace(-eq.support_radius, eq.support_radius, args.grid)
            with open(out / "density.csv", "w") as fh:
                fh.write("x,density\n")
                for x in xs:
                    fh.write(f"{float(x)!r},{float(eq.density(x))!r}\n")
        if args.samples > 0:
            sample = eq.sample(args.samples)
            with open(out / "samples.csv", "w") as fh:
                for v in sample:
                    fh.write(f"{float(v)!r}\n")
        _write_manifest(out, "equilibrium", None, time.perf_counter() - t0)
    return 0


def _load_sim_config(path) -> SimulationConfig:
    try:
        cfg = json.loads(Path(path).read_text())
        return SimulationConfig.from_dict(cfg)
    except (OSError, KeyError, ValueError, TypeError) as err:
        raise ConfigError(f"bad simulation config: {err}") from err


def _run_simulation(config: SimulationConfig, out: Path) -> tuple[Trajectory | None, dict | None]:
    try:
        traj = simulate(config)
        return traj, None
    except (NearCollisionError, SupportEscapeError) as err:
        traj = err.diagnostics.get("trajectory")
        if traj is not None:
            traj.save(out)
        return traj, {k: v for k, v in err.diagnostics.items() if k != "trajectory"}


def _cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    kernels.set_threads(args.threads)
    config = _load_sim_config(args.config)
    out = Path(args.out)
    traj, abort = _run_simulation(config, out)
    if traj is not None and abort is None:
        traj.save(out)
    _write_manifest(out, "simulate", args.config, time.perf_counter() - t0, [args.config])
    if abort is not None:
        print(f"simulation aborted: {json.dumps(abort, sort_keys=True)}", file=sys.stderr)
        return 1
    return 0


def _rates_from_constants_file(path) -> RateConstants | None:
    data = json.loads(Path(path).read_text())
    rc = data.get("rate_constants")
    if rc is None:
        return None
    return RateConstants(
        r=rc["r"], alpha=rc["alpha"], beta=rc["beta"], gamma=rc["gamma"],
        M=rc["M"], p=rc["p"], beta_star=rc["beta_star"], lam=rc["lambda"],
    )


def _cmd_verify(args) -> int:
    t0 = time.perf_counter()
    traj = Trajectory.load(args.run)
    rates = _rates_from_constants_file(args.constants) if args.constants else None
    potential = potential_from_config(traj.meta["config"]["potential"])
    report = verify_convergence(
        traj, rates, potential=potential, tol=args.tol,
        hwi_pairs=args.pairs, lambda_scale=args.lambda_scale,
    )
    out = Path(args.out) if args.out else Path(args.run)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    for line in report.summary_lines():
        print(line)
    if args.out:
        _write_manifest(out, "verify", None, time.perf_counter() - t0,
                        [args.constants] if args.constants else [])
    return 0 if report.all_passed else 1


def _cmd_pipeline(args) -> int:
    t0 = time.perf_counter()
    kernels.set_threads(args.threads)
    config = _load_sim_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # constants from the potential and the configured initial data
    x0 = build_initial_positions(config)
    m2_init = float(np.mean(x0 * x0))
    potential = config.potential
    payload = _constants_payload(potential, m2_init)
    const_dir = out / "constants"
    const_dir.mkdir(exist_ok=True)
    _write_json(const_dir / "constants.json", payload)
    _write_manifest(const_dir, "constants", args.config, 0.0, [args.config])

    # target equilibrium
    target = default_target(potential)
    if target is None:
        raise ConfigError("pipeline needs a potential with a closed-form equilibrium")
    eq_dir = out / "equilibrium"
    eq_dir.mkdir(exist_ok=True)
    _write_json(eq_dir / "params.json", target.params())
    xs = np.linspace(-target.support_radius, target.support_radius, 513)
    with open(eq_dir / "density.csv", "w") as fh:
        fh.write("x,density\n")
        for x in xs:
            fh.write(f"{float(x)!r},{float(target.density(x))!r}\n")
    _write_manifest(eq_dir, "equilibrium", args.config, 0.0, [args.config])

    # simulation
    run_dir = out / "run"
    traj, abort = _run_simulation(config, run_dir)
    if traj is not None and abort is None:
        traj.save(run_dir)
    # ship the contract files for downstream plotting next to the series
    (run_dir / "constants.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    with open(eq_dir / "density.csv") as src, open(run_dir / "density.csv", "w") as dst:
        dst.write(src.read())
    _write_manifest(run_dir, "simulate", args.config, 0.0, [args.config])
    if abort is not None:
        print(f"simulation aborted: {json.dumps(abort, sort_keys=True)}", file=sys.stderr)
        return 1

    # verification
    rates = None
    if payload.get("rate_constants"):
        rc = payload["rate_constants"]
        rates = RateConstants(
            r=rc["r"], alpha=rc["alpha"], beta=rc["beta"], gamma=rc["gamma"],
            M=rc["M"], p=rc["p"], beta_star=rc["beta_star"], lam=rc["lambda"],
        )
    report = verify_convergence(traj, rates, potential=potential)
    verify_dir = out / "verify"
    verify_dir.mkdir(exist_ok=True)
    (verify_dir / "report.json").write_text(report.to_json() + "\n")
    _write_manifest(verify_dir, "verify", args.config, 0.0, [args.config])
    for line in report.summary_lines():
        print(line)
    _write_manifest(out, "pipeline", args.config, time.perf_counter() - t0, [args.config])
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loggas",
        description="Simulate 1D log-gas mean-field dynamics and verify convergence bounds",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_const = sub.add_parser("constants", help="compute certified rate constants")
    p_const.add_argument("--config", help="JSON config with a potential section")
    p_const.add_argument("--quartic-confining", action="store_true")
    p_const.add_argument("--quartic-nonconfining", action="store_true")
    p_const.add_argument("-c", type=float, default=0.0, help="quadratic coefficient c")
    p_const.add_argument("-g", type=float, default=0.0, help="quartic coefficient g")
    p_const.add_argument("-m", type=float, default=None, help="initial support radius (nonconfining)")
    p_const.add_argument("--m2-init", type=float, default=0.0)
    p_const.add_argument("--out")
    p_const.set_defaults(func=_cmd_constants)

    p_eq = sub.add_parser("equilibrium", help="emit closed-form equilibrium data")
    p_eq.add_argument("--quartic-confining", action="store_true")
    p_eq.add_argument("--quartic-nonconfining", action="store_true")
    p_eq.add_argument("-c", type=float, default=0.0)
    p_eq.add_argument("-g", type=float, default=0.0)
    p_eq.add_argument("--samples", type=int, default=0)
    p_eq.add_argument("--grid", type=int, default=0)
    p_eq.add_argument("--out")
    p_eq.set_defaults(func=_cmd_equilibrium)

    p_sim = sub.add_parser("simulate", help="integrate the particle flow")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_ver = sub.add_parser("verify", help="check inequalities on a finished run")
    p_ver.add_argument("--run", required=True)
    p_ver.add_argument("--constants", default=None)
    p_ver.add_argument("--out", default=None)
    p_ver.add_argument("--tol", type=float, default=0.02)
    p_ver.add_argument("--pairs", type=int, default=50)
    p_ver.add_argument("--lambda-scale", type=float, default=1.0)
    p_ver.set_defaults(func=_cmd_verify)

    p_pipe = sub.add_parser("pipeline", help="constants -> equilibrium -> simulate -> verify")
    p_pipe.add_argument("--config", required=True)
    p_pipe.add_argument("--out", required=True)
    p_pipe.add_argument("--threads", type=int, default=None)
    p_pipe.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (NearCollisionError, SupportEscapeError) as err:
        print(f"simulation aborted: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
