"""Command-line entry point ``ringsqueeze``.

Exit codes: 0 success, 1 configuration error, 2 runtime or integration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, analytic
from .config import RunConfig, load_config
from .experiments import EXPERIMENTS, SweepSpec, resolve_workers, run_experiment
from .model import ConfigError, derive_dimensionless

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("ringsqueeze")


def _config(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _cmd_run(args) -> int:
    cfg = _config(args.config).with_overrides(master_seed=args.seed, n_traj=args.traj)
    spec = SweepSpec(args.experiment, cfg, workers=resolve_workers(args.threads),
                     output_path=Path(args.out) if args.out else None)
    table = run_experiment(spec)
    if args.out is None:
        sys.stdout.write(table.to_csv())
    else:
        log.info("wrote %d rows to %s", len(table.rows), args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    params = derive_dimensionless(cfg.physical())
    print(f"ok: c0_tilde={params.c0_tilde:.6g} c2_tilde={params.c2_tilde:.6g} "
          f"omega={params.omega:.6g} 1/s config_hash={cfg.digest()}")
    return EXIT_OK


def _cmd_analytic(args) -> int:
    what = args.what
    if what == "xi":
        state = analytic.TwoModeState(args.r, args.chi, args.n_seed)
        out = {"xi": analytic.wineland_xi(state), "n_mode": analytic.mode_population(state),
               "j_perp": analytic.perpendicular_spin(state), "var_jz": analytic.jz_variance(state)}
    elif what == "min-seed":
        out = {"min_seed": analytic.min_seed_for_squeezing(args.r)}
    elif what == "optimal-r":
        out = {"r_opt": analytic.optimal_r(args.n_total, args.n_seed),
               "xi_hl": analytic.heisenberg_xi(args.n_total, args.n_seed),
               "xi_hl_approx": analytic.heisenberg_xi_approx(args.n_seed)}
    elif what == "frequencies":
        modes = list(range(-args.modes // 2, args.modes // 2))
        freqs = analytic.interrogation_frequencies(args.winding, modes)
        out = {"modes": modes, "frequencies": freqs.tolist(),
               "common_period": analytic.common_period(args.winding, modes)}
    else:  # pragma: no cover - argparse restricts the choices
        raise ValueError(what)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringsqueeze", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment preset and write CSV")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--seed", type=int, help="master RNG seed (overrides config)")
    run.add_argument("--traj", type=int, help="number of trajectories (overrides config)")
    run.add_argument("--out", help="output CSV path (default: stdout)")
    run.add_argument("--threads", type=int,
                     help="worker threads (default: RINGSQUEEZE_THREADS or CPU count)")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    an = sub.add_parser("analytic", help="closed-form two-mode results")
    an_sub = an.add_subparsers(dest="what", required=True)
    xi = an_sub.add_parser("xi", help="Wineland parameter and populations at (r, N_seed)")
    xi.add_argument("--r", type=float, required=True)
    xi.add_argument("--n-seed", type=float, required=True)
    xi.add_argument("--chi", type=float, default=analytic.OPTIMAL_CHI)
    ms = an_sub.add_parser("min-seed", help="smallest seed giving xi < 1")
    ms.add_argument("--r", type=float, required=True)
    opt = an_sub.add_parser("optimal-r", help="optimal squeezing and Heisenberg-normalized xi")
    opt.add_argument("--n-total", type=float, required=True)
    opt.add_argument("--n-seed", type=float, required=True)
    fr = an_sub.add_parser("frequencies", help="free-flight beat frequencies and common period")
    fr.add_argument("--winding", type=int, default=2)
    fr.add_argument("--modes", type=int, default=16)
    an.set_defaults(func=_cmd_analytic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
