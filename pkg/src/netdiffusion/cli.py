"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 data/parse error, 3 numerical
failure.  Failures print one line ``ERROR <code>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import centrality as cen
from .churn import load_sequence, mean_velocity, velocity_profile
from .dynamics import DiffusionModel, equilibrium, estimate_drift, perturbative, regime_diagnostics, run_dynamic
from .errors import DataError, DiffusionError, NumericalError, StudyError
from .experiment import (
    StudyConfig,
    calibrate_alpha,
    execute_study,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from .linalg import max_singular_value, spectral_radius
from .svgplot import emit_plot
from .textio import read_matrix, read_vector, write_trajectory, write_vector

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _out(args, *inputs):
    """Resolve ``--output`` and refuse to overwrite an input file."""
    if args.output is None:
        raise UsageError(f"{args.command}: --output/-o is required")
    out = Path(args.output).resolve()
    for p in inputs:
        if p is not None and Path(p).resolve() == out:
            raise UsageError(f"{args.command}: output {args.output} would overwrite an input file")
    return Path(args.output)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise UsageError(f"{args.command}: missing required {flags}")


def cmd_equilibrium(args):
    _need(args, "input", "forcing")
    out = _out(args, args.input, args.forcing)
    model = DiffusionModel(read_matrix(args.input), read_vector(args.forcing))
    rho, sigma = spectral_radius(model.A), max_singular_value(model.A)
    print(f"spectral_radius {rho!r}")
    print(f"max_singular_value {sigma!r}")
    y = equilibrium(model, allow_nonconvergent=args.allow_nonconvergent)
    write_vector(out, y, comment=f"equilibrium; spectral_radius={rho!r}")


def cmd_perturb(args):
    _need(args, "input", "forcing")
    prev_path, now_path = args.input
    out = _out(args, prev_path, now_path, args.forcing)
    A_prev, A_now = read_matrix(prev_path), read_matrix(now_path)
    z = read_vector(args.forcing)
    D = estimate_drift(A_prev, A_now)
    rep = regime_diagnostics(A_now, D, z)
    print(f"sigma_max_A {rep.sigma_A!r}")
    print(f"sigma_max_D {rep.sigma_D!r}")
    print(f"first_order_norm {rep.first_order_norm!r}")
    print(f"dropped_second_order_norm {rep.second_order_norm!r}")
    print(f"slow_regime {'yes' if rep.slow else 'no'}")
    y = perturbative(A_now, D, z, warn=False)
    if not rep.slow:
        print("WARNING: outside the slow-drift regime (need sigma_max(D) < sigma_max(A) < 1)", file=sys.stderr)
    write_vector(out, y, comment="perturbative")


def cmd_simulate(args):
    _need(args, "input", "forcing")
    out = _out(args, args.input, args.forcing, args.y0)
    seq = load_sequence(args.input)
    z = read_vector(args.forcing)
    y0 = read_vector(args.y0) if args.y0 else z
    alpha = args.alpha if args.alpha is not None else calibrate_alpha(seq.graphs)
    print(f"alpha {alpha!r}")
    traj = run_dynamic(alpha * seq.graphs.astype(float), z, y0)
    write_trajectory(out, traj.states)


def cmd_centrality(args):
    _need(args, "input")
    m = args.model
    required = {
        "katz": ("alpha",),
        "bonacich": ("alpha", "beta"),
        "pagerank": ("delta",),
        "fj": ("susceptibility", "forcing"),
        "salancik": ("membership", "forcing"),
        "nar": ("rho", "covariates", "coefficients"),
    }[m]
    _need(args, *required)
    inputs = [args.input, args.forcing, args.susceptibility, args.membership, args.covariates, args.coefficients, args.drift]
    out = _out(args, *inputs)
    W = read_matrix(args.input)
    if m == "nar":
        D = read_matrix(args.drift) if args.drift else None
        y = cen.nar_mean(W, args.rho, read_matrix(args.covariates), read_vector(args.coefficients), D)
        write_vector(out, y, comment=f"nar rho={args.rho!r}")
        return
    if m == "katz":
        model = cen.katz(W, args.alpha)
    elif m == "bonacich":
        model = cen.bonacich(W, args.alpha, args.beta)
    elif m == "pagerank":
        model = cen.pagerank(W, args.delta)
    elif m == "fj":
        model = cen.friedkin_johnsen(W, read_vector(args.susceptibility), read_vector(args.forcing))
    else:
        model = cen.salancik(W, read_matrix(args.membership), read_vector(args.forcing))
    y = equilibrium(model, allow_nonconvergent=args.allow_nonconvergent)
    write_vector(out, y, comment=f"{m} scores")


def cmd_experiment(args):
    _need(args, "config")
    if not args.dry_run:
        _need(args, "seed")
    cfg = StudyConfig.from_json(args.config, seed=args.seed if args.seed is not None else 0)
    overrides = {"rates": args.rate, "steps": args.steps, "alpha": args.alpha}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    if args.plot and len(cfg.rates) < 2:
        raise UsageError("experiment: --plot needs at least 2 rates")
    if args.dry_run:
        print(f"planned jobs: {cfg.job_count} ({len(cfg.rates)} rates x {cfg.replicates} replicates, {cfg.steps} steps)")
        return
    out = _out(args, args.config)
    summary_path = Path(args.summary) if args.summary else out.with_name(out.stem + ".summary.csv")
    results, aborts = execute_study(cfg, workers=args.workers)
    summary = summarize(results)
    write_results_csv(results, out)
    write_summary_csv(summary, summary_path)
    if args.plot:
        emit_plot(summary, args.plot)
    print(f"records {len(results)} aborted {len(aborts)}")


def cmd_velocity(args):
    _need(args, "input")
    seq = load_sequence(args.input)
    if len(seq) < 2:
        raise DataError("velocity needs at least two cross-sections")
    prof = velocity_profile(seq)
    corr = [r for _, r in prof if not np.isnan(r)]
    print(f"mean_hamming_velocity {mean_velocity(seq)!r}")
    print(f"mean_graph_correlation {float(np.mean(corr)) if corr else float('nan')!r}")
    if args.output:
        out = _out(args, args.input)
        lines = ["step,hamming_distance,graph_correlation"]
        lines += [f"{t},{h},{'' if np.isnan(r) else repr(r)}" for t, (h, r) in enumerate(prof, start=1)]
        out.write_text("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="netdiffusion", description="Forced linear diffusion on static and dynamic networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io(sp, nargs=None, help="input file"):
        sp.add_argument("-i", "--input", nargs=nargs, help=help)
        sp.add_argument("-o", "--output", help="output file")

    sp = sub.add_parser("equilibrium", help="fixed-network equilibrium (I-A)^-1 z")
    io(sp, help="weight matrix A")
    sp.add_argument("--forcing", help="forcing vector z")
    sp.add_argument("--allow-nonconvergent", action="store_true", help="solve even when rho(A) >= 1")
    sp.set_defaults(func=cmd_equilibrium)

    sp = sub.add_parser("perturb", help="perturbative solution from two consecutive weight matrices")
    io(sp, nargs=2, help="A_prev and A_now")
    sp.add_argument("--forcing", help="forcing vector z")
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("simulate", help="iterate the dynamic recurrence over a sequence file")
    io(sp, help="network sequence file")
    sp.add_argument("--forcing", help="forcing vector z")
    sp.add_argument("--y0", help="initial state (default: the forcing vector)")
    sp.add_argument("--alpha", type=float, help="weight scale (default: 1/(2 max rho) over the sequence)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("centrality", help="scores from a named model")
    sp.add_argument("model", choices=["katz", "bonacich", "pagerank", "fj", "salancik", "nar"])
    io(sp, help="weight/adjacency matrix (W, G or A)")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--forcing", help="y_exo (fj) or group scores S (salancik)")
    sp.add_argument("--susceptibility", help="diagonal of S (fj)")
    sp.add_argument("--membership", help="membership matrix M (salancik)")
    sp.add_argument("--covariates", help="covariate matrix X (nar)")
    sp.add_argument("--coefficients", help="coefficient vector beta (nar)")
    sp.add_argument("--drift", help="drift matrix D (nar, optional)")
    sp.add_argument("--allow-nonconvergent", action="store_true")
    sp.set_defaults(func=cmd_centrality)

    sp = sub.add_parser("experiment", help="equilibrium vs perturbative accuracy study")
    sp.add_argument("--config", help="JSON study config")
    sp.add_argument("--seed", type=int, help="base seed (required unless --dry-run)")
    sp.add_argument("-o", "--output", help="results CSV")
    sp.add_argument("--summary", help="summary CSV (default: <output>.summary.csv)")
    sp.add_argument("--plot", help="write an SVG of error vs velocity")
    sp.add_argument("--rate", type=float, action="append", help="event rate (repeatable; replaces the config's rates)")
    sp.add_argument("--steps", type=int, help="override the config's step count")
    sp.add_argument("--alpha", type=float, help="fixed weight scale instead of the config's alpha")
    sp.add_argument("--dry-run", action="store_true", help="validate config and print the job count")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("velocity", help="Hamming velocity / correlation profile of a sequence file")
    io(sp, help="network sequence file")
    sp.set_defaults(func=cmd_velocity)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "workers", 1) is not None and getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            args.func(args)
    except UsageError as exc:
        print(f"ERROR {EXIT_USAGE}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, StudyError) as exc:
        print(f"ERROR {EXIT_NUMERIC}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"ERROR {EXIT_DATA}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DiffusionError as exc:
        print(f"ERROR {EXIT_NUMERIC}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
