"""Command-line interface.

Every subcommand reads its parameters from, in order of precedence, the
command-line flags, the ``--config`` JSON file and the built-in defaults of
:class:`~schatte.harness.ExperimentConfig`.  Output goes to ``--out`` (a path
relative to ``--out-dir``), to a default file name when only ``--out-dir`` is
given, and to stdout otherwise.

Exit status: 0 when every verdict passes, 2 when any does not, 1 on usage or
configuration errors.
"""
import argparse
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .blocks import block_correlation, build_plan, variance_profile
from .covariance import CovarianceModel
from .errors import SchatteError
from .exponents import optimize_gamma
from .gp import GaussianSampler, closed_grid, sample_paths
from .harness import (ExperimentConfig, dumps, run_covariance_experiment,
                      run_distribution_experiment, run_rate_experiment)
from .spectrum import WrappedSpectrum
from .walk import IncrementDistribution, simulate_walk, write_sample_csv

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

DEFAULT_NAMES = {
    "simulate": "walk.csv",
    "spectrum": "spectrum.csv",
    "gamma": "gamma.csv",
    "blocks": "blocks.json",
    "gp-sample": "paths.csv",
    "exponents": "exponents.json",
    "covariance": "covariance.json",
    "distribution": "distribution.json",
    "rate": "rate.json",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v):
    return f"{v:.17g}"


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(str(v) if isinstance(v, (int, np.integer)) else _fmt(v)
                           for v in row) + "\n")
    return buf.getvalue()


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON config file")
    p.add_argument("--seed", type=int, default=d, help="root seed")
    p.add_argument("--out-dir", default=d, help="directory for output files")
    p.add_argument("--threads", type=int, default=d, help="worker threads (default 1)")


def _model_flags(p):
    p.add_argument("--dist", type=IncrementDistribution.parse,
                   help="increment law, e.g. 'uniform(0,0.5)'")
    p.add_argument("--x", type=float)
    p.add_argument("--tol", type=float)


def _out_flag(p):
    p.add_argument("--out", help="output file (relative to --out-dir)")


def build_parser():
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)

    parser = _Parser(prog="schatte",
                     description="Empirical process of random walks modulo one.")
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="one walk as CSV")
    _model_flags(p)
    p.add_argument("--n", type=int)
    _out_flag(p)

    p = sub.add_parser("spectrum", parents=[common], help="|coefficients| of the wrapped law")
    _model_flags(p)
    p.add_argument("--rho", type=int, default=1)
    p.add_argument("--kmax", type=int, default=100)
    _out_flag(p)

    p = sub.add_parser("gamma", parents=[common], help="limiting covariance on a grid")
    _model_flags(p)
    p.add_argument("--grid-step", type=float, default=None)
    _out_flag(p)

    p = sub.add_parser("blocks", parents=[common], help="block-sum variances")
    _model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--replicas", type=int)
    _out_flag(p)

    p = sub.add_parser("gp-sample", parents=[common], help="Gaussian paths on the grid")
    _model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--paths", type=int)
    _out_flag(p)

    p = sub.add_parser("exponents", parents=[common], help="exponent optimisation")
    p.add_argument("--resolution", type=int, default=200)
    _out_flag(p)

    p = sub.add_parser("verify", parents=[common], help="run an experiment")
    p.add_argument("experiment", choices=["covariance", "distribution", "rate"])
    _model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--n-values", type=lambda s: [int(v) for v in s.split(",")],
                   help="comma-separated sample sizes")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--paths", type=int)
    p.add_argument("--gamma-scale", type=float)
    p.add_argument("--inject-discrepancy", type=float)
    _out_flag(p)
    return parser


_CONFIG_KEYS = ("dist", "x", "n", "n_values", "epsilon", "alpha", "beta", "tol", "seed",
                "replicas", "paths", "t", "grid_step", "gamma_scale", "inject_discrepancy")


def _config(args):
    cfg = ExperimentConfig.from_json(args.config) if getattr(args, "config", None) \
        else ExperimentConfig()
    changes = {k: getattr(args, k) for k in _CONFIG_KEYS if getattr(args, k, None) is not None}
    return cfg.replace(**changes) if changes else cfg


def _emit(args, text, name):
    out_dir = getattr(args, "out_dir", None)
    out = getattr(args, "out", None)
    if out is None and out_dir is None:
        sys.stdout.write(text)
        return None
    path = os.path.join(out_dir or ".", out or DEFAULT_NAMES[name])
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _cmd_simulate(args, cfg, threads):
    buf = io.StringIO()
    write_sample_csv(simulate_walk(cfg.walk()), buf)
    _emit(args, buf.getvalue(), "simulate")
    return EXIT_OK


def _cmd_spectrum(args, cfg, threads):
    if args.kmax < 1 or args.rho < 1:
        raise UsageError("--kmax and --rho must be positive")
    spec = WrappedSpectrum(cfg.dist, cfg.x)
    k = np.arange(1, args.kmax + 1)
    mod = np.abs(spec.coeff(k, args.rho))
    _emit(args, _csv(["k", "abs_coeff"], zip(k.tolist(), mod)), "spectrum")
    return EXIT_OK


def _cmd_gamma(args, cfg, threads):
    step = args.grid_step if args.grid_step is not None else (cfg.grid_step or 1 / 16)
    pts = closed_grid(step).points
    G = cfg.model().gamma_matrix(pts)
    rows = ((pts[i], pts[j], G[i, j]) for i in range(len(pts)) for j in range(len(pts)))
    _emit(args, _csv(["s", "t", "gamma"], rows), "gamma")
    return EXIT_OK


def _cmd_blocks(args, cfg, threads):
    plan = build_plan(cfg.n, cfg.alpha, cfg.beta)
    replicas = cfg.replicas
    prof = variance_profile(cfg.walk(), plan, cfg.t, replicas, threads)
    corr = block_correlation(cfg.walk(), plan, cfg.t, replicas, threads)
    report = {
        "n": plan.n,
        "t": cfg.t,
        "long_len": plan.long_len,
        "short_len": plan.short_len,
        "ell": plan.ell,
        "replicas": replicas,
        "sum_var_long": prof.sum_var_long,
        "sum_var_short": prof.sum_var_short,
        "se": prof.se,
        "se_short": prof.se_short,
        # JSON has no NaN; zero-variance blocks are reported as null
        "correlations": [None if np.isnan(c) else float(c) for c in corr],
    }
    _emit(args, dumps(report), "blocks")
    return EXIT_OK


def _cmd_gp_sample(args, cfg, threads):
    grid = cfg.grid()
    sampler = GaussianSampler.from_model(cfg.model(), grid)
    count = cfg.paths or cfg.replicas
    paths = sample_paths(sampler, count, cfg.seed, threads)
    header = [_fmt(z) for z in grid.points]
    _emit(args, _csv(header, paths), "gp-sample")
    return EXIT_OK


def _cmd_exponents(args, cfg, threads):
    _emit(args, dumps(optimize_gamma(args.resolution).to_dict()), "exponents")
    return EXIT_OK


_RUNNERS = {
    "covariance": run_covariance_experiment,
    "distribution": run_distribution_experiment,
    "rate": run_rate_experiment,
}


def _cmd_verify(args, cfg, threads):
    report = _RUNNERS[args.experiment](cfg, threads=threads)
    path = _emit(args, report.to_json(), args.experiment)
    if path is not None:
        # wall-clock lives in a sidecar so the report itself stays reproducible
        with open(path + ".timing.json", "w") as fh:
            json.dump({"id": report.id, "wall_clock": report.wall_clock}, fh)
    print(f"{args.experiment}: {report.verdict}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


_COMMANDS = {
    "simulate": _cmd_simulate,
    "spectrum": _cmd_spectrum,
    "gamma": _cmd_gamma,
    "blocks": _cmd_blocks,
    "gp-sample": _cmd_gp_sample,
    "exponents": _cmd_exponents,
    "verify": _cmd_verify,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        threads = getattr(args, "threads", None)
        threads = 1 if threads is None else threads
        if threads < 1:
            raise UsageError("--threads must be >= 1")
        cfg = _config(args)
        return _COMMANDS[args.command](args, cfg, threads)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (SchatteError, ValueError, OSError) as exc:
        print(f"schatte: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
