"""Command line front-end.

``dsc run CONFIG``
    Run a Monte Carlo, nested sampling or nominal characterization and write
    ``samples.csv``, ``stats.json`` and, for nested sampling, ``trace.csv``.
``dsc surrogate fit|eval|grid``
    Fit the MLP surrogate to a samples file, evaluate it at points, or write
    a regular lattice of predicted (or exact, ``--oracle``) probabilities.

Exit status: 0 on success, 1 on errors, 3 when nested sampling stalls with an
empty design space, 4 when it hits the iteration cap. The log level is read
from the ``DSC_LOG`` environment variable (default ``WARNING``).
"""
import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .benchmark import CQA_LOWER, CQA_UPPER, NormalTheta, analytic_probability
from .config import load_config
from .core import KnowledgeSpace
from .errors import DSCError
from .mc import run_mc
from .ns import Termination, run_nominal, run_ns
from .results import (
    read_samples_csv,
    reliability_breakdown,
    write_samples_csv,
    write_stats_json,
    write_trace_csv,
)

log = logging.getLogger("dsc")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STALLED = 3
EXIT_MAX_ITER = 4

_EXIT_FOR = {
    Termination.REACHED_ALPHA: EXIT_OK,
    Termination.STALLED_EMPTY_DS: EXIT_STALLED,
    Termination.MAX_ITERATIONS: EXIT_MAX_ITER,
    "completed": EXIT_OK,
}


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _floats(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def cmd_run(args):
    cfg = load_config(args.config).with_overrides(args.seed, args.accelerate, args.out)
    out = cfg.output if args.out is not None else os.path.join(cfg.base_dir, cfg.output)
    model = cfg.build_model()
    try:
        if cfg.method == "mc":
            unc = cfg.build_uncertainty()
            result = run_mc(model, cfg.space, unc, cfg.mc)
        elif cfg.method == "ns":
            unc = cfg.build_uncertainty()
            result = run_ns(model, cfg.space, unc, cfg.ns)
        else:
            result = run_nominal(model, cfg.space, cfg.nominal_theta, cfg.ns)
    finally:
        model.close()
    os.makedirs(out, exist_ok=True)
    write_samples_csv(os.path.join(out, "samples.csv"), result.samples)
    write_stats_json(os.path.join(out, "stats.json"), result.stats, method=cfg.method, seed=cfg.seed,
                     n_samples=len(result.samples), accelerate=cfg.ns.accelerate)
    if result.trace is not None:
        write_trace_csv(os.path.join(out, "trace.csv"), result.trace)
    print(f"{cfg.method}: {len(result.samples)} samples, {result.stats.model_evals} model evaluations, "
          f"termination={result.stats.termination}")
    for label, n in reliability_breakdown(result.samples):
        print(f"  {label:>18}  {n}")
    return _EXIT_FOR[result.stats.termination]


def _space_from_args(args):
    if args.config is not None:
        return load_config(args.config).space
    if args.lower is not None or args.upper is not None:
        if args.lower is None or args.upper is None:
            raise DSCError("--lower and --upper must be given together")
        return KnowledgeSpace(args.lower, args.upper)
    return None


def cmd_fit(args):
    from .surrogate import MLPConfig, fit

    samples = read_samples_csv(args.samples)
    X = np.array([s.d for s in samples])
    y = np.array([s.prob for s in samples])
    space = _space_from_args(args)
    cfg = MLPConfig(hidden_layers=tuple(args.hidden), activation=args.activation, epochs=args.epochs,
                    batch_size=args.batch_size, learning_rate=args.learning_rate, seed=args.seed,
                    validation_fraction=args.validation_fraction, patience=args.patience)
    mlp = fit((X, y), cfg, space)
    os.makedirs(args.out, exist_ok=True)
    mlp.save(os.path.join(args.out, "mlp.json"))
    split = np.full(len(X), "train", dtype=object)
    split[mlp.validation_indices] = "validation"
    n = X.shape[1]
    with open(os.path.join(args.out, "parity.csv"), "w") as fh:
        fh.write(",".join([f"d_{i + 1}" for i in range(n)] + ["label", "prediction", "split"]) + "\n")
        for d, label, part in zip(X, y, split):
            # one point at a time: the same arithmetic path as `surrogate eval`
            p = mlp.predict(d, warn=False)
            fh.write(",".join([repr(float(v)) for v in d] + [repr(float(label)), repr(p), part]) + "\n")
    t = mlp.training
    print(f"trained {cfg.hidden_layers} ({cfg.activation}) for {t['epochs_run']} epochs; "
          f"train RMSE {t['train_mse'] ** 0.5:.4f}"
          + (f", held-out RMSE {t['validation_rmse']:.4f}" if t["validation_rmse"] is not None else ""))
    return EXIT_OK


def cmd_eval(args):
    from .surrogate import FeasibilityMapMLP

    try:
        mlp = FeasibilityMapMLP.load(args.model)
    except (KeyError, TypeError) as exc:
        raise DSCError(f"{args.model}: malformed model document ({exc})") from None
    except ValueError as exc:
        raise DSCError(f"{args.model}: {exc}") from None
    if args.points is not None:
        pts = np.loadtxt(args.points, delimiter=",", ndmin=2, skiprows=1 if args.header else 0)
    else:
        if not args.point:
            raise DSCError("give a point (d_1 ... d_n) or --points FILE")
        pts = np.array([args.point])
    for d in pts:
        if d.size != mlp.n_inputs:
            raise DSCError(f"point has {d.size} coordinates, model expects {mlp.n_inputs}")
        print(repr(mlp.predict(d)))
    return EXIT_OK


def cmd_grid(args):
    if (args.model is None) == (args.oracle is None):
        raise DSCError("give exactly one of --model or --oracle")
    if args.res < 2:
        raise DSCError("--res must be >= 2")
    if args.oracle is not None:
        prior = NormalTheta(args.mu, args.sigma)
        space = _space_from_args(args) or KnowledgeSpace([-1.0, -1.0], [1.0, 1.0])
        if space.ndim != 2:
            raise DSCError("the illustrative oracle is two-dimensional")
        lo, hi = args.cqa_band

        def evaluate(P):
            return np.array([analytic_probability(d, prior, lo, hi) for d in P])
    else:
        from .surrogate import FeasibilityMapMLP

        mlp = FeasibilityMapMLP.load(args.model)
        space = _space_from_args(args) or KnowledgeSpace(mlp.lower, mlp.upper)

        def evaluate(P):
            return mlp.predict_many(P, warn=False)

    n = space.ndim
    axes = [space.lower[i] + space.width[i] * np.arange(args.res) / (args.res - 1) for i in range(n)]
    # keep the end points exact
    for i in range(n):
        axes[i][-1] = space.upper[i]
    mesh = np.meshgrid(*axes, indexing="ij")
    P = np.column_stack([m.reshape(-1) for m in mesh])
    probs = evaluate(P)
    out = args.out
    if os.path.dirname(out):
        os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w") as fh:
        fh.write(",".join([f"d_{i + 1}" for i in range(n)] + ["prob"]) + "\n")
        for d, p in zip(P, probs):
            fh.write(",".join([repr(float(v)) for v in d] + [repr(float(p))]) + "\n")
    print(f"wrote {len(P)} grid rows to {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dsc", description="Design space characterization under parametric uncertainty.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a characterization from a config file")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--accelerate", nargs="?", const=True, type=_bool, metavar="true|false",
                     help="interrupt hopeless proposal evaluations early (nested sampling)")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.set_defaults(func=cmd_run)

    sur = sub.add_parser("surrogate", help="fit and query the MLP surrogate")
    ssub = sur.add_subparsers(dest="action", required=True)

    def add_space(p):
        p.add_argument("--config", help="take the knowledge space from this run config")
        p.add_argument("--lower", type=_floats, help="knowledge-space lower bounds, e.g. '-1,-1'")
        p.add_argument("--upper", type=_floats, help="knowledge-space upper bounds")

    fitp = ssub.add_parser("fit", help="train on a samples.csv")
    fitp.add_argument("samples")
    fitp.add_argument("--out", default=".")
    add_space(fitp)
    fitp.add_argument("--hidden", type=_ints, default=[16, 32, 32, 16])
    fitp.add_argument("--activation", choices=("tanh", "relu"), default="tanh")
    fitp.add_argument("--epochs", type=int, default=2000)
    fitp.add_argument("--batch-size", type=int, default=32)
    fitp.add_argument("--learning-rate", type=float, default=1e-3)
    fitp.add_argument("--validation-fraction", type=float, default=0.2)
    fitp.add_argument("--patience", type=int, default=50)
    fitp.add_argument("--seed", type=int, default=0)
    fitp.set_defaults(func=cmd_fit)

    evalp = ssub.add_parser("eval", help="predict at one or more points")
    evalp.add_argument("model", help="mlp.json")
    evalp.add_argument("point", nargs="*", type=float)
    evalp.add_argument("--points", help="CSV file of points, one per row")
    evalp.add_argument("--header", action="store_true", help="the --points file has a header row")
    evalp.set_defaults(func=cmd_eval)

    gridp = ssub.add_parser("grid", help="write a regular lattice of probabilities")
    gridp.add_argument("--model", help="mlp.json")
    gridp.add_argument("--oracle", choices=("illustrative",))
    gridp.add_argument("--mu", type=float, default=0.0)
    gridp.add_argument("--sigma", type=float, default=1.0)
    gridp.add_argument("--cqa-band", type=_floats, default=[CQA_LOWER, CQA_UPPER])
    gridp.add_argument("--res", type=int, default=101)
    gridp.add_argument("--out", default="grid.csv")
    add_space(gridp)
    gridp.set_defaults(func=cmd_grid)
    return parser


def main(argv=None):
    level = os.environ.get("DSC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DSCError, ValueError, OSError) as exc:
        print(f"dsc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
