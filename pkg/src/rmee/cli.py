"""Command-line entry point: ``rmee <toy|bench|fit|predict|cv-sigma> ...``.

Failures exit with status 1 and a single line on stderr of the form
``error: <ErrorType>: <message>``.
"""

import argparse
import csv
import logging
import sys

import numpy as np

from .bench import CsvSource, ExperimentPlan, ToySource, emit_plot_data, run_experiment, toy_grid, write_results
from .criteria import CriterionSpec
from .data_contamination import ContaminationSpec, load_csv, normalize, read_csv_table
from .exceptions import InvalidParameterError, RmeeError
from .hq_optimizer import (
    DEFAULT_SIGMA_GRID,
    AdamConfig,
    FitConfig,
    cross_validate_sigma,
    fit,
    fit_rmee_full,
)
from .kernel_density import silverman_bandwidth
from .models import elm_init, fold_normalization, load_model, lr_init, predict_labels, save_model


def _floats(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _criteria(text):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _sigma(text):
    if text in ("cv", "silverman"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma must be a number, 'cv' or 'silverman', got {text!r}") from None


def _label_mode(mode):
    # plain "label" means majority-to-minority flips
    return "label_maj_to_min" if mode == "label" else mode


def parse_contamination(text):
    """Parse ``attribute:<cov>:<p1,p2,...>`` or ``<label mode>:<p1,p2,...>``."""
    parts = text.split(":")
    mode = _label_mode(parts[0])
    if mode == "none":
        return [ContaminationSpec("attribute", 0.0)]
    if mode == "attribute" and len(parts) == 3:
        return [ContaminationSpec(mode, p, float(parts[1])) for p in _floats(parts[2])]
    if mode != "attribute" and len(parts) == 2:
        return [ContaminationSpec(mode, p) for p in _floats(parts[1])]
    raise InvalidParameterError(f"bad contamination spec {text!r}")


def _add_fit_options(p):
    p.add_argument("--model", choices=("lr", "elm"), default="lr")
    p.add_argument("--hidden", type=int, default=50)
    p.add_argument("--sigma", type=_sigma, default=0.5, help="bandwidth, 'cv' or 'silverman'")
    p.add_argument("--grid", type=_floats, default=list(DEFAULT_SIGMA_GRID), help="bandwidths tried by cv")
    p.add_argument("--epsilon", type=float, default=0.05, help="quantization threshold for QMEE")
    p.add_argument("--lr", type=float, default=0.01, help="Adam learning rate")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--inner-steps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)


def _add_data_options(p, label=True):
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", type=int, default=-1)
    if label:
        p.add_argument("--positive", default="1", help="class token mapped to label 1")


def _fit_config(args):
    return FitConfig(max_outer_iters=args.max_iters, inner_steps=args.inner_steps,
                     adam=AdamConfig(learning_rate=args.lr), seed=args.seed)


def _write_plan(plan, args):
    rows = run_experiment(plan)
    write_results(rows, args.out)
    if args.plot_prefix:
        emit_plot_data(rows, args.plot_prefix)
    for r in rows:
        note = f" failed={r.failed}" if r.failed else ""
        print(f"{r.criterion:5s} {r.mode:16s} {r.parameter!s:>10} p={r.proportion:.2f} "
              f"acc={r.mean_accuracy:.4f}+-{r.std_accuracy:.4f} reps={r.repetitions}{note}")


def cmd_toy(args):
    mode = _label_mode(args.mode)
    grid = toy_grid(mode, args.props, args.cov)
    plan = ExperimentPlan(
        ToySource(args.n, args.n_test or args.n, args.d, args.mean_shift), grid,
        criteria=args.criteria, model=args.model, hidden=args.hidden, repetitions=args.reps,
        master_seed=args.seed, sigma=args.sigma, sigma_grid=tuple(args.grid),
        quantizer_epsilon=args.epsilon, fit_config=_fit_config(args), n_jobs=args.jobs,
    )
    _write_plan(plan, args)


def cmd_bench(args):
    grid = [s for text in args.contaminate for s in parse_contamination(text)]
    plan = ExperimentPlan(
        CsvSource(args.data, args.label_col, args.positive, args.train_fraction), grid,
        criteria=args.criteria, model=args.model, hidden=args.hidden, repetitions=args.reps,
        master_seed=args.seed, sigma=args.sigma, sigma_grid=tuple(args.grid),
        quantizer_epsilon=args.epsilon, normalize=args.normalize,
        fit_config=_fit_config(args), n_jobs=args.jobs,
    )
    _write_plan(plan, args)


def _prepare(args):
    ds = load_csv(args.data, args.label_col, args.positive)
    if args.normalize:
        ds, _ = normalize(ds)
    rng = np.random.default_rng(args.seed)
    model = lr_init(ds.dim) if args.model == "lr" else elm_init(ds.dim, args.hidden, rng)
    return ds, model


def _resolve_sigma(args, kind, model, ds, cfg):
    if args.sigma == "cv":
        return cross_validate_sigma(model, ds.features, ds.labels, args.grid, cfg, kind=kind)
    if args.sigma == "silverman":
        ce, _ = fit(model, ds.features, ds.labels, CriterionSpec("CE"), cfg)
        return silverman_bandwidth(ds.labels - ce.predict_proba(ds.features))
    return args.sigma


def cmd_fit(args):
    ds, model = _prepare(args)
    cfg = _fit_config(args)
    kind = CriterionSpec(args.criterion).kind
    sigma = _resolve_sigma(args, kind, model, ds, cfg) if kind not in ("CE", "MSE") else None
    phi = None
    if kind == "RMEE":
        fitted, phi, trace = fit_rmee_full(model, ds.features, ds.labels, sigma, cfg)
    else:
        spec = CriterionSpec(kind, sigma=sigma or 1.0, quantizer_epsilon=args.epsilon)
        fitted, trace = fit(model, ds.features, ds.labels, spec, cfg)
    acc = float(np.mean(predict_labels(fitted.predict_proba(ds.features)) == ds.labels))
    if args.normalize:
        mean, std = ds.normalization
        fitted = fold_normalization(fitted, mean, std)
    if args.save_model:
        save_model(fitted, args.save_model)
    fields = [f"criterion={kind}", f"n={len(ds)}", f"train_acc={acc:.6f}",
              f"iters={trace.iters_used}", f"converged={str(trace.converged).lower()}"]
    if sigma is not None:
        fields.insert(1, f"sigma={sigma:.6g}")
    if phi is not None:
        fields.append("phi=" + ",".join(str(v) for v in phi))
    print(" ".join(fields))


def cmd_predict(args):
    model = load_model(args.model)
    table = read_csv_table(args.data, args.label_col)
    probs = model.predict_proba(table.features)
    labels = predict_labels(probs)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["prob", "label"])
        for p, y in zip(probs, labels):
            w.writerow([f"{p:.6f}", int(y)])
    msg = f"n={labels.size} positives={int(labels.sum())}"
    if args.label_col is not None and args.positive is not None:
        truth = (table.classes == args.positive).astype(int)
        msg += f" accuracy={np.mean(truth == labels):.6f}"
    print(msg)


def cmd_cv_sigma(args):
    ds, model = _prepare(args)
    cfg = _fit_config(args)
    kind = CriterionSpec(args.criterion).kind
    print(f"sigma={cross_validate_sigma(model, ds.features, ds.labels, args.grid, cfg, kind=kind):g}")


def build_parser():
    parser = argparse.ArgumentParser(prog="rmee", description="Robust classification with kernel error criteria.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy", help="Monte-Carlo sweep on the Gaussian toy problem")
    p.add_argument("--mode", choices=("attribute", "label", "label_maj_to_min", "label_min_to_maj"),
                   default="attribute")
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--n", type=int, default=1000, help="training samples")
    p.add_argument("--n-test", type=int, default=None, help="test samples (default: same as --n)")
    p.add_argument("--mean-shift", type=float, default=0.0)
    p.add_argument("--cov", type=_floats, default=[5.0, 100.0, 1000.0], help="attribute covariance scales")
    p.add_argument("--props", type=_floats, default=None, help="proportions (default 0:0.05:1)")
    p.add_argument("--criteria", type=_criteria, default=["CE", "MSE", "CLOSS", "QMEE", "RMEE"])
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--plot-prefix", default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_fit_options(p)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("bench", help="Monte-Carlo sweep on a CSV dataset")
    _add_data_options(p)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--contaminate", action="append", default=None,
                   help="attribute:<cov>:<props> or label_maj_to_min:<props> (repeatable)")
    p.add_argument("--criteria", type=_criteria, default=["CE", "MSE", "CLOSS", "QMEE", "RMEE"])
    p.add_argument("--train-fraction", type=float, default=2.0 / 3.0)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--plot-prefix", default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_fit_options(p)
    p.set_defaults(func=cmd_bench, model="elm")

    p = sub.add_parser("fit", help="fit one model on a CSV dataset")
    _add_data_options(p)
    p.add_argument("--criterion", default="rmee")
    p.add_argument("--normalize", action="store_true", help="z-score attributes and fold the transform into the model")
    p.add_argument("--save-model", default=None)
    _add_fit_options(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a saved model to a CSV of attributes")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", type=int, default=None, help="column to skip (and score, with --positive)")
    p.add_argument("--positive", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv-sigma", help="choose the kernel bandwidth by cross-validation")
    _add_data_options(p)
    p.add_argument("--criterion", default="rmee")
    p.add_argument("--normalize", action="store_true")
    _add_fit_options(p)
    p.set_defaults(func=cmd_cv_sigma)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "command", None) == "bench" and not args.contaminate:
        args.contaminate = ["none"]
    try:
        args.func(args)
    except (RmeeError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
