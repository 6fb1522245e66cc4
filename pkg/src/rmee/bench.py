"""Monte-Carlo experiment driver.

A plan is a grid of contamination settings ("cells") crossed with a list of
criteria.  Each repetition of a cell draws fresh data from its own seed
``SeedSequence([master_seed, cell_index, rep_index])``, so editing one cell
never shifts the random stream of another.  Within a repetition all criteria
see the same data and the same initial model.
"""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .criteria import KINDS, CriterionSpec
from .data_contamination import (
    ContaminationSpec,
    contaminate,
    generate_toy,
    load_csv,
    normalize,
    split,
)
from .exceptions import InvalidInputError, InvalidParameterError, RmeeError
from .hq_optimizer import DEFAULT_SIGMA_GRID, FitConfig, cross_validate_sigma, fit
from .kernel_density import silverman_bandwidth
from .models import elm_init, lr_init, predict_labels

__all__ = [
    "accuracy",
    "confusion_matrix",
    "ToySource",
    "CsvSource",
    "ExperimentPlan",
    "ResultRow",
    "run_experiment",
    "write_results",
    "read_results",
    "emit_plot_data",
    "toy_grid",
]

logger = logging.getLogger(__name__)

RESULT_HEADER = ("criterion", "mode", "parameter", "proportion", "mean_acc", "std_acc", "reps")


def _labels(a):
    a = np.asarray(a).ravel()
    if not np.all((a == 0) | (a == 1)):
        raise InvalidInputError("labels must be 0 or 1")
    return a.astype(np.int64)


def accuracy(predicted, truth):
    """Fraction of positions where the two label sequences agree."""
    p, t = _labels(predicted), _labels(truth)
    if p.size != t.size:
        raise InvalidInputError(f"{p.size} predictions but {t.size} labels")
    if p.size == 0:
        raise InvalidInputError("accuracy of an empty sequence")
    return float(np.mean(p == t))


def confusion_matrix(predicted, truth):
    """``(TP, TN, FP, FN)`` counts with label 1 as positive."""
    p, t = _labels(predicted), _labels(truth)
    if p.size != t.size:
        raise InvalidInputError(f"{p.size} predictions but {t.size} labels")
    tp = int(np.sum((p == 1) & (t == 1)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fp = int(np.sum((p == 1) & (t == 0)))
    return tp, tn, fp, p.size - tp - tn - fp


@dataclass(frozen=True)
class ToySource:
    n_train: int = 1000
    n_test: int = 1000
    d: int = 20
    mean_shift: float = 0.0


@dataclass(frozen=True)
class CsvSource:
    """A CSV dataset split at random into train and test for every repetition."""

    path: str
    label_column: int = -1
    positive_label: str = "1"
    train_fraction: float = 2.0 / 3.0


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run.

    ``sigma`` is a bandwidth, ``"silverman"`` (Silverman's rule on the errors
    of a CE pre-fit) or ``"cv"`` (cross-validation over ``sigma_grid``, done
    separately for each kernel criterion).  ``normalize=None`` means on for
    CSV data and off for the toy.
    """

    source: Union[ToySource, CsvSource]
    grid: Sequence[ContaminationSpec]
    criteria: Sequence[str] = ("CE", "MSE", "CLOSS", "QMEE", "RMEE")
    model: str = "lr"
    hidden: int = 50
    repetitions: int = 20
    master_seed: int = 0
    sigma: Union[float, str] = 0.5
    sigma_grid: Tuple[float, ...] = DEFAULT_SIGMA_GRID
    quantizer_epsilon: float = 0.05
    normalize: Optional[bool] = None
    fit_config: FitConfig = field(default_factory=FitConfig)
    n_jobs: int = 1

    def __post_init__(self):
        crit = tuple(CriterionSpec(k, sigma=1.0).kind for k in self.criteria)
        if not crit:
            raise InvalidParameterError("at least one criterion is required")
        object.__setattr__(self, "criteria", crit)
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise InvalidParameterError("the contamination grid is empty")
        if self.repetitions < 1:
            raise InvalidParameterError("repetitions must be >= 1")
        if self.model not in ("lr", "elm"):
            raise InvalidParameterError(f"unknown model {self.model!r}")
        if isinstance(self.sigma, str):
            if self.sigma not in ("silverman", "cv"):
                raise InvalidParameterError(f"sigma must be a number, 'silverman' or 'cv', got {self.sigma!r}")
        elif not self.sigma > 0:
            raise InvalidParameterError("sigma must be > 0")

    @property
    def do_normalize(self):
        if self.normalize is None:
            return isinstance(self.source, CsvSource)
        return self.normalize


@dataclass(frozen=True)
class ResultRow:
    criterion: str
    mode: str
    parameter: Union[float, str]
    proportion: float
    mean_accuracy: float
    std_accuracy: float
    repetitions: int
    failed: int = 0

    def sort_key(self):
        p = (0, float(self.parameter), "") if isinstance(self.parameter, (int, float)) else (1, 0.0, self.parameter)
        return (KINDS.index(self.criterion), self.mode, p, self.proportion)


def _rep_data(plan, spec, rng, base):
    if isinstance(plan.source, ToySource):
        s = plan.source
        train, test, _ = generate_toy(s.n_train, s.n_test, s.d, s.mean_shift, rng)
    else:
        train, test = split(base, plan.source.train_fraction, rng)
    if plan.do_normalize:
        train, test = normalize(train, test)
    # only the training split is ever handed to the contamination routine
    return contaminate(train, spec, rng), test


def _init_model(plan, d, rng):
    if plan.model == "lr":
        return lr_init(d)
    return elm_init(d, plan.hidden, rng)


def _sigma_for(plan, kind, model, train):
    if not isinstance(plan.sigma, str):
        return float(plan.sigma)
    if plan.sigma == "cv":
        return cross_validate_sigma(model, train.features, train.labels, plan.sigma_grid, plan.fit_config, kind=kind)
    ce, _ = fit(model, train.features, train.labels, CriterionSpec("CE"), plan.fit_config)
    return silverman_bandwidth(train.labels - ce.predict_proba(train.features))


def _run_rep(plan, cell, rep, base=None):
    """Test accuracy of every criterion (``nan`` when the fit failed)."""
    spec = plan.grid[cell]
    rng = np.random.default_rng(np.random.SeedSequence([plan.master_seed, cell, rep]))
    train, test = _rep_data(plan, spec, rng, base)
    model = _init_model(plan, train.dim, rng)
    out = []
    sigma_cache = {}
    for kind in plan.criteria:
        try:
            if kind in ("CE", "MSE"):
                crit = CriterionSpec(kind)
            else:
                key = kind if plan.sigma == "cv" else "*"
                if key not in sigma_cache:
                    sigma_cache[key] = _sigma_for(plan, kind, model, train)
                crit = CriterionSpec(kind, sigma=sigma_cache[key], quantizer_epsilon=plan.quantizer_epsilon)
            fitted, _ = fit(model, train.features, train.labels, crit, plan.fit_config)
            pred = predict_labels(fitted.predict_proba(test.features))
            out.append(accuracy(pred, test.labels))
        except (RmeeError, FloatingPointError) as exc:
            logger.warning("cell %d rep %d %s failed: %s", cell, rep, kind, exc)
            out.append(math.nan)
    return cell, rep, out


def _base_dataset(plan):
    if isinstance(plan.source, CsvSource):
        s = plan.source
        return load_csv(s.path, s.label_column, s.positive_label)
    return None


def _run_task(args):
    plan, cell, rep, base = args
    return _run_rep(plan, cell, rep, base)


def run_experiment(plan):
    """Run every (cell, repetition) and aggregate test accuracy per criterion.

    Returns rows sorted by (criterion, mode, parameter, proportion).  Failed
    fits are excluded from the mean and counted in ``ResultRow.failed``; the
    standard deviation is the sample one (``0`` for a single repetition).
    """
    base = _base_dataset(plan)
    tasks = [(plan, c, r, base) for c in range(len(plan.grid)) for r in range(plan.repetitions)]
    if plan.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=plan.n_jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    acc = np.full((len(plan.grid), plan.repetitions, len(plan.criteria)), np.nan)
    for cell, rep, vals in results:
        acc[cell, rep] = vals
    rows = []
    for cell, spec in enumerate(plan.grid):
        for k, kind in enumerate(plan.criteria):
            a = acc[cell, :, k]
            ok = a[np.isfinite(a)]
            mean = float(ok.mean()) if ok.size else math.nan
            std = float(ok.std(ddof=1)) if ok.size > 1 else 0.0
            rows.append(ResultRow(kind, spec.mode, spec.parameter, float(spec.proportion), mean, std,
                                  int(ok.size), int(a.size - ok.size)))
    return sorted(rows, key=ResultRow.sort_key)


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def write_results(rows, path):
    """Write rows as CSV (6-decimal floats, LF line endings)."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_HEADER)
            for r in rows:
                param = float(r.parameter) if isinstance(r.parameter, (int, float)) else r.parameter
                w.writerow([r.criterion, r.mode, _fmt(param), _fmt(r.proportion),
                            _fmt(r.mean_accuracy), _fmt(r.std_accuracy), r.repetitions])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def read_results(path):
    """Parse a file written by :func:`write_results` back into rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if tuple(head or ()) != RESULT_HEADER:
            raise InvalidInputError(f"{path}: not a results file")
        rows = []
        for rec in reader:
            crit, mode, param, prop, mean, std, reps = rec
            param = float(param) if mode == "attribute" else param
            rows.append(ResultRow(crit, mode, param, float(prop), float(mean), float(std), int(reps)))
    return rows


def _param_tag(p):
    return f"{float(p):g}" if isinstance(p, (int, float)) else str(p)


def emit_plot_data(rows, path_prefix):
    """Write one whitespace-separated table per (mode, parameter) group.

    File ``<prefix>_<mode>_<parameter>.dat`` has a ``#`` header line, then
    one line per proportion (increasing): the proportion followed by mean
    and standard deviation for every criterion present.  Cells without a
    result are written as ``nan``.  Returns the list of paths written.
    """
    crits = [k for k in KINDS if any(r.criterion == k for r in rows)]
    groups = {}
    for r in rows:
        groups.setdefault((r.mode, _param_tag(r.parameter)), {})[(r.proportion, r.criterion)] = r
    paths = []
    for (mode, tag), cells in sorted(groups.items()):
        path = f"{path_prefix}_{mode}_{tag}.dat"
        props = sorted({p for p, _ in cells})
        cols = " ".join(f"{k}_mean {k}_std" for k in crits)
        lines = [f"# proportion {cols}"]
        for p in props:
            vals = [f"{p:.6f}"]
            for k in crits:
                r = cells.get((p, k))
                vals += ["nan", "nan"] if r is None else [f"{r.mean_accuracy:.6f}", f"{r.std_accuracy:.6f}"]
            lines.append(" ".join(vals))
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write plot data to {path}: {exc.strerror or exc}") from exc
        paths.append(path)
    return paths


def toy_grid(mode="attribute", proportions=None, covariances=(5.0, 100.0, 1000.0)):
    """Contamination grid for the toy sweeps (proportions 0 to 1 step 0.05 by default)."""
    if proportions is None:
        proportions = [round(0.05 * i, 2) for i in range(21)]
    if mode == "attribute":
        return [ContaminationSpec("attribute", p, c) for c in covariances for p in proportions]
    return [ContaminationSpec(mode, p) for p in proportions]

