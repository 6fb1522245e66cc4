"""Datasets: toy generators, outlier injection, CSV ingestion and splitting.

Every randomized function takes a ``numpy.random.Generator`` (or anything
``numpy.random.default_rng`` accepts) and is deterministic given it.
Datasets are never modified in place; contamination returns new objects.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .exceptions import InvalidInputError, InvalidParameterError

__all__ = [
    "LabeledDataset",
    "MultiClassDataset",
    "ContaminationSpec",
    "generate_toy",
    "contaminate",
    "inject_attribute_outliers",
    "inject_label_outliers",
    "read_csv_table",
    "load_csv",
    "write_csv",
    "normalize",
    "one_vs_all",
    "split",
]

MODES = ("attribute", "label_maj_to_min", "label_min_to_maj")


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


@dataclass(frozen=True)
class LabeledDataset:
    """Dense ``(N, d)`` attributes with ``{0, 1}`` labels.

    ``normalization`` is the ``(mean, std)`` pair used to standardize the
    attributes, if any.
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    normalization: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.labels).astype(np.int64).ravel()
        if X.ndim != 2:
            raise InvalidInputError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.size:
            raise InvalidInputError(f"{X.shape[0]} rows but {y.size} labels")
        if not np.all((y == 0) | (y == 1)):
            raise InvalidInputError("labels must be 0 or 1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return self.labels.size

    @property
    def dim(self):
        return self.features.shape[1]

    def class_counts(self):
        """``(#label 0, #label 1)``."""
        n1 = int(self.labels.sum())
        return (len(self) - n1, n1)

    def subset(self, idx):
        return replace(self, features=self.features[idx], labels=self.labels[idx])


@dataclass(frozen=True)
class MultiClassDataset:
    """Attributes with arbitrary string class tokens."""

    features: np.ndarray
    classes: np.ndarray
    name: str = "dataset"

    @property
    def class_names(self):
        """Distinct class tokens in order of first appearance."""
        _, first = np.unique(self.classes, return_index=True)
        return [str(self.classes[i]) for i in sorted(first)]


@dataclass(frozen=True)
class ContaminationSpec:
    """How to corrupt a training split.

    ``mode`` is ``"attribute"`` (replace attribute rows with draws from
    ``N(0, attribute_cov_scale * I)``), ``"label_maj_to_min"`` or
    ``"label_min_to_maj"`` (flip labels of the source class only).
    """

    mode: str
    proportion: float
    attribute_cov_scale: float = 100.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidParameterError(f"unknown contamination mode {self.mode!r}; expected one of {MODES}")
        if not 0.0 <= self.proportion <= 1.0:
            raise InvalidParameterError("proportion must lie in [0, 1]")
        if self.mode == "attribute" and not self.attribute_cov_scale > 0:
            raise InvalidParameterError("attribute_cov_scale must be > 0")

    @property
    def parameter(self):
        """Covariance scale for attribute mode, flip direction otherwise."""
        if self.mode == "attribute":
            return self.attribute_cov_scale
        return self.mode[len("label_"):]


def generate_toy(n_train=1000, n_test=1000, d=20, mean_shift=0.0, rng=None):
    """Linearly separable Gaussian toy problem.

    Attributes are ``N(mean_shift * 1, I_d)``, a ground-truth direction
    ``w* ~ N(0, I_d)`` is drawn, and the label is ``1`` iff ``w*'x >= 0``.
    ``mean_shift=0`` gives balanced classes, ``0.4`` an unbalanced problem.

    Returns
    -------
    train, test : LabeledDataset
    true_weights : ndarray, shape (d,)
    """
    if d < 1:
        raise InvalidParameterError("dimension must be >= 1")
    rng = _rng(rng)
    X = rng.standard_normal((n_train + n_test, d)) + mean_shift
    w = rng.standard_normal(d)
    y = (X @ w >= 0).astype(np.int64)
    train = LabeledDataset(X[:n_train], y[:n_train], name="toy-train")
    test = LabeledDataset(X[n_train:], y[n_train:], name="toy-test")
    return train, test, w


def inject_attribute_outliers(ds, spec, rng=None):
    """Replace ``floor(proportion * N)`` attribute rows with wide Gaussian noise.

    Rows are drawn uniformly without replacement regardless of class; labels
    and all other rows are left untouched.
    """
    if spec.mode != "attribute":
        raise InvalidParameterError(f"expected attribute mode, got {spec.mode!r}")
    rng = _rng(rng)
    k = math.floor(spec.proportion * len(ds))
    if k == 0:
        return ds
    idx = rng.choice(len(ds), size=k, replace=False)
    X = ds.features.copy()
    X[idx] = rng.normal(0.0, math.sqrt(spec.attribute_cov_scale), size=(k, ds.dim))
    return replace(ds, features=X)


def _majority_class(ds):
    n0, n1 = ds.class_counts()
    # ties resolve to class 0 as the majority
    return 0 if n0 >= n1 else 1


def inject_label_outliers(ds, spec, rng=None):
    """Flip ``floor(proportion * N_source)`` labels of one source class.

    The source is the majority class for ``label_maj_to_min`` and the
    minority class for ``label_min_to_maj``; the other class is not touched.
    """
    if spec.mode not in ("label_maj_to_min", "label_min_to_maj"):
        raise InvalidParameterError(f"expected a label mode, got {spec.mode!r}")
    rng = _rng(rng)
    major = _majority_class(ds)
    source = major if spec.mode == "label_maj_to_min" else 1 - major
    pool = np.flatnonzero(ds.labels == source)
    if pool.size == 0:
        raise InvalidInputError(f"source class {source} is empty")
    k = math.floor(spec.proportion * pool.size)
    if k == 0:
        return ds
    idx = rng.choice(pool, size=k, replace=False)
    y = ds.labels.copy()
    y[idx] = 1 - source
    return replace(ds, labels=y)


def contaminate(ds, spec, rng=None):
    """Dispatch on ``spec.mode``; the RNG defaults to ``spec.seed``."""
    rng = _rng(spec.seed if rng is None else rng)
    if spec.mode == "attribute":
        return inject_attribute_outliers(ds, spec, rng)
    return inject_label_outliers(ds, spec, rng)


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_csv_table(path, label_column=-1, header=None):
    """Read a comma-separated table of numeric attributes and one label column.

    ``header=None`` auto-detects a header: the first row is taken as column
    names when any of its attribute cells is not a number.  Missing, NaN or
    non-numeric attribute cells raise :class:`InvalidInputError` with the
    row and column.  ``label_column=None`` reads every column as an
    attribute and leaves the class tokens empty.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    ncol = len(rows[0])
    if label_column is None:
        lab = None
    elif -ncol <= label_column < ncol:
        lab = label_column % ncol
    else:
        raise InvalidInputError(f"{path}: label column {label_column} out of range for {ncol} columns")
    feat_cols = [j for j in range(ncol) if j != lab]
    if header is None:
        header = not all(_is_number(rows[0][j]) for j in feat_cols)
    start = 1 if header else 0
    X = np.empty((len(rows) - start, len(feat_cols)))
    classes = []
    for i, row in enumerate(rows[start:]):
        lineno = i + start + 1
        if len(row) != ncol:
            raise InvalidInputError(f"{path}:{lineno}: expected {ncol} columns, got {len(row)}")
        for k, j in enumerate(feat_cols):
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise InvalidInputError(f"{path}:{lineno}: column {j + 1} is not numeric: {cell!r}") from None
            if not math.isfinite(v):
                raise InvalidInputError(f"{path}:{lineno}: column {j + 1} is missing or not finite")
            X[i, k] = v
        classes.append(row[lab].strip() if lab is not None else "")
    if X.shape[0] == 0:
        raise InvalidInputError(f"{path}: no data rows")
    name = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return MultiClassDataset(X, np.array(classes), name=name)


def one_vs_all(ds, target_class):
    """Binary dataset with ``target_class`` as label 1 and every other class as 0."""
    target = str(target_class)
    hits = ds.classes == target
    if not hits.any():
        raise InvalidInputError(f"class {target!r} not present; classes are {ds.class_names}")
    return LabeledDataset(ds.features, hits.astype(np.int64), name=f"{ds.name}[{target}]")


def load_csv(path, label_column=-1, positive_label="1", header=None):
    """Read a CSV and map ``positive_label`` to 1 and every other token to 0."""
    return one_vs_all(read_csv_table(path, label_column, header), positive_label)


def write_csv(ds, path, positive_label="1", negative_label="0"):
    """Write a dataset in the format read by :func:`load_csv` (label last)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(ds.dim)] + ["label"])
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [positive_label if y else negative_label])


def normalize(train, test=None):
    """Standardize attributes with statistics of ``train`` only.

    Constant training columns are centred and left unscaled.  The same
    transform is applied to ``test``.  Returns ``(train, test)`` (``test`` is
    ``None`` when not given).
    """
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0, std, 1.0)

    def apply(ds):
        return replace(ds, features=(ds.features - mean) / std, normalization=(mean, std))

    return apply(train), (apply(test) if test is not None else None)


def split(ds, train_fraction=2.0 / 3.0, rng=None):
    """Random split into ``ceil(f N)`` training and the remaining test samples."""
    if not 0.0 < train_fraction < 1.0:
        raise InvalidParameterError("train_fraction must lie in (0, 1)")
    rng = _rng(rng)
    n_train = math.ceil(train_fraction * len(ds) - 1e-9)
    perm = rng.permutation(len(ds))
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))
