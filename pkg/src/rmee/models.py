"""Regression-like binary classifiers with sigmoid outputs.

Both backends are "logistic regression over a fixed feature map":

* :class:`LogisticModel` uses the raw attributes (plus an optional constant
  feature for the intercept);
* :class:`ElmModel` is an extreme learning machine whose random hidden layer
  is frozen at construction, so only the output weights are trainable.

Each model exposes ``design(X)`` (the feature matrix the trainable weights
act on), ``params`` and ``with_params(w)``; optimizers only need these.
Models are immutable: fitting returns new instances.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import InvalidInputError, InvalidParameterError

__all__ = [
    "LogisticModel",
    "ElmModel",
    "lr_init",
    "lr_predict",
    "elm_init",
    "elm_hidden_map",
    "elm_predict",
    "predict_labels",
    "fold_normalization",
    "save_model",
    "load_model",
    "dump_model",
    "parse_model",
]

_ACTIVATIONS = {"sigmoid": expit, "tanh": np.tanh}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _as_matrix(x, dim):
    x = np.asarray(x, dtype=float)
    x2 = x.reshape(1, -1) if x.ndim == 1 else x
    if x2.ndim != 2 or x2.shape[1] != dim:
        raise InvalidInputError(f"expected {dim} attributes per sample, got shape {x.shape}")
    return x2, x.ndim == 1


def _with_bias(h, bias):
    return np.hstack([h, np.ones((h.shape[0], 1))]) if bias else h


@dataclass(frozen=True)
class LogisticModel:
    """Linear logistic model ``y = sigmoid(w'x [+ b])``.

    With ``bias=True`` the last weight multiplies a constant-one feature.
    """

    weights: np.ndarray
    bias: bool = True

    def __post_init__(self):
        w = _frozen(self.weights).ravel()
        if w.size < 1 + int(self.bias) or not np.all(np.isfinite(w)):
            raise InvalidParameterError("logistic weights must be finite with at least one attribute")
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.weights.size - int(self.bias)

    @property
    def params(self):
        return self.weights

    def with_params(self, w):
        return dataclasses.replace(self, weights=w)

    def design(self, X):
        X, _ = _as_matrix(X, self.dim)
        return _with_bias(X, self.bias)

    def predict_proba(self, X):
        X, single = _as_matrix(X, self.dim)
        y = expit(self.design(X) @ self.weights)
        return y[0] if single else y


@dataclass(frozen=True)
class ElmModel:
    """Single-hidden-layer network with a frozen random hidden layer.

    ``hidden_weights`` has shape ``(d, H)``; the hidden map is
    ``activation(x @ hidden_weights + hidden_biases)`` and the output is
    ``sigmoid(h'output_weights [+ b])``.
    """

    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    bias: bool = True
    activation: str = "sigmoid"

    def __post_init__(self):
        W = _frozen(self.hidden_weights)
        b = _frozen(self.hidden_biases).ravel()
        w = _frozen(self.output_weights).ravel()
        if W.ndim != 2 or W.shape[1] != b.size:
            raise InvalidParameterError("hidden weights must be (d, H) with H biases")
        if w.size != b.size + int(self.bias):
            raise InvalidParameterError(f"expected {b.size + int(self.bias)} output weights, got {w.size}")
        if self.activation not in _ACTIVATIONS:
            raise InvalidParameterError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "hidden_weights", W)
        object.__setattr__(self, "hidden_biases", b)
        object.__setattr__(self, "output_weights", w)

    @property
    def dim(self):
        return self.hidden_weights.shape[0]

    @property
    def hidden_size(self):
        return self.hidden_biases.size

    @property
    def params(self):
        return self.output_weights

    def with_params(self, w):
        return dataclasses.replace(self, output_weights=w)

    def hidden(self, X):
        X, _ = _as_matrix(X, self.dim)
        return _ACTIVATIONS[self.activation](X @ self.hidden_weights + self.hidden_biases)

    def design(self, X):
        return _with_bias(self.hidden(X), self.bias)

    def predict_proba(self, X):
        X, single = _as_matrix(X, self.dim)
        y = expit(self.design(X) @ self.output_weights)
        return y[0] if single else y


def lr_init(d, bias=True):
    """Zero-initialised logistic model on ``d`` attributes."""
    if d < 1:
        raise InvalidParameterError("dimension must be >= 1")
    return LogisticModel(np.zeros(d + int(bias)), bias=bias)


def lr_predict(m, x):
    """Probability of class 1 for one sample or a batch of samples."""
    return m.predict_proba(x)


def elm_init(d, hidden=50, rng=None, *, bias=True, init="uniform", activation="sigmoid"):
    """Draw a random ELM with zero output weights.

    Hidden weights and biases are i.i.d. ``U[-1, 1]`` by default
    (``init="normal"`` draws standard normals instead).
    """
    if d < 1 or hidden < 1:
        raise InvalidParameterError("dimension and hidden size must be >= 1")
    rng = np.random.default_rng(rng)
    if init == "uniform":
        W = rng.uniform(-1.0, 1.0, size=(d, hidden))
        b = rng.uniform(-1.0, 1.0, size=hidden)
    elif init == "normal":
        W = rng.standard_normal((d, hidden))
        b = rng.standard_normal(hidden)
    else:
        raise InvalidParameterError(f"unknown init {init!r}")
    return ElmModel(W, b, np.zeros(hidden + int(bias)), bias=bias, activation=activation)


def elm_hidden_map(m, x):
    x = np.asarray(x, dtype=float)
    h = m.hidden(x)
    return h[0] if x.ndim == 1 else h


def elm_predict(m, x):
    return m.predict_proba(x)


def predict_labels(probs):
    """Label 1 where the probability is strictly above 0.5, else 0."""
    return (np.asarray(probs, dtype=float) > 0.5).astype(np.int64)


def fold_normalization(m, mean, std):
    """Absorb a z-score transform ``(x - mean) / std`` into the first layer.

    The returned model acts on raw attributes and matches ``m`` applied to
    normalised attributes up to rounding.
    """
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    if isinstance(m, LogisticModel):
        if not m.bias:
            raise InvalidParameterError("folding a shift needs a model with an intercept")
        w = m.weights[:-1] / std
        b = m.weights[-1] - w @ mean
        return m.with_params(np.append(w, b))
    W = m.hidden_weights / std[:, np.newaxis]
    b = m.hidden_biases - mean @ W
    return dataclasses.replace(m, hidden_weights=W, hidden_biases=b)


def dump_model(m):
    """Serialise a model to the plain-text weight format.

    The first line is ``model <lr|elm> dim <d> hidden <H>``; following lines
    hold whitespace-separated weights in row-major order (for an ELM: hidden
    weights, hidden biases, then output weights).  Floats are written with
    ``repr`` so they round-trip exactly.  The presence of an intercept is
    implied by the number of trailing weights.
    """

    def line(a):
        return " ".join(repr(float(v)) for v in np.ravel(a))

    if isinstance(m, LogisticModel):
        return f"model lr dim {m.dim} hidden 0\n{line(m.weights)}\n"
    if m.activation != "sigmoid":
        raise InvalidParameterError("only sigmoid ELMs can be serialised")
    return (
        f"model elm dim {m.dim} hidden {m.hidden_size}\n"
        f"{line(m.hidden_weights)}\n{line(m.hidden_biases)}\n{line(m.output_weights)}\n"
    )


def parse_model(text):
    lines = text.strip().splitlines()
    head = lines[0].split() if lines else []
    if len(head) != 6 or head[0] != "model" or head[2] != "dim" or head[4] != "hidden":
        raise InvalidInputError(f"bad model header: {lines[0] if lines else ''!r}")
    kind, d, H = head[1], int(head[3]), int(head[5])
    values = np.array([float(tok) for ln in lines[1:] for tok in ln.split()])
    if kind == "lr":
        if values.size not in (d, d + 1):
            raise InvalidInputError(f"lr model with dim {d} cannot have {values.size} weights")
        return LogisticModel(values, bias=values.size == d + 1)
    if kind == "elm":
        n_out = values.size - d * H - H
        if n_out not in (H, H + 1):
            raise InvalidInputError(f"elm model dim {d} hidden {H} cannot have {values.size} weights")
        W = values[: d * H].reshape(d, H)
        b = values[d * H : d * H + H]
        return ElmModel(W, b, values[d * H + H :], bias=n_out == H + 1)
    raise InvalidInputError(f"unknown model kind {kind!r}")


def save_model(m, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_model(m))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
