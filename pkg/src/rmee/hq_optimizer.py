"""Half-quadratic training of kernel criteria, plus Adam baselines.

The kernel criteria (C-Loss, QMEE, RMEE) all maximize a weighted codebook
potential ``(1/N**2) sum_i sum_j phi_j kappa(e_i - c_j)``.  Writing every
Gaussian through its convex conjugate,

    exp(-a) = sup_{v<0} { v a - g(v) },   g(v) = -v log(-v) + v,

turns the problem into an alternating one: for fixed errors the auxiliary
variables have the closed form ``v = -exp(-a)``; for fixed auxiliaries the
weights maximize the weighted least-squares surrogate

    J2(w) = sum_i sum_j phi_j A_ij (e_i - c_j)**2,      A_ij < 0.

Any ``w`` that does not decrease ``J2`` keeps the outer objective
nondecreasing, so the inner problem only needs an improving step.  Here it
is a fixed number of Adam ascent steps with a backtracking guard.

The restricted codebook ``(0, -1, 1)`` gives RMEE, the counts ``(N, 0, 0)``
give C-Loss, and a codebook rebuilt from the current errors gives QMEE.
CE and MSE have no kernel and are fitted by plain Adam descent.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.special import expit

from .criteria import CriterionSpec, PredictionBatch, ce_risk, codebook_objective, mse_risk
from .exceptions import InvalidInputError, InvalidParameterError, NumericFailure
from .kernel_density import check_sigma
from .quantization import RESTRICTED_WORDS, Codebook, quantize, restricted_codebook

__all__ = [
    "AdamConfig",
    "AdamState",
    "FitConfig",
    "FitTrace",
    "HQAux",
    "DEFAULT_SIGMA_GRID",
    "adam_step",
    "hq_aux_update",
    "jr2_objective",
    "jr2_gradient",
    "hq_fit",
    "gradient_fit",
    "count_phi",
    "estimate_phi",
    "fit_rmee_full",
    "fit",
    "cross_validate_sigma",
]

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_GRID = (0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0)


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidParameterError("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidParameterError("Adam betas must lie in [0, 1)")


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(weights, gradient, state, cfg=AdamConfig()):
    """One bias-corrected Adam step *along* ``gradient`` (ascent).

    Returns the new weights and state; inputs are not modified.  For descent
    pass the negated gradient.
    """
    g = np.asarray(gradient, dtype=float)
    if g.shape != np.shape(weights):
        raise InvalidInputError(f"gradient shape {g.shape} != weights shape {np.shape(weights)}")
    if not np.all(np.isfinite(g)):
        raise NumericFailure("non-finite gradient")
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    w = weights + cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
    return w, AdamState(m, v, t)


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings shared by every criterion.

    ``varsigma`` is the convergence threshold on the change of the outer
    objective between two outer iterations.  ``max_halvings`` bounds the
    backtracking of one inner phase.  ``refine_rounds`` is the number of
    re-estimations of the restricted counts after the C-Loss pre-fit.
    """

    max_outer_iters: int = 200
    inner_steps: int = 50
    varsigma: float = 1e-6
    adam: AdamConfig = field(default_factory=AdamConfig)
    max_halvings: int = 5
    refine_rounds: int = 1
    warm_start: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.inner_steps < 1:
            raise InvalidParameterError("max_outer_iters and inner_steps must be >= 1")
        if not self.varsigma > 0:
            raise InvalidParameterError("varsigma must be > 0")
        if self.refine_rounds < 1:
            raise InvalidParameterError("refine_rounds must be >= 1")


@dataclass
class FitTrace:
    """Outer-loop history; ``objective_per_iter[0]`` is the starting value."""

    objective_per_iter: List[float] = field(default_factory=list)
    converged: bool = False
    iters_used: int = 0
    halvings: int = 0
    codebook_sizes: List[int] = field(default_factory=list)


@dataclass(frozen=True)
class HQAux:
    """Auxiliary variables, one column per code word.

    ``values[i, j] = -exp(-(e_i - c_j)**2 / (2 sigma**2))``.  For the
    restricted codebook the columns are ``u, v, s`` (words ``0, -1, 1``).
    """

    values: np.ndarray
    words: np.ndarray = field(default_factory=lambda: np.array(RESTRICTED_WORDS))

    def _column(self, word):
        hits = np.flatnonzero(self.words == word)
        if hits.size == 0:
            raise AttributeError(f"no code word {word}")
        return self.values[:, hits[0]]

    @property
    def u(self):
        return self._column(0.0)

    @property
    def v(self):
        return self._column(-1.0)

    @property
    def s(self):
        return self._column(1.0)


_TINY = np.finfo(float).tiny


def _aux_values(e, words, sigma):
    d = e[:, np.newaxis] - words[np.newaxis, :]
    # clamp away from 0 so the variables stay strictly negative after underflow
    return np.minimum(-np.exp(-(d * d) / (2.0 * sigma * sigma)), -_TINY)


def hq_aux_update(errors, sigma, words=RESTRICTED_WORDS):
    """Closed-form auxiliary update for the current errors."""
    sigma = check_sigma(sigma)
    e = np.asarray(errors, dtype=float).ravel()
    w = np.asarray(words, dtype=float).ravel()
    return HQAux(_aux_values(e, w, sigma), w)


def _phi_vector(phi, aux):
    if isinstance(phi, Codebook):
        phi = phi.counts
    phi = np.asarray(phi, dtype=float).ravel()
    if phi.size != aux.words.size:
        raise InvalidInputError(f"{phi.size} counts for {aux.words.size} code words")
    return phi


def _errors_of(batch):
    return batch.errors if isinstance(batch, PredictionBatch) else np.asarray(batch, dtype=float).ravel()


def _jr2(e, A, words, phi):
    d = e[:, np.newaxis] - words[np.newaxis, :]
    return float(np.sum((A * d * d) @ phi))


def _jr2_grad(D, y, e, A, words, phi):
    d = e[:, np.newaxis] - words[np.newaxis, :]
    r = (A * d) @ phi
    return -2.0 * D.T @ (r * y * (1.0 - y))


def jr2_objective(batch, aux, phi):
    """Weighted least-squares surrogate for fixed auxiliaries (always ``<= 0``).

    ``batch`` is a :class:`PredictionBatch` or an array of errors; ``phi``
    holds one count per code word in ``aux``.
    """
    e = _errors_of(batch)
    if e.size != aux.values.shape[0]:
        raise InvalidInputError("auxiliaries and errors differ in length")
    return _jr2(e, aux.values, aux.words, _phi_vector(phi, aux))


def jr2_gradient(model, X, targets, aux, phi):
    """Gradient of :func:`jr2_objective` with respect to ``model.params``.

    For a logistic model this is
    ``-2 sum_i r_i y_i (1 - y_i) x_i`` with
    ``r_i = sum_j phi_j A_ij (e_i - c_j)``; for an ELM the hidden features
    replace ``x_i``.
    """
    D = model.design(X)
    t = np.asarray(targets, dtype=float).ravel()
    if t.size != D.shape[0] or t.size != aux.values.shape[0]:
        raise InvalidInputError("targets, samples and auxiliaries differ in length")
    y = expit(D @ model.params)
    return _jr2_grad(D, y, t - y, aux.values, aux.words, _phi_vector(phi, aux))


def _inner_phase(D, t, w0, A, words, phi, state0, cfg):
    """Adam ascent on J2 that never ends below its starting value."""
    e0 = t - expit(D @ w0)
    j0 = _jr2(e0, A, words, phi)
    best = (j0, w0, state0)
    adam = cfg.adam
    for halving in range(cfg.max_halvings + 1):
        w, state = w0, state0
        for _ in range(cfg.inner_steps):
            y = expit(D @ w)
            g = _jr2_grad(D, y, t - y, A, words, phi)
            w, state = adam_step(w, g, state, adam)
        j = _jr2(t - expit(D @ w), A, words, phi)
        if not np.isfinite(j):
            raise NumericFailure("surrogate objective became non-finite")
        if j >= j0:
            return w, state, halving
        if j > best[0]:
            best = (j, w, state)
        adam = dataclasses.replace(adam, learning_rate=adam.learning_rate / 2.0)
    return best[1], best[2], cfg.max_halvings


def _restricted_for(spec, n):
    if spec.kind == "CLOSS":
        return restricted_codebook(n, 0, 0)
    if spec.phi is None:
        raise InvalidParameterError("RMEE fit needs restricted counts; use fit_rmee_full to estimate them")
    if sum(spec.phi) != n:
        raise InvalidParameterError(f"restricted counts {spec.phi} do not sum to N={n}")
    return restricted_codebook(*spec.phi)


def _check_xy(model, X, targets):
    D = model.design(X)
    t = np.asarray(targets, dtype=float).ravel()
    if t.size != D.shape[0] or t.size == 0:
        raise InvalidInputError("need one {0,1} target per sample and at least one sample")
    if not np.all((t == 0) | (t == 1)):
        raise InvalidInputError("targets must be 0 or 1")
    return D, t


def hq_fit(model, X, targets, spec, cfg=FitConfig()):
    """Maximize a kernel criterion by half-quadratic alternation.

    Parameters
    ----------
    model : LogisticModel or ElmModel
        Starting point; only ``model.params`` are trained.
    X : ndarray, shape (N, d)
        Attributes.
    targets : array_like of {0, 1}
        Labels.
    spec : CriterionSpec
        ``CLOSS``, ``RMEE`` (with ``spec.phi`` summing to ``N``) or ``QMEE``.
    cfg : FitConfig

    Returns
    -------
    model
        Copy of ``model`` with fitted parameters.
    FitTrace
        Objective after every outer iteration (nondecreasing).

    Notes
    -----
    For QMEE the codebook is rebuilt from the current errors at every outer
    iteration, but a rebuilt codebook is only adopted when it does not lower
    the objective at the current weights; the trace therefore stays monotone.
    """
    if not spec.is_kernel:
        raise InvalidParameterError(f"hq_fit needs a kernel criterion, got {spec.kind}")
    D, t = _check_xy(model, X, targets)
    n = t.size
    sigma = spec.sigma
    w = np.array(model.params, dtype=float)

    def errors(w):
        return t - expit(D @ w)

    e = errors(w)
    if spec.kind == "QMEE":
        codebook, _ = quantize(e, spec.quantizer_epsilon)
    else:
        codebook = _restricted_for(spec, n)
    obj = codebook_objective(e, codebook, sigma)
    trace = FitTrace([obj], codebook_sizes=[len(codebook)])
    state = AdamState.zeros(w.size)

    for _ in range(cfg.max_outer_iters):
        if spec.kind == "QMEE" and trace.iters_used > 0:
            candidate, _ = quantize(e, spec.quantizer_epsilon)
            if codebook_objective(e, candidate, sigma) >= obj:
                codebook = candidate
        words = codebook.words
        phi = codebook.counts.astype(float)
        A = _aux_values(e, words, sigma)
        w, state, halvings = _inner_phase(D, t, w, A, words, phi, state, cfg)
        trace.halvings += halvings
        e = errors(w)
        new_obj = codebook_objective(e, codebook, sigma)
        if not np.isfinite(new_obj):
            raise NumericFailure("objective became non-finite")
        trace.objective_per_iter.append(new_obj)
        trace.codebook_sizes.append(len(codebook))
        trace.iters_used += 1
        done = abs(new_obj - obj) < cfg.varsigma
        obj = new_obj
        if done:
            trace.converged = True
            break
    return model.with_params(w), trace


def gradient_fit(model, X, targets, spec, cfg=FitConfig()):
    """Minimize CE or MSE with Adam on the analytic gradient.

    Runs at most ``max_outer_iters * inner_steps`` steps, checking every
    ``inner_steps`` steps whether the per-sample loss changed by less than
    ``cfg.varsigma``.  The trace records the criterion value (a loss).
    """
    if spec.kind not in ("CE", "MSE"):
        raise InvalidParameterError(f"gradient_fit handles CE and MSE, got {spec.kind}")
    D, t = _check_xy(model, X, targets)
    n = t.size
    w = np.array(model.params, dtype=float)
    risk = ce_risk if spec.kind == "CE" else mse_risk

    def loss(w):
        return risk(PredictionBatch(t, expit(D @ w)))

    cur = loss(w)
    trace = FitTrace([cur])
    state = AdamState.zeros(w.size)
    for _ in range(cfg.max_outer_iters):
        for _ in range(cfg.inner_steps):
            y = expit(D @ w)
            if spec.kind == "CE":
                descent = D.T @ (t - y)
            else:
                descent = (2.0 / n) * D.T @ ((t - y) * y * (1.0 - y))
            w, state = adam_step(w, descent, state, cfg.adam)
        new = loss(w)
        if not np.isfinite(new):
            raise NumericFailure("loss became non-finite")
        trace.objective_per_iter.append(new)
        trace.iters_used += 1
        scale = n if spec.kind == "CE" else 1
        done = abs(new - cur) / scale < cfg.varsigma
        cur = new
        if done:
            trace.converged = True
            break
    return model.with_params(w), trace


def count_phi(errors):
    """Count errors in the inlier, false-negative and false-positive bands.

    Returns ``(#{|e| <= 0.5}, #{e < -0.5}, #{e > 0.5})``; the boundaries
    ``+-0.5`` go to the inlier band so the three counts always sum to N.
    """
    e = np.asarray(errors, dtype=float).ravel()
    fn = int(np.count_nonzero(e < -0.5))
    fp = int(np.count_nonzero(e > 0.5))
    return (e.size - fn - fp, fn, fp)


def _estimate(model, X, targets, sigma, cfg):
    closs = CriterionSpec("CLOSS", sigma=sigma)
    fitted, trace = hq_fit(model, X, targets, closs, cfg)
    y = fitted.predict_proba(X)
    return count_phi(np.asarray(targets, dtype=float) - y), fitted, trace


def estimate_phi(model, X, targets, spec, cfg=FitConfig()):
    """Restricted counts from the errors of a C-Loss pre-fit.

    ``spec.sigma`` is used for the pre-fit; the result sums to N.
    """
    phi, _, _ = _estimate(model, X, targets, spec.sigma, cfg)
    return phi


def fit_rmee_full(model, X, targets, sigma, cfg=FitConfig()):
    """Two-stage RMEE: C-Loss pre-fit, count the bands, refit with the counts.

    The refit starts from the C-Loss solution when ``cfg.warm_start`` is set
    (the default) and from ``model`` otherwise.  With ``cfg.refine_rounds > 1``
    the count-and-refit step is repeated.

    Returns
    -------
    model, phi, FitTrace
        ``phi`` are the counts used by the final fit, whose trace is returned.
    """
    sigma = sigma.sigma if isinstance(sigma, CriterionSpec) else check_sigma(sigma)
    phi, current, _ = _estimate(model, X, targets, sigma, cfg)
    t = np.asarray(targets, dtype=float).ravel()
    for round_ in range(cfg.refine_rounds):
        if round_ > 0:
            phi = count_phi(t - current.predict_proba(X))
        start = current if cfg.warm_start else model
        current, trace = hq_fit(start, X, targets, CriterionSpec("RMEE", sigma=sigma, phi=phi), cfg)
    logger.debug("RMEE counts %s, %d outer iterations", phi, trace.iters_used)
    return current, phi, trace


def fit(model, X, targets, spec, cfg=FitConfig()):
    """Fit ``model`` under any criterion; returns ``(model, FitTrace)``.

    RMEE without explicit counts runs the two-stage procedure of
    :func:`fit_rmee_full`.
    """
    if spec.kind in ("CE", "MSE"):
        return gradient_fit(model, X, targets, spec, cfg)
    if spec.kind == "RMEE" and spec.phi is None:
        fitted, _, trace = fit_rmee_full(model, X, targets, spec.sigma, cfg)
        return fitted, trace
    return hq_fit(model, X, targets, spec, cfg)


def stratified_folds(targets, n_folds=5, seed=0):
    """Validation index arrays of a shuffled stratified ``n_folds`` split."""
    from sklearn.model_selection import StratifiedKFold

    t = np.asarray(targets).ravel()
    skf = StratifiedKFold(n_splits=n_folds, shuffle=True, random_state=seed)
    return [val for _, val in skf.split(np.zeros(t.size), t)]


def cross_validate_sigma(model, X, targets, candidate_sigmas=DEFAULT_SIGMA_GRID, cfg=FitConfig(),
                         kind="RMEE", n_folds=5):
    """Pick the bandwidth with the best mean validation accuracy.

    Every candidate is scored by stratified ``n_folds``-fold cross-validation
    of the given criterion (two-stage RMEE by default).  Ties go to the
    smaller bandwidth.  ``model`` is the untrained template used in each fold.
    """
    sigmas = sorted(check_sigma(s) for s in candidate_sigmas)
    if not sigmas:
        raise InvalidParameterError("no candidate bandwidths")
    if len(sigmas) == 1:
        return sigmas[0]
    X = np.asarray(X, dtype=float)
    t = np.asarray(targets, dtype=float).ravel()
    if min(np.count_nonzero(t == 0), np.count_nonzero(t == 1)) < n_folds:
        raise InvalidInputError(f"cross-validation needs >= {n_folds} samples of each class")
    folds = stratified_folds(t, n_folds, cfg.seed)
    best_sigma, best_acc = None, -np.inf
    for sigma in sigmas:
        accs = []
        for val in folds:
            train = np.ones(t.size, dtype=bool)
            train[val] = False
            fitted, _ = fit(model, X[train], t[train], CriterionSpec(kind, sigma=sigma), cfg)
            pred = fitted.predict_proba(X[val]) > 0.5
            accs.append(np.mean(pred == (t[val] == 1)))
        acc = float(np.mean(accs))
        logger.debug("sigma=%g cv accuracy %.4f", sigma, acc)
        if acc > best_acc:
            best_sigma, best_acc = sigma, acc
    return best_sigma
