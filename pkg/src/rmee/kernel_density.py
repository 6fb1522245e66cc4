"""Gaussian kernels, Parzen densities and quadratic information potentials.

All estimators here work on one-dimensional samples of prediction errors
``e = t - y``.  The kernel is the normalised Gaussian

    kappa_sigma(x) = exp(-x**2 / (2 sigma**2)) / (sqrt(2 pi) sigma)

and the quadratic information potential of a sample is the mean of its
Parzen density evaluated at the sample points, so that minimising Renyi's
quadratic entropy is the same as maximising the potential.

The module also provides the analytic density of the error ``E = T - Y`` of
a logistic model whose class-conditional projections ``w'x`` are Gaussian
(:func:`theoretical_error_pdf`).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, InvalidParameterError

__all__ = [
    "ClassGaussianParams",
    "check_sigma",
    "gaussian_kernel",
    "parzen_pdf",
    "quadratic_information_potential",
    "renyi_quadratic_entropy",
    "silverman_bandwidth",
    "theoretical_error_pdf",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def check_sigma(sigma):
    """Return ``sigma`` as a float, raising if it is not a positive number."""
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise InvalidParameterError(f"kernel bandwidth must be > 0, got {sigma!r}")
    return sigma


def _as_sample(errs):
    errs = np.asarray(errs, dtype=float).ravel()
    if errs.size == 0:
        raise InvalidInputError("error sample is empty")
    return errs


def gaussian_kernel(x, sigma):
    """Normalised Gaussian kernel with bandwidth ``sigma``.

    Parameters
    ----------
    x : float or array_like
        Evaluation point(s).
    sigma : float
        Kernel bandwidth, strictly positive.

    Returns
    -------
    float or ndarray
        ``exp(-x**2 / (2 sigma**2)) / (sqrt(2 pi) sigma)``, same shape as ``x``.
    """
    sigma = check_sigma(sigma)
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * (x / sigma) ** 2) / (_SQRT_2PI * sigma)
    return out[()] if out.ndim == 0 else out


def parzen_pdf(e, errs, sigma):
    """Parzen estimate of the error density at ``e``.

    ``(1/N) sum_j kappa_sigma(e - e_j)``; ``e`` may be a scalar or an array of
    evaluation points.
    """
    errs = _as_sample(errs)
    e = np.asarray(e, dtype=float)
    diffs = e[..., np.newaxis] - errs
    out = gaussian_kernel(diffs, sigma).mean(axis=-1)
    return out[()] if np.ndim(out) == 0 else out


def quadratic_information_potential(errs, sigma):
    """Empirical quadratic information potential of an error sample.

    Computed as the full double sum ``(1/N**2) sum_i sum_j kappa(e_i - e_j)``,
    which is O(N**2) in time and memory.
    """
    errs = _as_sample(errs)
    diffs = errs[:, np.newaxis] - errs[np.newaxis, :]
    return float(gaussian_kernel(diffs, sigma).mean())


def renyi_quadratic_entropy(errs, sigma):
    """Renyi's quadratic entropy estimate, ``-log`` of the information potential."""
    return float(-np.log(quadratic_information_potential(errs, sigma)))


def silverman_bandwidth(errs):
    """Silverman's rule of thumb ``1.06 * s * N**(-1/5)``.

    ``s`` is the sample standard deviation (``ddof=1``).  Raises
    :class:`InvalidInputError` for fewer than two samples or a zero spread.
    """
    errs = np.asarray(errs, dtype=float).ravel()
    if errs.size < 2:
        raise InvalidInputError("Silverman's rule needs at least two samples")
    s = float(np.std(errs, ddof=1))
    if not s > 0.0:
        raise InvalidInputError("Silverman's rule is undefined for a constant sample")
    return 1.06 * s * errs.size ** (-0.2)


@dataclass(frozen=True)
class ClassGaussianParams:
    """Projected class-conditional Gaussians of a linear score ``w'x``.

    ``mu0``/``mu1`` are the projected class means, ``var0``/``var1`` the
    projected variances ``w' Sigma_T w`` and ``p`` the prior of class 1.
    """

    mu0: float
    mu1: float
    var0: float
    var1: float
    p: float = 0.5

    def __post_init__(self):
        if not (self.var0 > 0 and self.var1 > 0):
            raise InvalidParameterError("projected variances must be > 0")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameterError("class prior p must lie in [0, 1]")


def _log_ratio_normal(z, jac, mu, var):
    # Gaussian density in the log-odds z, times the inverse-sigmoid Jacobian
    return np.exp(-((z - mu) ** 2) / (2.0 * var)) / (np.sqrt(2.0 * np.pi * var) * jac)


def theoretical_error_pdf(e, g):
    """Density of the error ``E = T - Y`` for Gaussian class projections.

    The error is a two-term mixture: class-1 samples contribute
    ``p * f_{Y|1}(1 - e)`` on ``(0, 1)`` and class-0 samples contribute
    ``q * f_{Y|0}(-e)`` on ``(-1, 0)``, where ``f_{Y|T}`` is the logit-normal
    density obtained by pushing ``N(mu_T, var_T)`` through the sigmoid.
    The density is zero outside ``(-1, 1)`` and at ``e = 0`` (both one-sided
    limits vanish there).

    Parameters
    ----------
    e : float or array_like
        Error value(s).
    g : ClassGaussianParams
        Projected class means, variances and class-1 prior.
    """
    e = np.asarray(e, dtype=float)
    out = np.zeros_like(e)
    pos = (e > 0.0) & (e < 1.0)
    neg = (e < 0.0) & (e > -1.0)
    with np.errstate(over="ignore", under="ignore"):
        ep = e[pos]
        # class 1: y = 1 - e, log-odds log((1 - e) / e)
        out[pos] = g.p * _log_ratio_normal(np.log1p(-ep) - np.log(ep), ep * (1.0 - ep), g.mu1, g.var1)
        en = e[neg]
        # class 0: y = -e, log-odds log(-e / (1 + e))
        out[neg] = (1.0 - g.p) * _log_ratio_normal(np.log(-en) - np.log1p(en), -en * (1.0 + en), g.mu0, g.var0)
    # a saturated exp may leave inf * 0 at extreme logits
    out = np.nan_to_num(out, nan=0.0, posinf=0.0)
    return out[()] if out.ndim == 0 else out
