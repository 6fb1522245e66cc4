"""Training criteria evaluated on a batch of predicted probabilities.

Sign convention: ``ce_risk`` and ``mse_risk`` are losses (smaller is better);
every kernel criterion (C-Loss, QMEE, RMEE) is an information potential to be
*maximized*.  Kernel objectives keep the full ``1/N**2`` and kernel
normalisation factors so their values are comparable across bandwidths.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import InvalidInputError, InvalidParameterError
from .kernel_density import check_sigma, gaussian_kernel, parzen_pdf
from .quantization import RESTRICTED_WORDS, quantize, restricted_codebook

__all__ = [
    "KINDS",
    "KERNEL_KINDS",
    "PROB_CLIP",
    "CriterionSpec",
    "PredictionBatch",
    "ce_risk",
    "mse_risk",
    "closs_objective",
    "codebook_objective",
    "rmee_objective",
    "qmee_objective",
    "inner_product_similarity",
    "evaluate",
]

KINDS = ("CE", "MSE", "CLOSS", "QMEE", "RMEE")
KERNEL_KINDS = ("CLOSS", "QMEE", "RMEE")
PROB_CLIP = 1e-12


@dataclass(frozen=True)
class CriterionSpec:
    """Which objective to use and its hyper-parameters.

    ``phi`` holds the restricted counts ``(phi_0, phi_-1, phi_1)`` for RMEE;
    leave it ``None`` to have them estimated from a C-Loss pre-fit.
    ``sigma`` is ignored by CE and MSE.
    """

    kind: str
    sigma: float = 0.5
    phi: Optional[Tuple[int, int, int]] = None
    quantizer_epsilon: float = 0.05

    def __post_init__(self):
        kind = str(self.kind).upper().replace("-", "").replace("_", "")
        if kind not in KINDS:
            raise InvalidParameterError(f"unknown criterion {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind in KERNEL_KINDS:
            check_sigma(self.sigma)
        if self.phi is not None:
            phi = tuple(int(v) for v in self.phi)
            if len(phi) != 3 or min(phi) < 0 or sum(phi) == 0:
                raise InvalidParameterError(f"invalid restricted counts {self.phi!r}")
            object.__setattr__(self, "phi", phi)
        if not self.quantizer_epsilon >= 0:
            raise InvalidParameterError("quantizer_epsilon must be >= 0")

    @property
    def is_kernel(self):
        return self.kind in KERNEL_KINDS


@dataclass(frozen=True)
class PredictionBatch:
    """Targets in ``{0, 1}`` and predicted probabilities of class 1."""

    targets: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.targets, dtype=float).ravel()
        y = np.asarray(self.probs, dtype=float).ravel()
        if t.shape != y.shape:
            raise InvalidInputError(f"{t.size} targets but {y.size} probabilities")
        if t.size == 0:
            raise InvalidInputError("empty prediction batch")
        if not np.all((t == 0) | (t == 1)):
            raise InvalidInputError("targets must be 0 or 1")
        if not np.all((y >= 0) & (y <= 1)):
            raise InvalidInputError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "probs", y)

    @classmethod
    def from_errors(cls, errors, targets=None):
        """Build a batch reproducing the given errors ``e = t - y``.

        Without explicit targets, ``t = 1`` is used for nonnegative errors
        and ``t = 0`` otherwise, which covers every ``e`` in ``(-1, 1]``.
        """
        e = np.asarray(errors, dtype=float).ravel()
        t = (e >= 0).astype(float) if targets is None else np.asarray(targets, dtype=float)
        return cls(t, t - e)

    @property
    def errors(self):
        return self.targets - self.probs

    def __len__(self):
        return self.targets.size


def ce_risk(b):
    """Cross-entropy risk, an unnormalised sum over samples.

    Probabilities are clipped to ``[1e-12, 1 - 1e-12]`` so the value is
    always finite.
    """
    y = np.clip(b.probs, PROB_CLIP, 1.0 - PROB_CLIP)
    t = b.targets
    return float(-np.sum((1.0 - t) * np.log1p(-y) + t * np.log(y)))


def mse_risk(b):
    """Mean squared error ``(1/N) sum e_i**2``."""
    return float(np.mean(b.errors**2))


def codebook_objective(errors, codebook, sigma):
    """``(1/N**2) sum_i sum_j phi_j kappa(e_i - c_j)`` for a weighted codebook.

    ``N`` is the number of errors; the codebook counts are used as given.
    """
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise InvalidInputError("empty error sample")
    k = gaussian_kernel(e[:, np.newaxis] - codebook.words[np.newaxis, :], sigma)
    return float((k @ codebook.counts).sum() / e.size**2)


def closs_objective(b, sigma):
    """Correntropy of the errors, ``(1/N) sum_i kappa(e_i)``."""
    return float(np.mean(gaussian_kernel(b.errors, sigma)))


def _restricted_counts(spec, n):
    if spec.kind == "CLOSS":
        return (n, 0, 0)
    if spec.kind != "RMEE":
        raise InvalidParameterError(f"restricted objective needs CLOSS or RMEE, got {spec.kind}")
    if spec.phi is None:
        raise InvalidParameterError("RMEE objective needs restricted counts phi")
    if sum(spec.phi) != n:
        raise InvalidParameterError(f"restricted counts {spec.phi} do not sum to N={n}")
    return spec.phi


def rmee_objective(b, spec):
    """Restricted quadratic information potential on the codebook ``(0, -1, 1)``.

    ``(1/N**2) sum_i [phi_0 k(e_i) + phi_-1 k(e_i + 1) + phi_1 k(e_i - 1)]``.
    With ``spec.kind == "CLOSS"`` the counts are ``(N, 0, 0)``.
    """
    phi = _restricted_counts(spec, len(b))
    return codebook_objective(b.errors, restricted_codebook(*phi), spec.sigma)


def qmee_objective(b, spec):
    """Quantized MEE objective: re-quantize the errors, then weight by counts."""
    codebook, _ = quantize(b.errors, spec.quantizer_epsilon)
    return codebook_objective(b.errors, codebook, spec.sigma)


def inner_product_similarity(b, zeta, sigma):
    """Inner product of the Parzen error density with the three-peak target.

    ``zeta = (zeta_0, zeta_-1, zeta_1)`` are the peak masses at ``0, -1, 1``;
    they must be nonnegative and sum to one.  The value is
    ``sum_k zeta_k * parzen_pdf(c_k)``.
    """
    zeta = np.asarray(zeta, dtype=float).ravel()
    if zeta.shape != (3,) or np.any(zeta < 0) or not np.isclose(zeta.sum(), 1.0, rtol=0, atol=1e-12):
        raise InvalidParameterError(f"zeta must be 3 nonnegative weights summing to 1, got {zeta}")
    dens = parzen_pdf(np.array(RESTRICTED_WORDS), b.errors, sigma)
    return float(zeta @ dens)


def evaluate(b, spec):
    """Value of ``spec``'s criterion on ``b`` (loss for CE/MSE, potential otherwise)."""
    if spec.kind == "CE":
        return ce_risk(b)
    if spec.kind == "MSE":
        return mse_risk(b)
    if spec.kind == "QMEE":
        return qmee_objective(b, spec)
    return rmee_objective(b, spec)

