"""Online adaptive quantization of scalar samples into a weighted codebook.

A :class:`Codebook` pairs code words with the number of samples mapped to
each word.  :func:`quantize` builds one from data in a single sequential pass;
:func:`restricted_codebook` returns the fixed three-word codebook
``(0, -1, 1)`` used by the restricted criterion.
"""

import bisect
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, InvalidParameterError

__all__ = ["Codebook", "quantize", "restricted_codebook", "RESTRICTED_WORDS"]

RESTRICTED_WORDS = (0.0, -1.0, 1.0)


@dataclass(frozen=True)
class Codebook:
    """Code words and the per-word sample counts."""

    words: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        words = np.asarray(self.words, dtype=float).ravel()
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        if words.size == 0:
            raise InvalidParameterError("a codebook needs at least one word")
        if words.shape != counts.shape:
            raise InvalidParameterError("words and counts must have the same length")
        if np.any(counts < 0):
            raise InvalidParameterError("codebook counts must be nonnegative")
        if np.unique(words).size != words.size:
            raise InvalidParameterError("codebook words must be pairwise distinct")
        words.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.words.size

    @property
    def total(self):
        """Number of quantized samples, the sum of the counts."""
        return int(self.counts.sum())


@dataclass(frozen=True)
class QuantizerConfig:
    epsilon: float = 0.05

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise InvalidParameterError("quantization threshold must be >= 0")


def quantize(samples, epsilon=0.05):
    """Sequentially quantize ``samples`` into a data-driven codebook.

    The range ``L = max - min`` fixes the merge threshold ``epsilon * L``.  The
    first sample seeds the codebook; every later sample is mapped to its
    nearest existing word when that distance is ``<= epsilon * L``, and
    otherwise becomes a new word quantized to itself.  Equidistant words are
    resolved towards the one inserted first.

    Parameters
    ----------
    samples : array_like
        Scalar samples, processed in the given order.
    epsilon : float or QuantizerConfig
        Relative quantization threshold (``>= 0``).

    Returns
    -------
    codebook : Codebook
        Words in insertion order with their counts.
    assignment : ndarray of int
        Index of the word each sample was mapped to.
    """
    if isinstance(epsilon, QuantizerConfig):
        epsilon = epsilon.epsilon
    epsilon = QuantizerConfig(float(epsilon)).epsilon
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise InvalidInputError("cannot quantize an empty sample")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("samples must be finite")
    threshold = epsilon * float(x.max() - x.min())

    values = x.tolist()
    words = [values[0]]
    counts = [1]
    # sorted view of the words for O(log M) nearest-word lookup
    sorted_vals = [values[0]]
    sorted_idx = [0]
    assignment = [0]
    for xi in values[1:]:
        pos = bisect.bisect_left(sorted_vals, xi)
        best_j, best_d = -1, np.inf
        for k in (pos - 1, pos):
            if 0 <= k < len(sorted_vals):
                d = abs(xi - sorted_vals[k])
                j = sorted_idx[k]
                if d < best_d or (d == best_d and j < best_j):
                    best_j, best_d = j, d
        if best_d <= threshold:
            counts[best_j] += 1
            assignment.append(best_j)
        else:
            j = len(words)
            words.append(xi)
            counts.append(1)
            sorted_vals.insert(pos, xi)
            sorted_idx.insert(pos, j)
            assignment.append(j)
    return Codebook(np.array(words), np.array(counts)), np.array(assignment, dtype=np.int64)


def restricted_codebook(phi0, phi_neg1, phi1):
    """The fixed codebook ``(0, -1, 1)`` weighted by the given counts.

    ``(N, 0, 0)`` puts all weight on the zero word and reproduces the
    correntropy (C-Loss) objective.
    """
    counts = np.array([phi0, phi_neg1, phi1])
    if np.any(counts < 0) or np.any(counts != np.round(counts)):
        raise InvalidParameterError(f"counts must be nonnegative integers, got {tuple(counts)}")
    if counts.sum() <= 0:
        raise InvalidParameterError("at least one restricted count must be positive")
    return Codebook(np.array(RESTRICTED_WORDS), counts.astype(np.int64))
