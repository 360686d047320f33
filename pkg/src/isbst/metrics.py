"""Post-hoc distance metrics between SUT signals.

Seven measures mirror the analysis setup: LCS between the reset input and
each boolean output, Euclidean and SAX distances from the reset-value and
ramped-input channels to the output, and a Mahalanobis distance from a
candidate's output features to the reference population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

try:
    from isbst import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

from .fbd import _exec_py

METRIC_TAGS = ("LCS17", "LCS18", "E29", "E69", "SAX29", "SAX69", "Mref")


def lcs_length(a, b) -> int:
    """Longest common subsequence (not substring) length."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if _compiled is not None:
        return int(_compiled.lcs_length(a, b))
    return _exec_py.lcs_length(a, b)


def euclidean(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(((a - b) ** 2).sum()))


@dataclass(frozen=True)
class SaxParams:
    word_length: int = 8
    alphabet_size: int = 4

    def __post_init__(self):
        if not 2 <= self.alphabet_size <= 10:
            raise ValueError("alphabet size must be in [2, 10]")
        if self.word_length < 1:
            raise ValueError("word length must be >= 1")

    @property
    def breakpoints(self) -> np.ndarray:
        return _breakpoints(self.alphabet_size)


@lru_cache(maxsize=None)
def _breakpoints(alphabet_size: int) -> np.ndarray:
    qs = np.arange(1, alphabet_size) / alphabet_size
    bps = norm.ppf(qs)
    bps.setflags(write=False)
    return bps


def znorm(x) -> np.ndarray:
    """Zero-mean unit-variance; a zero-variance series maps to all zeros."""
    x = np.asarray(x, dtype=np.float64)
    std = x.std()
    if std == 0.0:
        return np.zeros_like(x)
    return (x - x.mean()) / std


def paa(x: np.ndarray, segments: int) -> np.ndarray:
    """Piecewise aggregate approximation; segment i covers
    [floor(i*n/w), floor((i+1)*n/w))."""
    n = x.size
    if n < segments:
        raise ValueError(f"series length {n} shorter than word length {segments}")
    bounds = (np.arange(segments + 1) * n) // segments
    return np.array([x[bounds[i]:bounds[i + 1]].mean() for i in range(segments)])


def sax_word(x, params: SaxParams) -> np.ndarray:
    """Symbol indices (0..a-1) for a series: znorm -> PAA -> breakpoints."""
    means = paa(znorm(x), params.word_length)
    return np.searchsorted(params.breakpoints, means, side="right")


def sax_mindist(a, b, params: SaxParams | None = None) -> float:
    """MINDIST between the SAX words of two equal-length series."""
    params = params or SaxParams()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("series must share one length")
    wa = sax_word(a, params)
    wb = sax_word(b, params)
    bps = params.breakpoints
    total = 0.0
    for r, c in zip(wa, wb):
        if abs(int(r) - int(c)) > 1:
            total += (bps[max(r, c) - 1] - bps[min(r, c)]) ** 2
    return math.sqrt(a.size / params.word_length) * math.sqrt(total)


FEATURE_NAMES = ("min", "max", "mean", "stddev", "max.increase", "max.decrease")


def output_features(out9) -> np.ndarray:
    """Six summary statistics of the ramped output signal."""
    sig = np.asarray(out9, dtype=np.float64)
    if sig.size >= 2:
        d = sig[1:] - sig[:-1]
        inc, dec = d.max(), (-d).max()
    else:
        inc = dec = 0.0
    return np.array([sig.min(), sig.max(), sig.mean(), sig.std(), inc, dec])


@dataclass(frozen=True)
class ReferenceModel:
    """Mean/covariance of reference-version output features, regularized."""

    mean: np.ndarray
    covariance: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "ReferenceModel":
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise ValueError("need at least two feature vectors")
        mean = x.mean(axis=0)
        cov = np.cov(x, rowvar=False)
        d = x.shape[1]
        eps = 1e-6 * np.trace(cov) / d
        if eps <= 0.0:
            eps = 1e-9  # all-identical features; keep the model invertible
        cov = cov + eps * np.eye(d)
        return cls(mean, cov)


def mahalanobis(features, model: ReferenceModel) -> float:
    x = np.asarray(features, dtype=np.float64)
    if x.shape != model.mean.shape:
        raise ValueError(f"feature dimension {x.shape} != model {model.mean.shape}")
    dx = x - model.mean
    return float(np.sqrt(dx @ np.linalg.solve(model.covariance, dx)))


def candidate_metrics(inputs: np.ndarray, outputs: np.ndarray,
                      ref_model: ReferenceModel | None,
                      sax_params: SaxParams | None = None) -> dict[str, float]:
    """All seven metrics for one candidate (inputs[7,T], outputs[3,T]).

    Mref requires a fitted reference model; it is omitted when absent.
    """
    sax_params = sax_params or SaxParams()
    values = {
        "LCS17": float(lcs_length(inputs[1], outputs[0])),
        "LCS18": float(lcs_length(inputs[1], outputs[1])),
        "E29": euclidean(inputs[2], outputs[2]),
        "E69": euclidean(inputs[6], outputs[2]),
        "SAX29": sax_mindist(inputs[2], outputs[2], sax_params),
        "SAX69": sax_mindist(inputs[6], outputs[2], sax_params),
    }
    if ref_model is not None:
        values["Mref"] = mahalanobis(output_features(outputs[2]), ref_model)
    return values
