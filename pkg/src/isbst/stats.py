"""Rank-sum significance testing and the per-version detection report.

A version counts as detected when at least one search objective AND at
least one additional metric show a significant difference (two-sided
Mann-Whitney U, default alpha 0.05) between the per-candidate scores of
its runs and the reference runs. P-values are reported without any
multiple-comparison correction.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .metrics import METRIC_TAGS
from .objectives import OBJECTIVE_TAGS

MEASURE_TAGS = tuple(OBJECTIVE_TAGS) + METRIC_TAGS

EXACT_LIMIT = 8  # exact enumeration when both samples are this small


def _midranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fractional ranks (1-based, ties averaged) and tie-group sizes."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    ties = []
    i = 0
    sorted_vals = values[order]
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        if j > i:
            ties.append(j - i + 1)
        i = j + 1
    return ranks, np.asarray(ties, dtype=np.float64)


def _u_statistic(ranks: np.ndarray, n1: int) -> float:
    r1 = float(ranks[:n1].sum())
    return r1 - n1 * (n1 + 1) / 2.0


def _exact_p(ranks: np.ndarray, n1: int, u_obs: float) -> float:
    """Exact two-sided p over all C(n, n1) assignments of the observed values."""
    # double the ranks so everything stays integral despite midranks
    ranks2 = np.rint(ranks * 2).astype(np.int64)
    base = n1 * (n1 + 1)  # 2 * n1(n1+1)/2
    u2_obs = int(round(u_obs * 2))
    total = 0
    at_most = 0
    at_least = 0
    for subset in combinations(range(ranks2.size), n1):
        u2 = int(sum(ranks2[list(subset)])) - base
        total += 1
        if u2 <= u2_obs:
            at_most += 1
        if u2 >= u2_obs:
            at_least += 1
    p = 2.0 * min(at_most / total, at_least / total)
    return min(1.0, p)


def _approx_p(n1: int, n2: int, ties: np.ndarray, u_obs: float) -> float:
    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_term = float((ties ** 3 - ties).sum()) if ties.size else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return 1.0
    z = (abs(u_obs - mu) - 0.5) / math.sqrt(var)  # continuity correction
    if z < 0.0:
        z = 0.0
    return math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float],
                   method: str = "auto") -> tuple[float, float]:
    """Two-sided Mann-Whitney U test; returns (U of sample_a, p).

    method: "exact" enumerates all arrangements (feasible for small
    samples), "approx" uses the tie-corrected normal approximation with
    continuity correction, "auto" picks exact when both sides are <= 8.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    n1, n2 = a.size, b.size
    if n1 < 3 or n2 < 3:
        raise ValueError("each sample needs at least 3 observations")
    ranks, ties = _midranks(np.concatenate([a, b]))
    u_obs = _u_statistic(ranks, n1)

    if method == "auto":
        method = "exact" if (n1 <= EXACT_LIMIT and n2 <= EXACT_LIMIT) else "approx"
    if method == "exact":
        return u_obs, _exact_p(ranks, n1, u_obs)
    if method == "approx":
        return u_obs, _approx_p(n1, n2, ties, u_obs)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class VersionResult:
    version_id: int
    label: str
    category: str | None
    p_values: dict[str, float]
    flags: dict[str, bool]
    detected: bool


@dataclass
class DetectionReport:
    alpha: float
    reference_id: int
    versions: list[VersionResult] = field(default_factory=list)
    note: str = "two-sided Mann-Whitney U; p-values uncorrected for multiple comparisons"

    def detected_ids(self) -> list[int]:
        return [v.version_id for v in self.versions if v.detected]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "reference_id": self.reference_id,
            "note": self.note,
            "measures": list(MEASURE_TAGS),
            "versions": [
                {
                    "version_id": v.version_id,
                    "label": v.label,
                    "category": v.category,
                    "detected": v.detected,
                    "p_values": v.p_values,
                    "flags": v.flags,
                }
                for v in self.versions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Matrix: one row per measure, one column per version."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["# " + self.note])
        writer.writerow(["measure"] + [v.label for v in self.versions])
        for tag in MEASURE_TAGS:
            row = [tag]
            for v in self.versions:
                p = v.p_values.get(tag)
                mark = "x" if v.flags.get(tag) else ""
                row.append(f"{p:.4g}{' ' + mark if mark else ''}" if p is not None else "")
            writer.writerow(row)
        writer.writerow(
            ["detected"] + [("yes" if v.detected else "no") for v in self.versions]
        )
        return buf.getvalue()


RunScores = Mapping[str, np.ndarray]


def _pool(runs: Sequence[RunScores]) -> dict[str, np.ndarray]:
    if not runs:
        raise ValueError("no runs supplied")
    pooled: dict[str, np.ndarray] = {}
    for tag in MEASURE_TAGS:
        parts = [np.asarray(r[tag], dtype=np.float64) for r in runs if tag in r]
        if parts:
            pooled[tag] = np.concatenate(parts)
    if not pooled:
        raise ValueError("runs carry no scored measures")
    return pooled


def compare_runs(version_runs: Sequence[RunScores], reference_runs: Sequence[RunScores],
                 alpha: float = 0.05) -> tuple[dict[str, float], dict[str, bool], bool]:
    """Per-measure p-values/flags plus the combined detection verdict."""
    vp = _pool(version_runs)
    rp = _pool(reference_runs)
    p_values: dict[str, float] = {}
    flags: dict[str, bool] = {}
    for tag in MEASURE_TAGS:
        if tag not in vp or tag not in rp:
            continue
        _, p = mann_whitney_u(vp[tag], rp[tag])
        p_values[tag] = p
        flags[tag] = bool(p < alpha)
    objective_hit = any(flags.get(t) for t in OBJECTIVE_TAGS)
    metric_hit = any(flags.get(t) for t in METRIC_TAGS)
    return p_values, flags, objective_hit and metric_hit


def detect(version_runs: Mapping[int, Sequence[RunScores]],
           reference_runs: Sequence[RunScores],
           alpha: float = 0.05,
           labels: Mapping[int, str] | None = None,
           categories: Mapping[int, str | None] | None = None,
           reference_id: int = 1) -> DetectionReport:
    """Build the detection matrix for many versions against one reference."""
    report = DetectionReport(alpha=alpha, reference_id=reference_id)
    for version_id in sorted(version_runs):
        p_values, flags, hit = compare_runs(version_runs[version_id], reference_runs, alpha)
        report.versions.append(
            VersionResult(
                version_id=version_id,
                label=(labels or {}).get(version_id, f"v{version_id}"),
                category=(categories or {}).get(version_id),
                p_values=p_values,
                flags=flags,
                detected=hit,
            )
        )
    return report
