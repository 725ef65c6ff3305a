"""Rank-correlation statistics and the cross-metric correlation report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ParameterError, UndefinedCorrelationError, ValidationError

SACO_METRIC = "saco"
INCUMBENT_METRICS = ("auc", "aopc", "lodds", "comp")
# True where a larger score means a better explanation.
DEFAULT_ORIENTATION = {
    "saco": True,
    "auc": False,
    "aopc": True,
    "lodds": False,
    "comp": False,
}


def _validate_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ParameterError(f"inputs must be equal-length vectors, got {a.shape} / {b.shape}")
    if a.size < 2:
        raise ParameterError("need at least 2 observations")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError("correlation inputs contain non-finite values")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedCorrelationError("rank correlation is undefined for constant input")
    return a, b


def kendall_tau(a, b) -> float:
    """Kendall tau-b with tie correction."""
    a, b = _validate_pair(a, b)
    counts = _kernels.kendall_counts(a, b)
    tau = _kernels.tau_b_from_counts(*counts, n=a.size)
    if math.isnan(tau):
        raise UndefinedCorrelationError("tau-b denominator is zero")
    return float(tau)


def average_ranks(values) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(a, b) -> float:
    """Spearman rho: Pearson correlation of average ranks."""
    a, b = _validate_pair(a, b)
    ra = average_ranks(a)
    rb = average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = math.sqrt(float(np.sum(ra * ra)) * float(np.sum(rb * rb)))
    if denom == 0.0:
        raise UndefinedCorrelationError("rank variance is zero")
    return float(np.sum(ra * rb) / denom)


@dataclass
class ScoreMatrix:
    """Per-sample scores, one column per metric."""

    sample_ids: list
    metrics: list
    values: np.ndarray  # (samples, metrics)
    higher_better: dict = field(default_factory=lambda: dict(DEFAULT_ORIENTATION))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.sample_ids), len(self.metrics)):
            raise ValidationError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.sample_ids)} samples x {len(self.metrics)} metrics"
            )
        if len(set(self.metrics)) != len(self.metrics):
            raise ValidationError("metric names must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("score matrix has missing or non-finite cells")
        for name in self.metrics:
            if name not in self.higher_better:
                raise ValidationError(f"no orientation declared for metric {name!r}")

    def oriented_column(self, metric) -> np.ndarray:
        """Column with lower-is-better metrics sign-flipped."""
        col = self.values[:, self.metrics.index(metric)]
        return col if self.higher_better[metric] else -col


@dataclass
class CorrelationReport:
    """Correlations of the coefficient against each incumbent metric, plus
    the mean pairwise correlation among the incumbents themselves."""

    saco_vs: dict  # incumbent -> {"spearman": float|None, "kendall": float|None}
    incumbent_pairs: list  # (a, b, spearman|None, kendall|None)
    incumbent_mean_spearman: float | None
    incumbent_mean_kendall: float | None
    num_samples: int

    def rows(self):
        out = []
        for metric, stats in self.saco_vs.items():
            out.append((SACO_METRIC, metric, stats["spearman"], stats["kendall"]))
        out.extend(self.incumbent_pairs)
        return out


def _safe_corr(fn, a, b):
    try:
        return fn(a, b)
    except UndefinedCorrelationError:
        return None


def correlation_report(scores: ScoreMatrix) -> CorrelationReport:
    if len(scores.sample_ids) < 2:
        raise ParameterError("need at least 2 samples to correlate")
    if SACO_METRIC not in scores.metrics:
        raise ParameterError(f"score matrix is missing the {SACO_METRIC!r} column")
    incumbents = [m for m in scores.metrics if m != SACO_METRIC]
    saco_col = scores.oriented_column(SACO_METRIC)
    saco_vs = {}
    for metric in incumbents:
        col = scores.oriented_column(metric)
        saco_vs[metric] = {
            "spearman": _safe_corr(spearman_rho, saco_col, col),
            "kendall": _safe_corr(kendall_tau, saco_col, col),
        }
    pairs = []
    sp_vals, kt_vals = [], []
    for i in range(len(incumbents)):
        for j in range(i + 1, len(incumbents)):
            a = scores.oriented_column(incumbents[i])
            b = scores.oriented_column(incumbents[j])
            sp = _safe_corr(spearman_rho, a, b)
            kt = _safe_corr(kendall_tau, a, b)
            pairs.append((incumbents[i], incumbents[j], sp, kt))
            if sp is not None:
                sp_vals.append(sp)
            if kt is not None:
                kt_vals.append(kt)
    return CorrelationReport(
        saco_vs=saco_vs,
        incumbent_pairs=pairs,
        incumbent_mean_spearman=float(np.mean(sp_vals)) if sp_vals else None,
        incumbent_mean_kendall=float(np.mean(kt_vals)) if kt_vals else None,
        num_samples=len(scores.sample_ids),
    )
