"""Confusion metrics, threshold search, run aggregation, explained variance.

Sensitivity, specificity, and Youden's index are computed from strict
threshold classification (positive iff yhat > tau). The threshold search
sweeps midpoints of consecutive unique predictions plus {0, 1}, which
enumerates every achievable labeling of a finite batch exactly.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be non-negative")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    sensitivity: float
    specificity: float
    yi: float
    yi_max: float
    tau_max: float


def confusion(yhat, labels, tau=0.5):
    """Confusion counts under the strict rule: positive iff yhat > tau."""
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(labels)
    if yhat.shape != y.shape:
        raise DataError(
            f"prediction/label shape mismatch: {yhat.shape} vs {y.shape}"
        )
    if yhat.size == 0:
        raise DataError("cannot evaluate an empty batch")
    pred = yhat > tau
    actual = y.astype(bool)
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    tn = int(np.sum(~pred & ~actual))
    fn = int(np.sum(~pred & actual))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def compute_metrics(counts):
    """(sensitivity, specificity, Youden's index) from confusion counts."""
    if counts.tp + counts.fn == 0:
        raise DataError("sensitivity undefined: no positive samples")
    if counts.tn + counts.fp == 0:
        raise DataError("specificity undefined: no negative samples")
    sensitivity = counts.tp / (counts.tp + counts.fn)
    specificity = counts.tn / (counts.tn + counts.fp)
    return sensitivity, specificity, sensitivity + specificity - 1.0


def _threshold_candidates(yhat):
    unique = np.unique(yhat)
    mids = (unique[:-1] + unique[1:]) / 2.0
    return np.unique(np.concatenate([[0.0], mids, [1.0]]))


def youden_max(yhat, labels):
    """Maximum Youden's index over thresholds and its maximizer.

    Candidates are the midpoints of consecutive unique predictions plus
    {0, 1}; ties prefer the smallest threshold.
    """
    yhat = np.asarray(yhat, dtype=np.float64)
    best_yi = -np.inf
    best_tau = None
    for tau in _threshold_candidates(yhat):
        _, _, yi = compute_metrics(confusion(yhat, labels, tau))
        if yi > best_yi:
            best_yi = yi
            best_tau = float(tau)
    return best_yi, best_tau


def evaluate(yhat, labels, tau=0.5):
    """Full per-run report: metrics at tau plus the threshold-search pair."""
    sens, spec, yi = compute_metrics(confusion(yhat, labels, tau))
    yi_max, tau_max = youden_max(yhat, labels)
    return MetricsReport(
        sensitivity=sens, specificity=spec, yi=yi,
        yi_max=yi_max, tau_max=tau_max,
    )


def explained_variance(matrix, components=10):
    """Fraction of total variance in the leading principal components.

    Uses the singular values of the centered matrix; a zero-variance
    matrix trivially has all its variance captured and returns 1.0.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise DataError(f"embedding matrix must be 2-D, got shape {x.shape}")
    if x.shape[0] < 2:
        raise DataError("explained variance needs at least two rows")
    if components < 1:
        raise DataError("components must be >= 1")
    centered = x - x.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    var = s * s
    total = var.sum()
    if total == 0.0:
        return 1.0
    return float(var[:components].sum() / total)


METRIC_FIELDS = ("sensitivity", "specificity", "yi", "yi_max", "tau_max")


def aggregate_runs(reports):
    """Per-metric (mean, population std) over repeated runs."""
    if not reports:
        raise DataError("no runs to aggregate")
    out = {}
    for name in METRIC_FIELDS:
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        if values.min() == values.max():
            # identical runs must report exactly zero spread; np.std can
            # return ~1e-16 here from mean roundoff
            out[name] = (float(values[0]), 0.0)
        else:
            out[name] = (float(values.mean()), float(values.std(ddof=0)))
    return out


def format_mean_std(mean, std, digits=3):
    return f"{mean:.{digits}f}±{std:.{digits}f}"


def save_metrics(path, rows):
    """CSV rows of aggregated metrics.

    Each input row is (model, strategy, aggregate) with aggregate as
    returned by aggregate_runs; metric cells are formatted mean±std.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("model", "strategy") + METRIC_FIELDS)
        for model, strategy, agg in rows:
            writer.writerow(
                [model, strategy]
                + [format_mean_std(*agg[name]) for name in METRIC_FIELDS]
            )


def save_plot_data(path, pairs):
    """CSV of (explained_variance, yi_max) pairs for external plotting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("explained_variance", "yi_max"))
        for ev, yi in pairs:
            writer.writerow([repr(float(ev)), repr(float(yi))])
