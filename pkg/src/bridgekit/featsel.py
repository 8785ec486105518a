"""Attribute scoring and selection.

Two filter metrics (information gain and the chi-squared statistic over the
attribute-by-class contingency table), the 70% rank cutoff rule, a
leave-one-attribute-out wrapper driven by cross-validated recall, and the
union rule that combines both selections.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import NOMINAL, NUMERIC, DataError, Dataset, project
from .discretize import discretize

log = logging.getLogger(__name__)


def entropy(counts: Sequence[float]) -> float:
    """Entropy in bits of a class-count vector; 0·log 0 counts as 0."""
    c = np.asarray(counts, dtype=float)
    if (c < 0).any():
        raise DataError("counts must be non-negative")
    total = c.sum()
    if total <= 0:
        raise DataError("entropy requires at least one positive count")
    p = c[c > 0] / total
    return float(-(p * np.log2(p)).sum())


def info_gain(d: Dataset, attr: str) -> float:
    """Information gained about the class by knowing a nominal attribute.

    MISSING attribute values form their own branch in the weighted term.
    Numeric attributes must be discretized first.
    """
    a = d.attribute(attr)
    if a.kind != NOMINAL:
        raise DataError(f"info_gain requires a nominal attribute, got {attr!r}")
    y = d.class_column
    w = d.weights
    col = d.column(attr)
    known_y = y >= 0
    total_w = w[known_y].sum()
    if total_w <= 0:
        raise DataError("no class-labelled instances")

    n_classes = d.class_attribute.arity
    parent = np.bincount(y[known_y], weights=w[known_y], minlength=n_classes)
    gain = entropy(parent)
    # branch index: attribute value, with MISSING as an extra trailing branch
    branch = np.where(col >= 0, col, a.arity)[known_y]
    counts = np.bincount(branch * n_classes + y[known_y], weights=w[known_y],
                         minlength=(a.arity + 1) * n_classes).reshape(a.arity + 1, n_classes)
    for row in counts:
        row_w = row.sum()
        if row_w > 0:
            gain -= (row_w / total_w) * entropy(row)
    return max(float(gain), 0.0)


@dataclass(frozen=True)
class ContingencyTable:
    """Observed and expected counts over attribute values (rows) by class
    (columns); empty rows and columns are dropped on construction."""

    observed: np.ndarray
    expected: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    @classmethod
    def from_counts(cls, counts: np.ndarray, row_labels: Sequence[str],
                    col_labels: Sequence[str]) -> "ContingencyTable":
        counts = np.asarray(counts, dtype=float)
        if (counts < 0).any():
            raise DataError("observed counts must be non-negative")
        keep_rows = counts.sum(axis=1) > 0
        keep_cols = counts.sum(axis=0) > 0
        obs = counts[np.ix_(keep_rows, keep_cols)]
        total = obs.sum()
        if total > 0:
            exp = np.outer(obs.sum(axis=1), obs.sum(axis=0)) / total
        else:
            exp = obs.copy()
        return cls(obs, exp,
                   tuple(l for l, k in zip(row_labels, keep_rows) if k),
                   tuple(l for l, k in zip(col_labels, keep_cols) if k))

    def statistic(self) -> float:
        """Sum of squared observed-minus-expected deviations over expected."""
        if self.observed.size == 0:
            return 0.0
        dev = self.observed - self.expected
        return float((dev * dev / self.expected).sum())


def contingency_table(d: Dataset, attr: str) -> ContingencyTable:
    """Attribute-by-class weighted counts; MISSING values are excluded."""
    a = d.attribute(attr)
    if a.kind != NOMINAL:
        raise DataError(f"contingency_table requires a nominal attribute, got {attr!r}")
    col = d.column(attr)
    y = d.class_column
    w = d.weights
    ok = (col >= 0) & (y >= 0)
    n_classes = d.class_attribute.arity
    counts = np.bincount(col[ok] * n_classes + y[ok], weights=w[ok],
                         minlength=a.arity * n_classes).reshape(a.arity, n_classes)
    return ContingencyTable.from_counts(counts, a.values, d.classes)


def chi_squared(d: Dataset, attr: str) -> float:
    """Chi-squared statistic between a nominal attribute and the class.

    Degenerate tables (a single attribute level or a single class after
    dropping empty rows/columns) score 0 with a warning.
    """
    table = contingency_table(d, attr)
    if len(table.row_labels) < 2 or len(table.col_labels) < 2:
        log.warning("chi_squared(%s): degenerate table, scoring 0", attr)
        return 0.0
    return table.statistic()


@dataclass(frozen=True)
class AttributeScore:
    attribute: str
    score: float
    metric: str
    kept: bool = True

    def __post_init__(self):
        if self.score < 0:
            raise DataError("attribute scores are non-negative")


#: Keep attribute i (third place onward) only while score_i >= CUTOFF * score_{i-1}.
RANK_CUTOFF = 0.70


def rank_attributes(d: Dataset, metric: str = "chi2") -> list[AttributeScore]:
    """Score and rank every feature, flagging which survive the cutoff rule.

    Numeric features are discretized (MDL) before scoring. Scores sort
    descending with ties broken by attribute name. The two highest-scoring
    attributes are always kept; from the third on, an attribute scoring
    below 70% of its predecessor is dropped together with everything below.
    """
    if metric not in ("chi2", "infogain"):
        raise DataError(f"unknown metric {metric!r}")
    features = d.feature_names()
    if not features:
        raise DataError("ranking requires at least one feature")

    prepared = d
    for name in features:
        if prepared.attribute(name).kind == NUMERIC:
            prepared = discretize(prepared, name)

    scorer = chi_squared if metric == "chi2" else info_gain
    scored = sorted(((name, scorer(prepared, name)) for name in features),
                    key=lambda t: (-t[1], t[0]))

    result = []
    dropped = False
    for rank, (name, score) in enumerate(scored):
        if rank >= 2 and not dropped and score < RANK_CUTOFF * scored[rank - 1][1]:
            dropped = True
        result.append(AttributeScore(name, score, metric, kept=not dropped))
    return result


@dataclass(frozen=True)
class LooResult:
    """Leave-one-attribute-out impacts, in percentage points of CV recall."""

    baseline_recall: float
    baseline_precision: float
    recall_impact: dict[str, float]
    precision_impact: dict[str, float]
    essential: tuple[str, ...]
    threshold: float
    folds_used: int


def leave_one_out_selection(d: Dataset, spec, threshold: float = 1.0,
                            k: int = 10, seed: int = 0) -> LooResult:
    """Mark features whose removal costs more than ``threshold`` recall points.

    Baseline is k-fold cross-validated weighted recall with all features; each
    feature is then dropped in turn and the fold assignment reused, so impacts
    are comparable and reproducible. Precision impacts are reported alongside
    but do not drive the essential/removable decision. Datasets too small for
    ``k`` folds of at least 10 instances fall back to leave-one-out CV.
    """
    from .evaluate import cross_validate  # local import to avoid a module cycle

    features = d.feature_names()
    if not features:
        raise DataError("leave-one-out selection requires at least one feature")
    if len(d) // k < 10:
        log.warning("dataset too small for %d-fold CV; falling back to leave-one-out", k)
        k = len(d)

    base = cross_validate(d, spec, k=k, seed=seed)
    recall_impact: dict[str, float] = {}
    precision_impact: dict[str, float] = {}
    for name in features:
        rest = [f for f in features if f != name]
        report = cross_validate(project(d, rest), spec, k=k, seed=seed)
        recall_impact[name] = 100.0 * (base.weighted_recall - report.weighted_recall)
        precision_impact[name] = 100.0 * (base.weighted_precision - report.weighted_precision)

    essential = tuple(f for f in features if recall_impact[f] > threshold)
    return LooResult(100.0 * base.weighted_recall, 100.0 * base.weighted_precision,
                     recall_impact, precision_impact, essential, threshold, k)


def combine_selections(ranked: Sequence[AttributeScore], loo: LooResult) -> list[str]:
    """Union of cutoff-kept attributes and leave-one-out-essential attributes.

    An attribute with measurable removal impact is included even when the
    ranking cutoff discarded it, and vice versa. Order follows the ranking,
    with essential-only attributes appended in rank order.
    """
    names = {s.attribute for s in ranked}
    for f in loo.recall_impact:
        if f not in names:
            raise DataError(f"leave-one-out result covers unknown attribute {f!r}")
    chosen = []
    essential = set(loo.essential)
    for s in ranked:
        if s.kept or s.attribute in essential:
            chosen.append(s.attribute)
    return chosen
