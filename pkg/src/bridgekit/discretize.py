"""Supervised discretization of numeric attributes.

Default method is recursive entropy minimization with the MDL stopping
criterion (Fayyad & Irani 1993); equal-frequency binning is available as a
fallback. Downstream consumers that require nominal inputs (chi-squared
scoring, the Bayesian network, OneR) discretize through this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import xlogy

from .data import NOMINAL, NUMERIC, AttributeSchema, DataError, Dataset, ROLE_FEATURE

_LOG2 = math.log(2.0)


def _entropy_bits(counts: np.ndarray) -> float:
    """Entropy in bits of a count vector; 0·log 0 treated as 0."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    return float(math.log(total) - xlogy(counts, counts).sum() / total) / _LOG2


def _row_entropy(count_rows: np.ndarray) -> np.ndarray:
    """Entropy in bits of each row of a counts matrix."""
    totals = count_rows.sum(axis=1)
    safe = np.maximum(totals, 1e-300)
    s = xlogy(count_rows, count_rows).sum(axis=1)
    return np.where(totals > 0, (np.log(safe) - s / safe) / _LOG2, 0.0)


def _weighted_child_entropy(count_rows: np.ndarray) -> float:
    """Sum over rows of (row total) * (row entropy), in bits."""
    totals = count_rows.sum(axis=1)
    return float(xlogy(totals, totals).sum() - xlogy(count_rows, count_rows).sum()) / _LOG2


def mdl_cut_points(values: np.ndarray, classes: np.ndarray, n_classes: int) -> list[float]:
    """Cut points chosen by recursive entropy splitting with the MDL test.

    ``values`` and ``classes`` must be missing-free. Candidate cuts are the
    midpoints between adjacent distinct values; a cut is accepted when the
    information gain exceeds the MDL coding cost, and accepted segments are
    split recursively. Returns strictly increasing cut points.
    """
    order = np.argsort(values, kind="stable")
    v = np.asarray(values, dtype=float)[order]
    y = np.asarray(classes)[order]
    n = len(v)
    if n == 0:
        return []
    # one-hot class counts prefix-summed once; segments reuse it
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), y] = 1.0
    prefix = np.cumsum(onehot, axis=0)

    cuts: list[float] = []

    def seg_counts(lo: int, hi: int) -> np.ndarray:
        c = prefix[hi - 1].copy()
        if lo > 0:
            c -= prefix[lo - 1]
        return c

    def recurse(lo: int, hi: int) -> None:
        total = seg_counts(lo, hi)
        n_seg = hi - lo
        if n_seg < 2:
            return
        ent_s = _entropy_bits(total)
        if ent_s == 0.0:
            return
        # boundaries between distinct adjacent values
        bpos = lo + 1 + np.nonzero(v[lo + 1:hi] > v[lo:hi - 1])[0]
        if len(bpos) == 0:
            return
        left = prefix[bpos - 1] - (prefix[lo - 1] if lo > 0 else 0.0)
        right = total - left
        nl = left.sum(axis=1)
        nr = right.sum(axis=1)
        ent_l = _row_entropy(left)
        ent_r = _row_entropy(right)
        gains = ent_s - (nl * ent_l + nr * ent_r) / n_seg
        best = int(np.argmax(gains))
        gain = float(gains[best])

        k = int((total > 0).sum())
        k1 = int((left[best] > 0).sum())
        k2 = int((right[best] > 0).sum())
        e1 = float(ent_l[best])
        e2 = float(ent_r[best])
        delta = math.log2(3.0**k - 2.0) - (k * ent_s - k1 * e1 - k2 * e2)
        threshold = (math.log2(n_seg - 1) + delta) / n_seg
        if gain <= threshold:
            return
        pos = int(bpos[best])
        cuts.append((v[pos - 1] + v[pos]) / 2.0)
        recurse(lo, pos)
        recurse(pos, hi)

    recurse(0, n)
    return sorted(cuts)


def equal_frequency_cut_points(values: np.ndarray, bins: int = 10) -> list[float]:
    """Cut points placing roughly equal counts per bin; degenerate bins merge."""
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    if n == 0 or bins < 2:
        return []
    cuts = []
    for b in range(1, bins):
        i = int(round(b * n / bins))
        if 0 < i < n and v[i - 1] < v[i]:
            cuts.append((v[i - 1] + v[i]) / 2.0)
    return sorted(set(cuts))


def bin_labels(cuts: Sequence[float]) -> tuple[str, ...]:
    """Interval labels for the bins delimited by ``cuts``.

    Bounds are separated by ``..`` (commas are reserved by the schema
    sidecar format), e.g. ``(2.0..5.0]``.
    """
    if not cuts:
        return ("(-inf..inf)",)
    edges = ["-inf"] + [repr(float(c)) for c in cuts] + ["inf"]
    labels = []
    for i in range(len(edges) - 1):
        close = "]" if i < len(edges) - 2 else ")"
        labels.append(f"({edges[i]}..{edges[i + 1]}{close}")
    return tuple(labels)


def assign_bins(column: np.ndarray, cuts: Sequence[float]) -> np.ndarray:
    """Map a numeric column to bin indices; NaN maps to -1 (MISSING)."""
    out = np.full(len(column), -1, dtype=np.int32)
    known = ~np.isnan(column)
    out[known] = np.searchsorted(np.asarray(cuts, dtype=float), column[known], side="left")
    return out


def discretize(d: Dataset, attr: str, method: str = "mdl", bins: int = 10) -> Dataset:
    """Replace a numeric attribute with nominal interval bins.

    MDL binning is supervised on the dataset's class labels and may yield a
    single bin when no cut is justified. MISSING values stay MISSING. The
    mapping is deterministic given the dataset.
    """
    a = d.attribute(attr)
    if a.kind != NUMERIC:
        raise DataError(f"discretize requires a numeric attribute, got {attr!r}")
    col = d.column(attr)
    known = ~np.isnan(col)
    if not known.any():
        raise DataError(f"cannot discretize {attr!r}: all values are MISSING")
    cuts = compute_cut_points(d, attr, method=method, bins=bins)
    new_attr = AttributeSchema(attr, NOMINAL, bin_labels(cuts), a.role)
    return d.replace_column(attr, new_attr, assign_bins(col, cuts))


def compute_cut_points(d: Dataset, attr: str, method: str = "mdl", bins: int = 10) -> list[float]:
    col = d.column(attr)
    known = ~np.isnan(col)
    if method == "mdl":
        y = d.class_column
        usable = known & (y >= 0)
        return mdl_cut_points(col[usable], y[usable], d.class_attribute.arity)
    if method == "equal_freq":
        return equal_frequency_cut_points(col[known], bins=bins)
    raise DataError(f"unknown discretization method {method!r}")


@dataclass(frozen=True)
class Discretizer:
    """Fitted cut points for a set of numeric attributes.

    Fit on training data only; apply to any dataset or single value sharing
    the schema. Attributes absent from ``cuts`` pass through untouched.
    """

    cuts: dict[str, tuple[float, ...]]

    @classmethod
    def fit(cls, d: Dataset, attrs: Iterable[str] | None = None,
            method: str = "mdl", bins: int = 10) -> "Discretizer":
        if attrs is None:
            attrs = [a.name for a in d.schema if a.role == ROLE_FEATURE and a.kind == NUMERIC]
        cuts = {}
        for name in attrs:
            if d.attribute(name).kind != NUMERIC:
                raise DataError(f"{name!r} is not numeric")
            col = d.column(name)
            if np.isnan(col).all():
                cuts[name] = ()
                continue
            cuts[name] = tuple(compute_cut_points(d, name, method=method, bins=bins))
        return cls(cuts)

    def transform(self, d: Dataset) -> Dataset:
        out = d
        for name, cutpts in self.cuts.items():
            a = out.attribute(name)
            if a.kind != NUMERIC:
                raise DataError(f"{name!r} already nominal; refusing to re-bin")
            new_attr = AttributeSchema(name, NOMINAL, bin_labels(cutpts), a.role)
            out = out.replace_column(name, new_attr, assign_bins(out.column(name), cutpts))
        return out

    def transform_value(self, attr: str, value: float) -> int:
        """Bin index for one known numeric value."""
        cutpts = self.cuts[attr]
        return int(np.searchsorted(np.asarray(cutpts, dtype=float), value, side="left"))

    def binned_schema(self, attr: str, role: str = ROLE_FEATURE) -> AttributeSchema:
        return AttributeSchema(attr, NOMINAL, bin_labels(self.cuts[attr]), role)
