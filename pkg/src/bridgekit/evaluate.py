"""Cross-validation, metrics, resampling, and the experiment protocols.

Weighted precision/recall use support-proportional averaging; weighted
recall therefore equals overall accuracy (trace over total) identically.
Resampling, when requested during cross-validation, is applied inside each
training fold only, so reported metrics reflect the true test distribution;
``resample_whole`` reproduces the alternative reading where the entire
dataset is resampled before folding.
"""

from __future__ import annotations

import configparser
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classify import ClassifierSpec, fit
from .data import DataError, Dataset, concat, partition_by, project
from .io import atomic_write_text, format_number

log = logging.getLogger(__name__)


# -- confusion matrices and metrics -----------------------------------------


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square counts matrix: rows index the actual class, columns the predicted."""

    classes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        if c.shape != (len(self.classes), len(self.classes)):
            raise DataError("confusion matrix must be square over the class values")
        if (c < 0).any():
            raise DataError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", c)

    @classmethod
    def empty(cls, classes: Sequence[str]) -> "ConfusionMatrix":
        n = len(classes)
        return cls(tuple(classes), np.zeros((n, n)))

    @classmethod
    def from_predictions(cls, classes: Sequence[str], actual: np.ndarray,
                         predicted: np.ndarray, weights: np.ndarray | None = None) -> "ConfusionMatrix":
        n = len(classes)
        w = np.ones(len(actual)) if weights is None else np.asarray(weights, dtype=float)
        counts = np.bincount(np.asarray(actual) * n + np.asarray(predicted), weights=w,
                             minlength=n * n).reshape(n, n)
        return cls(tuple(classes), counts)

    def merged(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.classes != self.classes:
            raise DataError("cannot merge confusion matrices over different classes")
        return ConfusionMatrix(self.classes, self.counts + other.counts)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total


def precision_recall(cm: ConfusionMatrix,
                     supports: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Per-class precision/recall plus support-weighted averages.

    Per-class recall is the diagonal over the row sum; precision is the
    diagonal over the column sum and counts as 0 for classes never
    predicted. The weighted recall is computed as trace/total, which equals
    the support-weighted mean of per-class recalls identically.
    """
    counts = cm.counts
    if counts.sum() <= 0:
        raise DataError("empty confusion matrix")
    diag = np.diag(counts)
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        recall = np.where(row > 0, diag / np.maximum(row, 1e-300), 0.0)
        precision = np.where(col > 0, diag / np.maximum(col, 1e-300), 0.0)
    sup = row if supports is None else np.asarray(supports, dtype=float)
    total = sup.sum()
    weighted_precision = float((sup * precision).sum() / total)
    if supports is None:
        weighted_recall = float(np.trace(counts) / counts.sum())
    else:
        weighted_recall = float((sup * recall).sum() / total)
    return precision, recall, weighted_precision, weighted_recall


@dataclass(frozen=True)
class EvalReport:
    """Everything needed to reconstruct a table row: per-class and weighted
    metrics, the confusion matrix, and the experiment coordinates."""

    confusion: ConfusionMatrix
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    weighted_precision: float
    weighted_recall: float
    spec_description: str
    seed: int
    folds: int
    attributes: tuple[str, ...]
    protocol: str = "cross-validation"

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix, spec_description: str, seed: int,
                       folds: int, attributes: Sequence[str],
                       protocol: str = "cross-validation") -> "EvalReport":
        precision, recall, wp, wr = precision_recall(cm)
        return cls(cm, tuple(float(p) for p in precision), tuple(float(r) for r in recall),
                   wp, wr, spec_description, seed, folds, tuple(attributes), protocol)

    def to_dict(self) -> dict:
        return {
            "classes": list(self.confusion.classes),
            "confusion": self.confusion.counts.tolist(),
            "per_class_precision": list(self.per_class_precision),
            "per_class_recall": list(self.per_class_recall),
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "spec": self.spec_description,
            "seed": self.seed,
            "folds": self.folds,
            "attributes": list(self.attributes),
            "protocol": self.protocol,
        }


# -- folding and cross-validation --------------------------------------------


def stratified_folds(d: Dataset, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """Disjoint index sets covering the dataset, class-balanced within one.

    Per-class counts across folds differ by at most one: each class's
    (shuffled) members are dealt round-robin, continuing from where the
    previous class stopped so fold sizes stay level. Deterministic given the
    seed.
    """
    if k < 2:
        raise DataError("cross-validation needs at least 2 folds")
    if k > len(d):
        raise DataError(f"cannot make {k} folds from {len(d)} instances")
    y = d.class_column
    if (y < 0).any():
        raise DataError("stratified folding requires a class label on every instance")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(d), dtype=np.int64)
    cursor = 0
    for c in range(d.class_attribute.arity):
        members = np.nonzero(y == c)[0]
        if len(members) == 0:
            continue
        members = members[rng.permutation(len(members))]
        assignment[members] = (cursor + np.arange(len(members))) % k
        cursor = (cursor + len(members)) % k
    return [np.nonzero(assignment == f)[0] for f in range(k)]


def _fold_seed(seed: int, fold: int) -> int:
    return seed * 100003 + fold


def cross_validate(d: Dataset, spec: ClassifierSpec, k: int = 10, seed: int = 0,
                   bias: float | None = None, size_pct: float = 100.0,
                   resample_whole: bool = False) -> EvalReport:
    """k-fold cross-validation; every instance is tested exactly once.

    With ``bias`` set, each training fold is resampled toward a more uniform
    class balance before fitting; test folds are never resampled unless
    ``resample_whole`` asks for the whole dataset to be resampled up front.
    """
    protocol = "cross-validation"
    if bias is not None and resample_whole:
        d = resample(d, bias, size_pct=size_pct, seed=seed)
        bias = None
        protocol = "cross-validation (whole dataset resampled)"
    folds = stratified_folds(d, k=k, seed=seed)
    classes = d.classes
    cm = ConfusionMatrix.empty(classes)
    y = d.class_column
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([folds[j] for j in range(k) if j != i])
        train = d.select(train_idx)
        if bias is not None:
            train = resample(train, bias, size_pct=size_pct, seed=_fold_seed(seed, i))
        model = fit(spec, train)
        test = d.select(test_idx)
        predicted = model.predict_indices(test)
        cm = cm.merged(ConfusionMatrix.from_predictions(classes, y[test_idx], predicted))
    if abs(cm.total - len(d)) > 1e-6:
        raise AssertionError("cross-validation did not test every instance exactly once")
    return EvalReport.from_confusion(cm, spec.describe(), seed, k, d.feature_names(),
                                     protocol)


def train_test_report(train: Dataset, test: Dataset, spec: ClassifierSpec,
                      seed: int = 0, protocol: str = "train/test") -> EvalReport:
    model = fit(spec, train)
    predicted = model.predict_indices(test)
    cm = ConfusionMatrix.from_predictions(train.classes, test.class_column, predicted)
    return EvalReport.from_confusion(cm, spec.describe(), seed, 1, train.feature_names(),
                                     protocol)


# -- resampling ---------------------------------------------------------------


def resample(d: Dataset, bias: float, size_pct: float = 100.0, seed: int = 0) -> Dataset:
    """Bootstrap sample whose class balance is pulled toward uniform.

    Class ``c`` is drawn with probability ``(1-bias)*p_c + bias/C`` (``p_c``
    the empirical proportion over classes actually present, ``C`` their
    count), then an instance of that class is drawn uniformly. Draws
    ``ceil(size_pct * |d| / 100)`` instances with replacement;
    deterministic given the seed.
    """
    if not (0.0 <= bias <= 1.0):
        raise DataError("bias must lie in [0, 1]")
    if len(d) == 0:
        raise DataError("cannot resample an empty dataset")
    y = d.class_column
    labelled = np.nonzero(y >= 0)[0]
    if len(labelled) < len(d):
        log.warning("resample: ignoring %d instances with missing class", len(d) - len(labelled))
    if len(labelled) == 0:
        raise DataError("cannot resample with no class labels")
    n_draw = math.ceil(size_pct * len(d) / 100.0)
    rng = np.random.default_rng(seed)

    members = [labelled[y[labelled] == c] for c in range(d.class_attribute.arity)]
    present = [c for c, m in enumerate(members) if len(m) > 0]
    counts = np.array([len(members[c]) for c in present], dtype=float)
    p = counts / counts.sum()
    target = (1.0 - bias) * p + bias / len(present)
    target = target / target.sum()

    drawn_class = rng.choice(len(present), size=n_draw, p=target)
    chosen = np.empty(n_draw, dtype=np.int64)
    for ci, c in enumerate(present):
        mask = drawn_class == ci
        kcount = int(mask.sum())
        if kcount:
            chosen[mask] = members[c][rng.integers(0, len(members[c]), size=kcount)]
    return d.select(chosen)


# -- experiment protocols -------------------------------------------------------


@dataclass(frozen=True)
class StateSummary:
    reports: dict[str, EvalReport]
    mean_recall: float
    std_recall: float
    mean_precision: float
    std_precision: float

    @classmethod
    def from_reports(cls, reports: Mapping[str, EvalReport]) -> "StateSummary":
        recalls = np.array([r.weighted_recall for r in reports.values()])
        precisions = np.array([r.weighted_precision for r in reports.values()])
        return cls(dict(reports), float(recalls.mean()), float(recalls.std(ddof=0)),
                   float(precisions.mean()), float(precisions.std(ddof=0)))


def hold_one_state_out(d: Dataset, spec: ClassifierSpec, state_attr: str = "state",
                       seed: int = 0) -> StateSummary:
    """Train on all states but one, test on the held-out one; one report per state."""
    parts = partition_by(d, state_attr)
    if parts.missing_count:
        log.warning("hold_one_state_out: %d instances with missing %s skipped",
                    parts.missing_count, state_attr)
    states = sorted(parts.parts)
    if len(states) < 2:
        raise DataError("hold-one-state-out needs at least two states")
    reports = {}
    for state in states:
        train = concat([parts.parts[s] for s in states if s != state])
        reports[state] = train_test_report(train, parts.parts[state], spec, seed=seed,
                                           protocol="hold-one-state-out")
    return StateSummary.from_reports(reports)


@dataclass(frozen=True)
class GridCell:
    """One experiment configuration: an attribute set, a model spec, and
    optional resampling, compared against an optional named baseline."""

    name: str
    attrs: tuple[str, ...]
    spec: ClassifierSpec
    bias: float | None = None
    k: int = 10
    seed: int = 0
    baseline: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    cells: tuple[GridCell, ...]
    reports: dict[str, dict[str, EvalReport]]  # cell -> state -> report
    deltas: dict[str, dict[str, tuple[float, float]]]  # cell -> state -> (d_recall, d_precision) in points

    def summary_dict(self) -> dict:
        return {
            "cells": {
                cell.name: {
                    "attrs": list(cell.attrs),
                    "spec": cell.spec.describe(),
                    "bias": cell.bias,
                    "k": cell.k,
                    "seed": cell.seed,
                    "baseline": cell.baseline,
                    "states": {s: r.to_dict() for s, r in self.reports[cell.name].items()},
                }
                for cell in self.cells
            },
            "deltas": {
                name: {s: {"recall": dr, "precision": dp}
                       for s, (dr, dp) in by_state.items()}
                for name, by_state in self.deltas.items()
            },
        }


def per_state_experiment(d: Dataset, cells: Sequence[GridCell],
                         state_attr: str = "state") -> ExperimentResult:
    """Run every grid cell as per-state cross-validation and difference the
    named baselines; delta of a configuration against itself is all zeros."""
    feature_set = set(d.feature_names())
    names = set()
    for cell in cells:
        if cell.name in names:
            raise DataError(f"duplicate grid cell name {cell.name!r}")
        names.add(cell.name)
        for a in cell.attrs:
            if a not in feature_set:
                raise DataError(f"grid cell {cell.name!r} names unknown attribute {a!r}")
    for cell in cells:
        if cell.baseline is not None and cell.baseline not in names:
            raise DataError(f"grid cell {cell.name!r} references unknown baseline "
                            f"{cell.baseline!r}")

    parts = partition_by(d, state_attr).parts
    states = sorted(parts)
    reports: dict[str, dict[str, EvalReport]] = {}
    for cell in cells:
        by_state = {}
        for state in states:
            ds = project(parts[state], cell.attrs)
            by_state[state] = cross_validate(ds, cell.spec, k=cell.k, seed=cell.seed,
                                             bias=cell.bias)
        reports[cell.name] = by_state

    deltas: dict[str, dict[str, tuple[float, float]]] = {}
    for cell in cells:
        if cell.baseline is None:
            continue
        base = reports[cell.baseline]
        deltas[cell.name] = {
            s: (100.0 * (reports[cell.name][s].weighted_recall - base[s].weighted_recall),
                100.0 * (reports[cell.name][s].weighted_precision - base[s].weighted_precision))
            for s in states
        }
    return ExperimentResult(tuple(cells), reports, deltas)


# -- external-parameter correlation -------------------------------------------


CLIMATE_PARAMS = ("temp", "humidity", "rain", "snow")


@dataclass(frozen=True)
class ClimateTable:
    """Average annual temperature, humidity, rain, and snowfall per state."""

    rows: dict[str, dict[str, float]]

    @classmethod
    def from_csv(cls, path: str | Path) -> "ClimateTable":
        rows = {}
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = [h.strip() for h in lines[0].split(",")]
        expected = ["state", *CLIMATE_PARAMS]
        if header != expected:
            raise DataError(f"climate table header must be {','.join(expected)}")
        for line in lines[1:]:
            if not line.strip():
                continue
            cells = [c.strip() for c in line.split(",")]
            rows[cells[0]] = {p: float(v) for p, v in zip(CLIMATE_PARAMS, cells[1:])}
        return cls(rows)


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Pearson correlation; None when either side has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xd = x - x.mean()
    yd = y - y.mean()
    vx = float((xd * xd).sum())
    vy = float((yd * yd).sum())
    if vx <= 0 or vy <= 0:
        return None
    return float((xd * yd).sum() / math.sqrt(vx * vy))


def correlate_external(recalls: Mapping[str, float], climate: ClimateTable) -> dict[str, float | None]:
    """Pearson correlation of per-state recall against each climate column."""
    matched = sorted(set(recalls) & set(climate.rows))
    if len(matched) < 3:
        raise DataError("correlation requires at least 3 matched states")
    rec = np.array([recalls[s] for s in matched], dtype=float)
    if not np.isfinite(rec).all():
        raise DataError("recall vector contains non-finite values")
    out: dict[str, float | None] = {}
    for param in CLIMATE_PARAMS:
        col = np.array([climate.rows[s][param] for s in matched], dtype=float)
        if not np.isfinite(col).all():
            raise DataError(f"climate column {param!r} contains non-finite values")
        out[param] = pearson(rec, col)
    return out


# -- experiment grid files and report writers ---------------------------------


_CELL_KEYS = {"attrs", "spec", "bias", "k", "seed", "baseline",
              "confidence", "min_objects", "subtree_raising", "reduced_error",
              "folds", "pruning", "max_parents", "alpha"}


def parse_grid(text: str) -> list[GridCell]:
    """Parse the declarative experiment grid (INI sections, one per cell)."""
    parser = configparser.ConfigParser()
    parser.read_string(text)
    cells = []
    for section in parser.sections():
        raw = dict(parser[section])
        unknown = set(raw) - _CELL_KEYS
        if unknown:
            raise DataError(f"grid cell {section!r} has unknown keys: {sorted(unknown)}")
        if "attrs" not in raw or "spec" not in raw:
            raise DataError(f"grid cell {section!r} needs 'attrs' and 'spec'")
        params = {}
        kind = raw["spec"].strip()
        for key in ("confidence", "alpha"):
            if key in raw:
                params[key] = float(raw[key])
        for key in ("min_objects", "folds", "max_parents"):
            if key in raw:
                params[key] = int(raw[key])
        for key in ("subtree_raising", "reduced_error", "pruning"):
            if key in raw:
                params[key] = raw[key].strip().lower() in ("1", "true", "yes", "on")
        seed = int(raw.get("seed", "0"))
        cells.append(GridCell(
            name=section,
            attrs=tuple(a.strip() for a in raw["attrs"].split(",") if a.strip()),
            spec=ClassifierSpec(kind, params, seed=seed),
            bias=float(raw["bias"]) if "bias" in raw else None,
            k=int(raw.get("k", "10")),
            seed=seed,
            baseline=raw.get("baseline", "").strip() or None,
        ))
    if not cells:
        raise DataError("experiment grid defines no cells")
    return cells


def _fmt(x: float) -> str:
    return format_number(round(float(x), 6))


def write_experiment_reports(result: ExperimentResult, outdir: str | Path) -> list[Path]:
    """Write absolute.csv, deltas.csv, per_class.csv and summary.json."""
    outdir = Path(outdir)
    states = sorted({s for by_state in result.reports.values() for s in by_state})
    cell_names = [c.name for c in result.cells]

    lines = ["state," + ",".join(f"{c}_recall,{c}_precision" for c in cell_names)]
    for s in states:
        cells = []
        for c in cell_names:
            r = result.reports[c].get(s)
            cells.append(f"{_fmt(100 * r.weighted_recall)},{_fmt(100 * r.weighted_precision)}"
                         if r else ",")
        lines.append(f"{s}," + ",".join(cells))
    absolute = outdir / "absolute.csv"
    atomic_write_text(absolute, "\n".join(lines) + "\n")
    written = [absolute]

    if result.deltas:
        delta_cells = [c for c in result.cells if c.name in result.deltas]
        lines = ["state," + ",".join(
            f"{c.name}_vs_{c.baseline}_recall_delta,{c.name}_vs_{c.baseline}_precision_delta"
            for c in delta_cells)]
        for s in states:
            cells = []
            for c in delta_cells:
                dr, dp = result.deltas[c.name][s]
                cells.append(f"{_fmt(dr)},{_fmt(dp)}")
            lines.append(f"{s}," + ",".join(cells))
        deltas = outdir / "deltas.csv"
        atomic_write_text(deltas, "\n".join(lines) + "\n")
        written.append(deltas)

    lines = ["cell,state,class,recall,support"]
    for c in cell_names:
        for s in states:
            r = result.reports[c].get(s)
            if r is None:
                continue
            supports = r.confusion.counts.sum(axis=1)
            for ci, cls_name in enumerate(r.confusion.classes):
                if supports[ci] > 0:
                    lines.append(f"{c},{s},{cls_name},{_fmt(100 * r.per_class_recall[ci])},"
                                 f"{_fmt(supports[ci])}")
    per_class = outdir / "per_class.csv"
    atomic_write_text(per_class, "\n".join(lines) + "\n")
    written.append(per_class)

    summary = outdir / "summary.json"
    atomic_write_text(summary, json.dumps(result.summary_dict(), sort_keys=True, indent=2) + "\n")
    written.append(summary)
    return written
