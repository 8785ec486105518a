"""Classifier contract shared by every model, plus the OneR baseline.

All trained models expose class-distribution prediction (single instance or
whole dataset), an ``explain`` rendering a human-readable structure, and a
serializable payload. Models are immutable and safe to share across threads;
fitting is deterministic given (spec, dataset, seed).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import tree as _tree
from .data import (
    MISSING,
    NOMINAL,
    NUMERIC,
    AttributeSchema,
    ClassDistribution,
    DataError,
    Dataset,
    Instance,
    SchemaMismatch,
    distribution_from_array,
    schema_fingerprint,
)
from .discretize import Discretizer, assign_bins

log = logging.getLogger(__name__)

KINDS = ("dtree", "bayesnet", "oner")

_PARAM_DEFAULTS: dict[str, dict[str, object]] = {
    "dtree": {
        "confidence": 0.35,
        "min_objects": 2,
        "subtree_raising": True,
        "reduced_error": False,
        "folds": 3,
        "pruning": True,
    },
    "bayesnet": {"max_parents": 2, "alpha": 0.5},
    "oner": {},
}


@dataclass(frozen=True)
class ClassifierSpec:
    """Which model to train and with what parameters."""

    kind: str
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def resolved_params(self) -> dict[str, object]:
        """Defaults merged with overrides; unknown keys and bad values raise."""
        if self.kind not in KINDS:
            raise DataError(f"unknown classifier kind {self.kind!r}")
        defaults = dict(_PARAM_DEFAULTS[self.kind])
        for key, value in self.params.items():
            if key not in defaults:
                raise DataError(f"unknown parameter {key!r} for {self.kind}")
            defaults[key] = value
        if self.kind == "dtree":
            if not (0.0 < float(defaults["confidence"]) <= 0.5):
                raise DataError("confidence must lie in (0, 0.5]")
            if float(defaults["min_objects"]) < 1:
                raise DataError("min_objects must be at least 1")
            if int(defaults["folds"]) < 2:
                raise DataError("folds must be at least 2")
        elif self.kind == "bayesnet":
            if int(defaults["max_parents"]) < 1:
                raise DataError("max_parents must be at least 1")
            if float(defaults["alpha"]) < 0:
                raise DataError("alpha must be non-negative")
        return defaults

    def describe(self) -> str:
        params = self.resolved_params()
        inner = ",".join(f"{k}={params[k]}" for k in sorted(params))
        return f"{self.kind}({inner})" if inner else self.kind


class TrainedModel:
    """Base of all fitted models: immutable, explainable, schema-checked."""

    kind: str = "?"

    def __init__(self, schema: Sequence[AttributeSchema], spec: ClassifierSpec):
        self.schema = tuple(schema)
        self.spec = spec
        self.fingerprint = schema_fingerprint(self.schema)
        self.classes = next(a for a in self.schema if a.role == "class").values
        self._feature_slots = [i for i, a in enumerate(self.schema) if a.role == "feature"]

    # subclasses implement ------------------------------------------------

    def probability_matrix(self, d: Dataset) -> np.ndarray:
        """(n, n_classes) prediction probabilities for a whole dataset."""
        raise NotImplementedError

    def explain(self) -> str:
        """Human-readable rendering of the fitted structure."""
        raise NotImplementedError

    def explain_instance(self, x: Instance) -> list[str]:
        """Per-instance explanation lines (decision path, factor table, rule)."""
        raise NotImplementedError

    def payload(self) -> dict:
        """JSON-serializable fitted structure (schema handled by modelio)."""
        raise NotImplementedError

    # shared behaviour -----------------------------------------------------

    def check_schema(self, schema: Sequence[AttributeSchema] | None) -> None:
        if schema is not None and schema_fingerprint(schema) != self.fingerprint:
            raise SchemaMismatch("instance schema does not match the training schema")

    def feature_values(self, x: Instance) -> list:
        if len(x.values) != len(self.schema):
            raise SchemaMismatch(f"instance has {len(x.values)} slots, "
                                 f"schema has {len(self.schema)}")
        return [x.values[i] for i in self._feature_slots]

    def predict_distribution(self, x: Instance,
                             schema: Sequence[AttributeSchema] | None = None) -> ClassDistribution:
        self.check_schema(schema)
        probs = self._predict_values(self.feature_values(x))
        return distribution_from_array(self.classes, probs)

    def predict(self, x: Instance, schema=None) -> str:
        return self.predict_distribution(x, schema).best()

    def predict_indices(self, d: Dataset) -> np.ndarray:
        """Predicted class index per instance; argmax ties go to the lowest index."""
        return np.argmax(self.probability_matrix(d), axis=1)

    def _predict_values(self, feature_values: list) -> np.ndarray:
        raise NotImplementedError


def _feature_columns(m: TrainedModel, d: Dataset) -> list[np.ndarray]:
    if schema_fingerprint(d.schema) != m.fingerprint:
        raise SchemaMismatch("dataset schema does not match the training schema")
    return [d.column_at(i) for i in m._feature_slots]


class DecisionTreeModel(TrainedModel):
    kind = "dtree"

    def __init__(self, schema, spec, root: _tree.TreeNode):
        super().__init__(schema, spec)
        self.root = root

    def _predict_values(self, feature_values):
        counts = _tree.predict_counts(self.root, feature_values, len(self.classes))
        return counts / counts.sum()

    def probability_matrix(self, d: Dataset) -> np.ndarray:
        cols = _feature_columns(self, d)
        n = len(d)
        out = np.zeros((n, len(self.classes)))
        self._route(self.root, cols, np.arange(n), np.ones(n), out)
        return out / out.sum(axis=1, keepdims=True)

    def _route(self, node, cols, idx, w, out):
        if len(idx) == 0:
            return
        if isinstance(node, _tree.TreeLeaf):
            out[idx] += w[:, None] * np.asarray(node.distribution)
            return
        col = cols[self._tree_slot(node)][idx]
        if node.kind == NOMINAL:
            known = col >= 0
        else:
            known = ~np.isnan(col)
        matched = np.zeros(len(idx), dtype=bool)
        for key, frac, child in zip(node.child_keys, node.branch_fracs, node.child_nodes):
            if node.kind == NOMINAL:
                mask = known & (col == key)
            else:
                mask = known & ((col <= node.threshold) if key == 0 else (col > node.threshold))
            matched |= mask
            self._route(child, cols, idx[mask], w[mask], out)
        rest = ~matched  # missing values plus nominal codes without a branch
        if rest.any():
            for frac, child in zip(node.branch_fracs, node.child_nodes):
                self._route(child, cols, idx[rest], w[rest] * frac, out)

    def _tree_slot(self, node) -> int:
        return node.attr_index

    def explain(self) -> str:
        return _tree.render_tree(self.root, self.schema)

    def explain_instance(self, x: Instance) -> list[str]:
        steps, dist = _tree.explain_path(self.root, self.schema, x)
        lines = [f"{s.attribute} {s.test}" + (f"  [{s.note}]" if s.note else "")
                 for s in steps]
        lines.append("leaf -> " + ", ".join(f"{c}: {p:.4f}" for c, p in dist.ranked()))
        return lines

    def payload(self) -> dict:
        def encode(node):
            if isinstance(node, _tree.TreeLeaf):
                return {"leaf": True, "counts": list(node.counts),
                        "distribution": list(node.distribution)}
            return {
                "leaf": False,
                "attr": node.attr_name,
                "attr_index": node.attr_index,
                "kind": node.kind,
                "threshold": node.threshold,
                "child_keys": list(node.child_keys),
                "branch_fracs": list(node.branch_fracs),
                "counts": list(node.counts),
                "distribution": list(node.distribution),
                "children": [encode(c) for c in node.child_nodes],
            }

        return {"root": encode(self.root)}

    @classmethod
    def from_payload(cls, schema, spec, payload) -> "DecisionTreeModel":
        def decode(obj):
            if obj["leaf"]:
                return _tree.TreeLeaf(tuple(obj["counts"]), tuple(obj["distribution"]))
            return _tree.TreeSplit(
                attr_name=obj["attr"],
                attr_index=obj["attr_index"],
                kind=obj["kind"],
                threshold=obj["threshold"],
                child_keys=tuple(obj["child_keys"]),
                child_nodes=tuple(decode(c) for c in obj["children"]),
                branch_fracs=tuple(obj["branch_fracs"]),
                counts=tuple(obj["counts"]),
                distribution=tuple(obj["distribution"]),
            )

        return cls(schema, spec, decode(payload["root"]))


class OneRModel(TrainedModel):
    """Single-attribute rule table; the baseline the other models must beat."""

    kind = "oner"

    def __init__(self, schema, spec, attribute: str | None, cuts: Discretizer,
                 rule_counts: np.ndarray | None, missing_counts: np.ndarray | None,
                 global_counts: np.ndarray):
        super().__init__(schema, spec)
        self.attribute = attribute
        self.cuts = cuts
        self.rule_counts = rule_counts
        self.missing_counts = missing_counts
        self.global_counts = np.asarray(global_counts, dtype=float)

    @staticmethod
    def _smooth(counts: np.ndarray) -> np.ndarray:
        s = np.asarray(counts, dtype=float) + 1.0
        return s / s.sum()

    def _bucket_probs(self, code: int) -> np.ndarray:
        if code < 0:
            if self.missing_counts is not None and self.missing_counts.sum() > 0:
                return self._smooth(self.missing_counts)
            return self._smooth(self.global_counts)
        if self.rule_counts is None or code >= len(self.rule_counts) \
                or self.rule_counts[code].sum() == 0:
            return self._smooth(self.global_counts)
        return self._smooth(self.rule_counts[code])

    def _attr_code(self, feature_values) -> int:
        if self.attribute is None:
            return -2
        slot = [a.name for a in self.schema if a.role == "feature"].index(self.attribute)
        v = feature_values[slot]
        if v is MISSING:
            return -1
        attr = next(a for a in self.schema if a.name == self.attribute)
        if attr.kind == NUMERIC:
            return self.cuts.transform_value(self.attribute, float(v))
        return int(v)

    def _predict_values(self, feature_values):
        if self.attribute is None:
            return self._smooth(self.global_counts)
        return self._bucket_probs(self._attr_code(feature_values))

    def probability_matrix(self, d: Dataset) -> np.ndarray:
        cols = _feature_columns(self, d)
        n = len(d)
        if self.attribute is None:
            return np.tile(self._smooth(self.global_counts), (n, 1))
        names = [a.name for a in self.schema if a.role == "feature"]
        slot = names.index(self.attribute)
        attr = next(a for a in self.schema if a.name == self.attribute)
        col = cols[slot]
        if attr.kind == NUMERIC:
            codes = assign_bins(col, self.cuts.cuts[self.attribute])
        else:
            codes = col
        out = np.empty((n, len(self.classes)))
        for code in np.unique(codes):
            out[codes == code] = self._bucket_probs(int(code))
        return out

    def explain(self) -> str:
        if self.attribute is None:
            majority = self.classes[int(np.argmax(self.global_counts))]
            return f"no usable feature: always predict {majority}\n"
        attr = next(a for a in self.schema if a.name == self.attribute)
        labels = attr.values if attr.kind == NOMINAL \
            else self.cuts.binned_schema(self.attribute).values
        lines = [f"rule on {self.attribute}:"]
        for code, label in enumerate(labels):
            counts = self.rule_counts[code]
            if counts.sum() == 0:
                continue
            lines.append(f"  {label} -> {self.classes[int(np.argmax(counts))]}"
                         f" ({counts.sum():.0f})")
        if self.missing_counts is not None and self.missing_counts.sum() > 0:
            lines.append(f"  MISSING -> {self.classes[int(np.argmax(self.missing_counts))]}"
                         f" ({self.missing_counts.sum():.0f})")
        lines.append(f"  otherwise -> {self.classes[int(np.argmax(self.global_counts))]}")
        return "\n".join(lines) + "\n"

    def explain_instance(self, x: Instance) -> list[str]:
        if self.attribute is None:
            return ["no features: global majority rule"]
        code = self._attr_code(self.feature_values(x))
        probs = self._bucket_probs(code)
        best = self.classes[int(np.argmax(probs))]
        return [f"{self.attribute} bucket {code}: predict {best}"]

    def payload(self) -> dict:
        return {
            "attribute": self.attribute,
            "cuts": {k: list(v) for k, v in self.cuts.cuts.items()},
            "rule_counts": None if self.rule_counts is None else self.rule_counts.tolist(),
            "missing_counts": None if self.missing_counts is None else self.missing_counts.tolist(),
            "global_counts": self.global_counts.tolist(),
        }

    @classmethod
    def from_payload(cls, schema, spec, payload) -> "OneRModel":
        return cls(
            schema, spec,
            payload["attribute"],
            Discretizer({k: tuple(v) for k, v in payload["cuts"].items()}),
            None if payload["rule_counts"] is None else np.asarray(payload["rule_counts"], dtype=float),
            None if payload["missing_counts"] is None else np.asarray(payload["missing_counts"], dtype=float),
            np.asarray(payload["global_counts"], dtype=float),
        )


def oner_fit(d: Dataset, spec: ClassifierSpec | None = None) -> OneRModel:
    """Pick the single attribute whose value-to-majority-class rule errs least.

    Numeric attributes are discretized (supervised MDL) first; a MISSING
    bucket participates when training data has missing values. Ties between
    attributes break toward schema order; with no usable feature the model
    falls back to the global majority class.
    """
    spec = spec or ClassifierSpec("oner")
    if len(d) == 0:
        raise DataError("cannot fit on an empty dataset")
    cuts = Discretizer.fit(d)
    binned = cuts.transform(d)
    y = binned.class_column
    w = binned.weights
    known_y = y >= 0
    if not known_y.any():
        raise DataError("no class-labelled instances")
    n_classes = d.class_attribute.arity
    global_counts = np.bincount(y[known_y], weights=w[known_y], minlength=n_classes)

    best = None  # (error, feature_order, name, rule_counts, missing_counts)
    for order, name in enumerate(binned.feature_names()):
        attr = binned.attribute(name)
        col = binned.column(name)[known_y]
        yy = y[known_y]
        ww = w[known_y]
        valid = col >= 0
        counts = np.bincount(col[valid] * n_classes + yy[valid], weights=ww[valid],
                             minlength=attr.arity * n_classes).reshape(attr.arity, n_classes)
        miss_counts = np.bincount(yy[~valid], weights=ww[~valid], minlength=n_classes)
        err = float((counts.sum(axis=1) - counts.max(axis=1)).sum())
        if miss_counts.sum() > 0:
            err += float(miss_counts.sum() - miss_counts.max())
        if best is None or err < best[0] - 1e-12:
            best = (err, order, name, counts, miss_counts)

    if best is None:
        return OneRModel(d.schema, spec, None, cuts, None, None, global_counts)
    _, _, name, counts, miss_counts = best
    miss = miss_counts if miss_counts.sum() > 0 else None
    return OneRModel(d.schema, spec, name, cuts, counts, miss, global_counts)


def fit(spec: ClassifierSpec, d: Dataset) -> TrainedModel:
    """Train the model named by the spec. Deterministic given (spec, d, seed)."""
    params = spec.resolved_params()
    if len(d) == 0:
        raise DataError("cannot fit on an empty dataset")
    y = d.class_column
    if (y < 0).any():
        kept = np.nonzero(y >= 0)[0]
        if len(kept) == 0:
            raise DataError("no class-labelled instances")
        log.warning("dropping %d instances with missing class labels", len(d) - len(kept))
        d = d.select(kept)

    if spec.kind == "dtree":
        root = _tree.build_tree(
            d,
            confidence=float(params["confidence"]),
            min_objects=float(params["min_objects"]),
            subtree_raising=bool(params["subtree_raising"]),
            reduced_error=bool(params["reduced_error"]),
            folds=int(params["folds"]),
            pruning=bool(params["pruning"]),
            seed=spec.seed,
        )
        return DecisionTreeModel(d.schema, spec, root)
    if spec.kind == "bayesnet":
        from .bayesnet import bayesnet_fit

        return bayesnet_fit(d, spec, max_parents=int(params["max_parents"]),
                            alpha=float(params["alpha"]))
    if spec.kind == "oner":
        return oner_fit(d, spec)
    raise DataError(f"unknown classifier kind {spec.kind!r}")


def predict_distribution(m: TrainedModel, x: Instance,
                         schema: Sequence[AttributeSchema] | None = None) -> ClassDistribution:
    return m.predict_distribution(x, schema)
