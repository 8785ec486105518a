"""Bayesian-network classifier: K2 structure search + smoothed CPTs.

The network starts as naive Bayes (class pointing at every feature) and K2
greedily adds feature-feature arcs consistent with a fixed node ordering,
as long as the Bayesian (K2) family score improves and the parent cap
allows. Conditional probability tables are smoothed relative frequencies.
Prediction multiplies the CPT entries for the instance's values with the
class slot substituted (computed in log space); factors whose node or
parent values are missing are omitted from the product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .data import (
    MISSING,
    NOMINAL,
    NUMERIC,
    ClassDistribution,
    DataError,
    Dataset,
    Instance,
)
from .classify import ClassifierSpec, TrainedModel, _feature_columns
from .discretize import Discretizer, assign_bins
from .featsel import contingency_table


@dataclass(frozen=True)
class NetworkStructure:
    """Directed acyclic graph over the class node and the feature nodes.

    ``nodes`` is the search ordering (class node first by convention);
    parents of a node always precede it in the ordering, which is what
    guarantees acyclicity. The class node has no parents.
    """

    nodes: tuple[str, ...]
    parents: dict[str, tuple[str, ...]]

    def __post_init__(self):
        position = {n: i for i, n in enumerate(self.nodes)}
        if len(position) != len(self.nodes):
            raise DataError("duplicate node names in structure")
        for node, ps in self.parents.items():
            if node not in position:
                raise DataError(f"parents listed for unknown node {node!r}")
            for p in ps:
                if p not in position:
                    raise DataError(f"unknown parent {p!r} of {node!r}")
                if position[p] >= position[node]:
                    raise DataError(f"parent {p!r} does not precede {node!r}; "
                                    "structure would not be acyclic")
        if self.parents.get(self.nodes[0], ()):
            raise DataError("the class node cannot have parents")

    def arcs(self) -> list[tuple[str, str]]:
        return [(p, n) for n in self.nodes for p in self.parents.get(n, ())]


def _nominal_codes(d: Dataset) -> tuple[dict[str, np.ndarray], dict[str, int]]:
    codes, arity = {}, {}
    for a in d.schema:
        if a.role == "meta":
            continue
        if a.kind != NOMINAL:
            raise DataError(f"{a.name!r} is numeric; discretize before network search")
        codes[a.name] = d.column(a.name)
        arity[a.name] = a.arity
    return codes, arity


def _family_score(node: str, parents: Sequence[str], codes, arity, weights) -> float:
    """Log K2 (Cooper-Herskovits) score of one node given its parent set.

    Rows with a missing value in the node or any parent are skipped.
    """
    y = codes[node]
    r = arity[node]
    ok = y >= 0
    combo = np.zeros(len(y), dtype=np.int64)
    q = 1
    for p in parents:
        pc = codes[p]
        ok = ok & (pc >= 0)
        combo = combo * arity[p] + np.maximum(pc, 0)
        q *= arity[p]
    counts = np.bincount(combo[ok] * r + y[ok], weights=weights[ok],
                         minlength=q * r).reshape(q, r)
    row_tot = counts.sum(axis=1)
    score = q * float(gammaln(r))
    score -= float(gammaln(row_tot + r).sum())
    score += float(gammaln(counts + 1.0).sum())
    return score


def k2_search(d: Dataset, ordering: Sequence[str] | None = None,
              max_parents: int = 2) -> NetworkStructure:
    """Greedy K2 parent selection starting from the naive-Bayes structure.

    For each feature node, in ordering, the single earlier node whose
    addition most improves the family score is added, repeatedly, until no
    candidate improves the score or the node already has ``max_parents``
    parents (the class arc counts toward the cap).

    The default ordering is the class node first, then features by
    descending chi-squared score (ties by name), so results are
    deterministic.
    """
    if max_parents < 1:
        raise DataError("max_parents must be at least 1")
    codes, arity = _nominal_codes(d)
    class_name = d.class_attribute.name
    feature_names = [n for n in codes if n != class_name]

    if ordering is None:
        # degenerate single-level attributes naturally score 0 here
        scores = {name: contingency_table(d, name).statistic() for name in feature_names}
        ordered = [class_name] + sorted(feature_names, key=lambda n: (-scores[n], n))
    else:
        ordered = list(ordering)
        if set(ordered) != set(codes) or ordered[0] != class_name:
            raise DataError("ordering must cover the class node (first) and every feature")

    weights = d.weights
    parents: dict[str, tuple[str, ...]] = {class_name: ()}
    for pos, node in enumerate(ordered):
        if node == class_name:
            continue
        current = [class_name]  # naive-Bayes initialization
        current_score = _family_score(node, current, codes, arity, weights)
        candidates = [n for n in ordered[:pos] if n != class_name]
        while len(current) < max_parents:
            best_gain, best_candidate, best_score = 0.0, None, None
            for cand in candidates:
                if cand in current:
                    continue
                s = _family_score(node, current + [cand], codes, arity, weights)
                if s - current_score > best_gain + 1e-12:
                    best_gain, best_candidate, best_score = s - current_score, cand, s
            if best_candidate is None:
                break
            current.append(best_candidate)
            current_score = best_score
        parents[node] = tuple(current)
    return NetworkStructure(tuple(ordered), parents)


def structure_score(structure: NetworkStructure, d: Dataset) -> float:
    """Total log K2 score of a structure on a (nominal) dataset."""
    codes, arity = _nominal_codes(d)
    return sum(_family_score(n, structure.parents.get(n, ()), codes, arity, d.weights)
               for n in structure.nodes)


def estimate_cpts(structure: NetworkStructure, d: Dataset,
                  alpha: float = 0.5) -> dict[str, np.ndarray]:
    """Smoothed conditional probability tables for every node.

    Each table has one row per parent-value combination (mixed-radix order
    over the stored parent tuple) and one column per node value:
    ``P(v | parents) = (count + alpha) / (total + alpha * arity)``.
    Rows never observed come out uniform; missing values are skipped while
    counting.
    """
    if alpha < 0:
        raise DataError("alpha must be non-negative")
    codes, arity = _nominal_codes(d)
    weights = d.weights
    cpts: dict[str, np.ndarray] = {}
    for node in structure.nodes:
        ps = structure.parents.get(node, ())
        y = codes[node]
        r = arity[node]
        ok = y >= 0
        combo = np.zeros(len(y), dtype=np.int64)
        q = 1
        for p in ps:
            pc = codes[p]
            ok = ok & (pc >= 0)
            combo = combo * arity[p] + np.maximum(pc, 0)
            q *= arity[p]
        counts = np.bincount(combo[ok] * r + y[ok], weights=weights[ok],
                             minlength=q * r).reshape(q, r)
        denom = counts.sum(axis=1, keepdims=True) + alpha * r
        with np.errstate(invalid="ignore"):
            cpt = np.where(denom > 0, (counts + alpha) / np.maximum(denom, 1e-300),
                           1.0 / r)
        empty = counts.sum(axis=1) + alpha * r <= 0
        cpt[empty] = 1.0 / r
        cpts[node] = cpt
    return cpts


@dataclass(frozen=True)
class ContributionRow:
    """One factor of the chain-rule product for one instance."""

    node: str
    value: str
    log_contributions: tuple[float, ...] | None  # per class; None when skipped
    skipped: bool = False
    reason: str = ""


class BayesNetModel(TrainedModel):
    kind = "bayesnet"

    def __init__(self, schema, spec, cuts: Discretizer, structure: NetworkStructure,
                 cpts: Mapping[str, np.ndarray], binned_values: Mapping[str, tuple[str, ...]]):
        super().__init__(schema, spec)
        self.cuts = cuts
        self.structure = structure
        self.cpts = {k: np.asarray(v, dtype=float) for k, v in cpts.items()}
        self.binned_values = dict(binned_values)
        self._class_name = next(a.name for a in self.schema if a.role == "class")
        self._feature_names = [a.name for a in self.schema if a.role == "feature"]
        self._arity = {name: len(vals) for name, vals in self.binned_values.items()}
        self._arity[self._class_name] = len(self.classes)

    # -- code handling -------------------------------------------------------

    def _binned_code(self, name: str, value) -> int:
        if value is MISSING:
            return -1
        attr = next(a for a in self.schema if a.name == name)
        if attr.kind == NUMERIC:
            return self.cuts.transform_value(name, float(value))
        return int(value)

    def _codes_for_values(self, feature_values) -> dict[str, int]:
        return {name: self._binned_code(name, v)
                for name, v in zip(self._feature_names, feature_values)}

    # -- prediction ------------------------------------------------------------

    def _log_posterior(self, code_map: dict[str, int]) -> tuple[np.ndarray, list[ContributionRow]]:
        n_classes = len(self.classes)
        prior = np.log(self.cpts[self._class_name][0])
        rows: list[ContributionRow] = []
        total = prior.copy()
        for node in self.structure.nodes:
            if node == self._class_name:
                continue
            v = code_map[node]
            label = self.binned_values[node][v] if v >= 0 else "MISSING"
            if v < 0:
                rows.append(ContributionRow(node, label, None, True, "value missing"))
                continue
            ps = self.structure.parents.get(node, ())
            missing_parent = next((p for p in ps
                                   if p != self._class_name and code_map[p] < 0), None)
            if missing_parent is not None:
                rows.append(ContributionRow(node, label, None, True,
                                            f"parent {missing_parent} missing"))
                continue
            logs = np.empty(n_classes)
            for c in range(n_classes):
                combo = 0
                for p in ps:
                    pc = c if p == self._class_name else code_map[p]
                    combo = combo * self._arity[p] + pc
                logs[c] = np.log(self.cpts[node][combo, v])
            rows.append(ContributionRow(node, label, tuple(float(x) for x in logs)))
            total += logs
        return total, rows

    def _predict_values(self, feature_values):
        total, _ = self._log_posterior(self._codes_for_values(feature_values))
        total -= total.max()
        p = np.exp(total)
        return p / p.sum()

    def probability_matrix(self, d: Dataset) -> np.ndarray:
        cols = _feature_columns(self, d)
        n = len(d)
        n_classes = len(self.classes)
        code_cols: dict[str, np.ndarray] = {}
        for name, col in zip(self._feature_names, cols):
            attr = next(a for a in self.schema if a.name == name)
            if attr.kind == NUMERIC:
                code_cols[name] = assign_bins(col, self.cuts.cuts[name])
            else:
                code_cols[name] = col.astype(np.int64)

        ll = np.tile(np.log(self.cpts[self._class_name][0]), (n, 1))
        for node in self.structure.nodes:
            if node == self._class_name:
                continue
            v = code_cols[node]
            ok = v >= 0
            ps = self.structure.parents.get(node, ())
            base = np.zeros(n, dtype=np.int64)
            class_mult = 0
            mult = 1
            for p in reversed(ps):
                if p == self._class_name:
                    class_mult = mult
                else:
                    ok = ok & (code_cols[p] >= 0)
                    base = base + mult * np.maximum(code_cols[p], 0)
                mult *= self._arity[p]
            logcpt = np.log(self.cpts[node])
            idx = np.nonzero(ok)[0]
            for c in range(n_classes):
                ll[idx, c] += logcpt[base[idx] + class_mult * c, v[idx]]
        ll -= ll.max(axis=1, keepdims=True)
        p = np.exp(ll)
        return p / p.sum(axis=1, keepdims=True)

    # -- explanations ---------------------------------------------------------

    def explain_contributions(self, x: Instance) -> tuple[np.ndarray, list[ContributionRow]]:
        """Log prior per class plus one contribution row per feature node.

        Summing the prior with all non-skipped rows and normalizing
        reproduces :meth:`predict_distribution` exactly (identical floats:
        prediction is computed from these very rows).
        """
        code_map = self._codes_for_values(self.feature_values(x))
        prior = np.log(self.cpts[self._class_name][0])
        _, rows = self._log_posterior(code_map)
        return prior, rows

    def explain(self) -> str:
        lines = [f"nodes: {', '.join(self.structure.nodes)}"]
        for node in self.structure.nodes:
            ps = self.structure.parents.get(node, ())
            lines.append(f"{node} <- {', '.join(ps) if ps else '(prior)'}")
            labels = self.classes if node == self._class_name else self.binned_values[node]
            cpt = self.cpts[node]
            for row_i in range(cpt.shape[0]):
                cells = ", ".join(f"{labels[k]}: {cpt[row_i, k]:.4f}"
                                  for k in range(cpt.shape[1]))
                lines.append(f"  [{row_i}] {cells}")
        return "\n".join(lines) + "\n"

    def explain_instance(self, x: Instance) -> list[str]:
        prior, rows = self.explain_contributions(x)
        lines = ["prior log P(class): " +
                 ", ".join(f"{c}: {v:.4f}" for c, v in zip(self.classes, prior))]
        for row in rows:
            if row.skipped:
                lines.append(f"{row.node} = {row.value}: skipped ({row.reason})")
            else:
                body = ", ".join(f"{c}: {v:.4f}"
                                 for c, v in zip(self.classes, row.log_contributions))
                lines.append(f"{row.node} = {row.value}: {body}")
        return lines

    def payload(self) -> dict:
        return {
            "cuts": {k: list(v) for k, v in self.cuts.cuts.items()},
            "nodes": list(self.structure.nodes),
            "parents": {k: list(v) for k, v in self.structure.parents.items()},
            "cpts": {k: v.tolist() for k, v in self.cpts.items()},
            "binned_values": {k: list(v) for k, v in self.binned_values.items()},
        }

    @classmethod
    def from_payload(cls, schema, spec, payload) -> "BayesNetModel":
        structure = NetworkStructure(tuple(payload["nodes"]),
                                     {k: tuple(v) for k, v in payload["parents"].items()})
        return cls(
            schema, spec,
            Discretizer({k: tuple(v) for k, v in payload["cuts"].items()}),
            structure,
            {k: np.asarray(v, dtype=float) for k, v in payload["cpts"].items()},
            {k: tuple(v) for k, v in payload["binned_values"].items()},
        )


def bayesnet_fit(d: Dataset, spec: ClassifierSpec | None = None,
                 max_parents: int = 2, alpha: float = 0.5,
                 ordering: Sequence[str] | None = None) -> BayesNetModel:
    """Discretize numeric features, search a structure with K2, estimate CPTs."""
    spec = spec or ClassifierSpec("bayesnet", {"max_parents": max_parents, "alpha": alpha})
    if len(d) == 0:
        raise DataError("cannot fit on an empty dataset")
    cuts = Discretizer.fit(d)
    binned = cuts.transform(d)
    structure = k2_search(binned, ordering=ordering, max_parents=max_parents)
    cpts = estimate_cpts(structure, binned, alpha=alpha)
    binned_values = {a.name: a.values for a in binned.schema if a.role == "feature"}
    return BayesNetModel(d.schema, spec, cuts, structure, cpts, binned_values)


def bn_predict_distribution(m: BayesNetModel, x: Instance) -> ClassDistribution:
    return m.predict_distribution(x)
