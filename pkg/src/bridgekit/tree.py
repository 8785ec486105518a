"""Pruned decision trees in the C4.5 family.

Splits are chosen by gain ratio; nominal attributes branch per value and
numeric attributes split at the best midpoint threshold. Instances with a
missing split value are routed fractionally, in proportion to the known
branch populations, both in training and at prediction. Pruning is
pessimistic (confidence-bound error estimates) with optional subtree
raising; reduced-error pruning on a held-out fraction is available as an
alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit
from scipy.stats import norm

from .data import (
    MISSING,
    NOMINAL,
    ClassDistribution,
    DataError,
    Dataset,
    Instance,
    distribution_from_array,
)
from .discretize import _entropy_bits, _weighted_child_entropy

_EPS = 1e-10
#: fractional instance weights below this are dropped during routing
_MIN_WEIGHT = 1e-8
#: dynamic minimum branch size for numeric splits is capped here (C4.5 convention)
_INTERVAL_CAP = 25.0


# -- fitted tree structure -------------------------------------------------


@dataclass(frozen=True)
class TreeLeaf:
    counts: tuple[float, ...]
    distribution: tuple[float, ...]  # Laplace-smoothed (+1 per class)


@dataclass(frozen=True)
class TreeSplit:
    attr_name: str
    attr_index: int
    kind: str  # nominal | numeric
    threshold: float | None
    child_keys: tuple[int, ...]  # nominal value indices, or (0, 1) for the <=/> sides
    child_nodes: tuple["TreeNode", ...]
    branch_fracs: tuple[float, ...]  # known-weight proportion per child
    counts: tuple[float, ...]  # node class counts (fallback for unmatched values)
    distribution: tuple[float, ...]


TreeNode = TreeLeaf | TreeSplit


def node_count(node: TreeNode) -> int:
    if isinstance(node, TreeLeaf):
        return 1
    return 1 + sum(node_count(c) for c in node.child_nodes)


def leaf_count(node: TreeNode) -> int:
    if isinstance(node, TreeLeaf):
        return 1
    return sum(leaf_count(c) for c in node.child_nodes)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, TreeLeaf):
        return 0
    return 1 + max(tree_depth(c) for c in node.child_nodes)


# -- growing ----------------------------------------------------------------


class _Node:
    """Mutable node used while growing and pruning; holds its training rows."""

    __slots__ = ("counts", "attr_index", "threshold", "child_keys", "children",
                 "branch_fracs", "idx", "w", "est")

    def __init__(self, counts, idx, w):
        self.counts = counts
        self.idx = idx
        self.w = w
        self.attr_index = -1
        self.threshold = None
        self.child_keys = ()
        self.children = ()
        self.branch_fracs = ()
        self.est = 0.0  # estimated subtree errors, set while pruning

    @property
    def is_leaf(self):
        return self.attr_index < 0

    def to_leaf(self):
        leaf = _Node(self.counts, self.idx, self.w)
        return leaf

    def clone_internal(self, children):
        out = _Node(self.counts, self.idx, self.w)
        out.attr_index = self.attr_index
        out.threshold = self.threshold
        out.child_keys = self.child_keys
        out.branch_fracs = self.branch_fracs
        out.children = tuple(children)
        return out


@dataclass
class _Encoded:
    """Column-major feature matrix shared by every node of one tree."""

    names: list[str]
    kinds: list[str]
    arities: list[int]
    cols: list[np.ndarray]
    y: np.ndarray
    w: np.ndarray
    n_classes: int


class GrownTree:
    """A grown (possibly pruned) tree that still carries per-node training data."""

    def __init__(self, root: _Node, enc: _Encoded, schema, min_objects: float):
        self.root = root
        self.enc = enc
        self.schema = schema
        self.min_objects = min_objects


def _encode(d: Dataset) -> _Encoded:
    names, kinds, arities, cols = [], [], [], []
    for a in d.schema:
        if a.role != "feature":
            continue
        names.append(a.name)
        kinds.append(a.kind)
        arities.append(a.arity if a.kind == NOMINAL else 0)
        cols.append(d.column(a.name))
    y = d.class_column
    if (y < 0).any():
        raise DataError("tree training requires a class label on every instance")
    return _Encoded(names, kinds, arities, cols, y, d.weights.astype(float), d.class_attribute.arity)


def _class_counts(enc: _Encoded, idx: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.bincount(enc.y[idx], weights=w, minlength=enc.n_classes)


def _split_info(branch_weights: np.ndarray, miss_w: float, total_w: float) -> float:
    fr = branch_weights / total_w
    info = float(-(fr * np.log2(fr)).sum())
    if miss_w > _EPS:
        m = miss_w / total_w
        info -= m * math.log2(m)
    return info


def _eval_nominal(enc, j, col, y, w, total_w, min_objects):
    known = col >= 0
    if not known.all():
        kw = w[known]
        codes = col[known]
        ky = y[known]
    else:
        kw, codes, ky = w, col, y
    known_w = float(kw.sum())
    if known_w <= _EPS:
        return None
    arity = enc.arities[j]
    counts = np.bincount(codes * enc.n_classes + ky, weights=kw,
                         minlength=arity * enc.n_classes).reshape(arity, enc.n_classes)
    bw = counts.sum(axis=1)
    live = bw > _EPS
    if int(live.sum()) < 2:
        return None
    if (bw[live] < min_objects - 1e-9).any():
        return None  # every child must carry at least min_objects weight
    parent_ent = _entropy_bits(counts.sum(axis=0))
    gain_known = parent_ent - _weighted_child_entropy(counts[live]) / known_w
    gain = (known_w / total_w) * gain_known
    if gain <= _EPS:
        return None
    info = _split_info(bw[live], total_w - known_w, total_w)
    if info <= _EPS:
        return None
    return (gain / info, gain, None)


@njit(cache=True)
def _numeric_scan(sv, sy, sw, n_classes, min_objects, total_w, miss_info):
    """Best binary threshold of a sorted numeric column, by gain ratio.

    One left-to-right pass with incremental x*log(x) class sums, so the cost
    is linear in the node size. Returns (boundary index, ratio, gain); the
    index is -1 when no admissible split exists.
    """
    n = len(sv)
    ln2 = 0.6931471805599453
    tot = np.zeros(n_classes)
    known_w = 0.0
    for i in range(n):
        tot[sy[i]] += sw[i]
        known_w += sw[i]
    k_present = 0
    sum_tot = 0.0
    for c in range(n_classes):
        if tot[c] > 0.0:
            k_present += 1
            sum_tot += tot[c] * math.log(tot[c])
    if k_present < 2:
        return -1, 0.0, 0.0
    parent_ent = (known_w * math.log(known_w) - sum_tot) / (known_w * ln2)
    min_side = 0.1 * known_w / k_present
    if min_side > _INTERVAL_CAP:
        min_side = _INTERVAL_CAP
    if min_side < min_objects:
        min_side = min_objects

    left = np.zeros(n_classes)
    sl = 0.0      # sum of l*ln(l) over left class counts
    sr = sum_tot  # same over right counts
    lw = 0.0
    best_pos = -1
    best_ratio = -1.0
    best_gain = 0.0
    for i in range(n - 1):
        c = sy[i]
        wgt = sw[i]
        l_old = left[c]
        l_new = l_old + wgt
        if l_old > 0.0:
            sl -= l_old * math.log(l_old)
        sl += l_new * math.log(l_new)
        r_old = tot[c] - l_old
        r_new = r_old - wgt
        sr -= r_old * math.log(r_old)
        if r_new > 1e-12:
            sr += r_new * math.log(r_new)
        left[c] = l_new
        lw += wgt

        if sv[i + 1] <= sv[i]:
            continue
        rw = known_w - lw
        if lw < min_side - 1e-9 or rw < min_side - 1e-9:
            continue
        child_sum = (lw * math.log(lw) - sl + rw * math.log(rw) - sr) / ln2
        gain = (known_w / total_w) * (parent_ent - child_sum / known_w)
        if gain <= 1e-10:
            continue
        fl = lw / total_w
        fr = rw / total_w
        info = -(fl * math.log(fl) + fr * math.log(fr)) / ln2 + miss_info
        if info <= 1e-10:
            continue
        ratio = gain / info
        if ratio > best_ratio:
            best_ratio = ratio
            best_gain = gain
            best_pos = i
    return best_pos, best_ratio, best_gain


def _eval_numeric(enc, j, col, y, w, total_w, min_objects):
    known = ~np.isnan(col)
    if not known.all():
        sv = col[known]
        sy = y[known]
        sw = w[known]
    else:
        sv, sy, sw = col, y, w
    if len(sv) < 2:
        return None
    order = np.argsort(sv, kind="stable")
    sv, sy, sw = sv[order], sy[order], sw[order]
    miss_w = total_w - float(sw.sum())
    miss_info = 0.0
    if miss_w > _EPS:
        m = miss_w / total_w
        miss_info = -m * math.log2(m)
    pos, ratio, gain = _numeric_scan(sv, sy, sw, enc.n_classes, float(min_objects),
                                     total_w, miss_info)
    if pos < 0:
        return None
    threshold = (sv[pos] + sv[pos + 1]) / 2.0
    return (float(ratio), float(gain), float(threshold))


def _route_children(enc, j, threshold, idx, w):
    """Partition (idx, w) by the split; missing rows spread fractionally."""
    col = enc.cols[j][idx]
    if threshold is None:
        known = col >= 0
        branches = [(key, known & (col == key)) for key in range(enc.arities[j])]
    else:
        known = ~np.isnan(col)
        branches = [(0, known & (col <= threshold)), (1, known & (col > threshold))]
    known_w = float(w[known].sum())
    miss = ~known
    have_missing = bool(miss.any())

    keys, parts, fracs = [], [], []
    for key, mask in branches:
        bw = float(w[mask].sum())
        if bw <= _EPS:
            continue
        frac = bw / known_w
        bidx, bw_arr = idx[mask], w[mask]
        if have_missing:
            mw = w[miss] * frac
            keep = mw > _MIN_WEIGHT
            if keep.any():
                bidx = np.concatenate([bidx, idx[miss][keep]])
                bw_arr = np.concatenate([bw_arr, mw[keep]])
        keys.append(key)
        parts.append((bidx, bw_arr))
        fracs.append(frac)
    return keys, parts, fracs


def _grow(enc: _Encoded, idx: np.ndarray, w: np.ndarray, min_objects: float,
          depth: int = 0) -> _Node:
    counts = _class_counts(enc, idx, w)
    node = _Node(counts, idx, w)
    total_w = float(w.sum())
    nonzero = counts > _EPS
    if total_w < 2 * min_objects or nonzero.sum() <= 1 or depth > 2000:
        return node

    y = enc.y[idx]
    best = None
    for j in range(len(enc.names)):
        col = enc.cols[j][idx]
        if enc.kinds[j] == NOMINAL:
            cand = _eval_nominal(enc, j, col, y, w, total_w, min_objects)
        else:
            cand = _eval_numeric(enc, j, col, y, w, total_w, min_objects)
        if cand is None:
            continue
        if best is None or cand[0] > best[0][0] + _EPS:
            best = (cand, j)
    if best is None:
        return node

    (ratio, gain, threshold), j = best
    keys, parts, fracs = _route_children(enc, j, threshold, idx, w)
    if len(keys) < 2:
        return node
    node.attr_index = j
    node.threshold = threshold
    node.child_keys = tuple(keys)
    node.branch_fracs = tuple(fracs)
    node.children = tuple(_grow(enc, bidx, bw, min_objects, depth + 1)
                          for bidx, bw in parts)
    return node


def grow_tree(d: Dataset, min_objects: float = 2) -> GrownTree:
    """Grow an unpruned tree; prune separately or via :func:`dtree_fit`."""
    if len(d) == 0:
        raise DataError("cannot grow a tree on an empty dataset")
    if min_objects < 1:
        raise DataError("min_objects must be at least 1")
    enc = _encode(d)
    root = _grow(enc, np.arange(len(d)), enc.w.copy(), float(min_objects))
    return GrownTree(root, enc, d.schema, float(min_objects))


# -- pessimistic pruning -----------------------------------------------------


_Z_CACHE: dict[float, float] = {}


def _z_value(cf: float) -> float:
    z = _Z_CACHE.get(cf)
    if z is None:
        z = float(norm.ppf(1 - cf))
        _Z_CACHE[cf] = z
    return z


def _add_errs(n: float, e: float, cf: float) -> float:
    """Extra errors charged to a leaf with ``e`` of ``n`` wrong, at confidence ``cf``.

    Upper confidence bound of the binomial error rate, with the small-count
    special cases used by the C4.5 lineage.
    """
    if cf >= 1.0:
        return 0.0
    if e < 1:
        base = n * (1 - cf ** (1 / n)) if n > 0 else 0.0
        if e == 0:
            return base
        return base + e * (_add_errs(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = _z_value(cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) \
        / (1 + z * z / n)
    return r * n - e


def _leaf_est(counts: np.ndarray, cf: float) -> float:
    n = float(counts.sum())
    if n <= 0:
        return 0.0
    e = n - float(counts.max())
    return e + _add_errs(n, e, cf)


def _refit(node: _Node, enc: _Encoded, idx: np.ndarray, w: np.ndarray, cf: float) -> _Node:
    """Recompute a (sub)tree's counts (and error estimates) with new data
    routed through its existing tests; branches that lose all data or would
    drop below two children collapse to leaves."""
    counts = _class_counts(enc, idx, w)
    out = _Node(counts, idx, w)
    if node.is_leaf or float(w.sum()) <= _EPS:
        out.est = _leaf_est(counts, cf)
        return out
    keys, parts, fracs = _route_children(enc, node.attr_index, node.threshold, idx, w)
    old = dict(zip(node.child_keys, node.children))
    keep = [(k, p, f) for k, p, f in zip(keys, parts, fracs) if k in old]
    if len(keep) < 2:
        out.est = _leaf_est(counts, cf)
        return out
    out.attr_index = node.attr_index
    out.threshold = node.threshold
    out.child_keys = tuple(k for k, _, _ in keep)
    out.branch_fracs = tuple(f for _, _, f in keep)
    out.children = tuple(_refit(old[k], enc, bidx, bw, cf) for k, (bidx, bw), _ in keep)
    out.est = sum(c.est for c in out.children)
    return out


def _prune_pessimistic(node: _Node, enc: _Encoded, cf: float, raising: bool) -> _Node:
    """Bottom-up pruning; every returned node carries its error estimate.

    At each kept-internal node, subtree raising repeatedly replaces the node
    by its most-populated child (with the node's data re-routed through it)
    while that does not increase the estimated error; the subtree height
    shrinks on every raise, so the loop terminates.
    """
    if node.is_leaf:
        node.est = _leaf_est(node.counts, cf)
        return node
    current = node.clone_internal(
        _prune_pessimistic(c, enc, cf, raising) for c in node.children)
    while True:
        tree_err = sum(c.est for c in current.children)
        leaf_err = _leaf_est(current.counts, cf)
        if leaf_err <= tree_err:
            leaf = current.to_leaf()
            leaf.est = leaf_err
            return leaf
        if raising:
            sizes = [float(c.w.sum()) for c in current.children]
            largest = current.children[int(np.argmax(sizes))]
            if not largest.is_leaf:
                cand = _refit(largest, enc, current.idx, current.w, cf)
                if cand.est <= tree_err:
                    if cand.is_leaf:
                        return cand
                    current = cand
                    continue
        current.est = tree_err
        return current


def prune(tree: GrownTree, confidence: float = 0.35, subtree_raising: bool = True) -> GrownTree:
    """Pessimistic-error pruning; returns a new tree, the input is untouched."""
    if not (0.0 < confidence <= 0.5):
        raise DataError("confidence must lie in (0, 0.5]")
    root = _prune_pessimistic(tree.root, tree.enc, confidence, subtree_raising)
    return GrownTree(root, tree.enc, tree.schema, tree.min_objects)


# -- reduced-error pruning ---------------------------------------------------


def _holdout_split(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Boolean mask marking the held-out fraction (~1/folds, class-stratified)."""
    rng = np.random.default_rng(seed)
    held = np.zeros(len(y), dtype=bool)
    for c in np.unique(y):
        members = np.nonzero(y == c)[0]
        perm = members[rng.permutation(len(members))]
        take = len(perm) // folds
        held[perm[:take]] = True
    return held


def _rep_prune(node: _Node, enc: _Encoded, hidx: np.ndarray, hw: np.ndarray):
    """Collapse subtrees whose held-out error does not beat a single leaf."""
    majority = int(np.argmax(node.counts))
    htotal = float(hw.sum())
    leaf_err = htotal - float(hw[enc.y[hidx] == majority].sum())
    if node.is_leaf:
        return node, leaf_err
    keys, parts, _ = _route_children(enc, node.attr_index, node.threshold, hidx, hw)
    routed = dict(zip(keys, parts))
    new_children = []
    tree_err = 0.0
    for key, child in zip(node.child_keys, node.children):
        bidx, bw = routed.get(key, (np.empty(0, dtype=int), np.empty(0)))
        pruned, err = _rep_prune(child, enc, bidx, bw)
        new_children.append(pruned)
        tree_err += err
    if leaf_err <= tree_err:
        return node.to_leaf(), leaf_err
    out = _Node(node.counts, node.idx, node.w)
    out.attr_index = node.attr_index
    out.threshold = node.threshold
    out.child_keys = node.child_keys
    out.branch_fracs = node.branch_fracs
    out.children = tuple(new_children)
    return out, tree_err


# -- finalization and prediction ---------------------------------------------


def _finalize(node: _Node, enc: _Encoded) -> TreeNode:
    counts = tuple(float(c) for c in node.counts)
    smoothed = (np.asarray(node.counts) + 1.0)
    dist = tuple(float(p) for p in smoothed / smoothed.sum())
    if node.is_leaf:
        return TreeLeaf(counts, dist)
    return TreeSplit(
        attr_name=enc.names[node.attr_index],
        attr_index=node.attr_index,
        kind=enc.kinds[node.attr_index],
        threshold=node.threshold,
        child_keys=node.child_keys,
        child_nodes=tuple(_finalize(c, enc) for c in node.children),
        branch_fracs=node.branch_fracs,
        counts=counts,
        distribution=dist,
    )


def finalize(tree: GrownTree) -> TreeNode:
    """Strip training data and freeze leaf distributions (Laplace +1)."""
    return _finalize(tree.root, tree.enc)


def build_tree(d: Dataset, confidence: float = 0.35, min_objects: float = 2,
               subtree_raising: bool = True, reduced_error: bool = False,
               folds: int = 3, pruning: bool = True, seed: int = 0) -> TreeNode:
    """Grow and prune a tree, returning the immutable fitted structure.

    With ``reduced_error`` the tree is grown on (folds-1)/folds of the data
    and collapsed against the held-out remainder; otherwise pessimistic
    pruning with the given confidence factor is applied (the ``folds``
    parameter is then unused).
    """
    if not (0.0 < confidence <= 0.5):
        raise DataError("confidence must lie in (0, 0.5]")
    if min_objects < 1:
        raise DataError("min_objects must be at least 1")
    if not pruning:
        return finalize(grow_tree(d, min_objects))
    if reduced_error:
        if folds < 2:
            raise DataError("reduced-error pruning needs at least 2 folds")
        enc = _encode(d)
        held = _holdout_split(enc.y, folds, seed)
        grow_idx = np.nonzero(~held)[0]
        root = _grow(enc, grow_idx, enc.w[grow_idx].copy(), float(min_objects))
        hidx = np.nonzero(held)[0]
        root, _ = _rep_prune(root, enc, hidx, enc.w[hidx].copy())
        return _finalize(root, enc)
    return finalize(prune(grow_tree(d, min_objects), confidence, subtree_raising))


def predict_counts(node: TreeNode, values: Sequence, n_classes: int) -> np.ndarray:
    """Accumulated leaf distributions for one instance, fractionally routed."""
    acc = np.zeros(n_classes)
    _accumulate(node, values, 1.0, acc)
    return acc


def _accumulate(node: TreeNode, values, weight, acc):
    if isinstance(node, TreeLeaf):
        acc += weight * np.asarray(node.distribution)
        return
    v = values[node.attr_index]
    if v is not MISSING:
        if node.kind == NOMINAL:
            for key, child in zip(node.child_keys, node.child_nodes):
                if key == int(v):
                    _accumulate(child, values, weight, acc)
                    return
            # value had no training mass under this node: fall through to
            # fractional routing, same as a missing value
        else:
            side = 0 if float(v) <= node.threshold else 1
            for key, child in zip(node.child_keys, node.child_nodes):
                if key == side:
                    _accumulate(child, values, weight, acc)
                    return
            acc += weight * np.asarray(node.distribution)
            return
    for frac, child in zip(node.branch_fracs, node.child_nodes):
        _accumulate(child, values, weight * frac, acc)


@dataclass(frozen=True)
class ExplainStep:
    attribute: str
    test: str
    value: str
    note: str = ""


def _feature_index_map(schema) -> dict[int, int]:
    """Map feature-order index (used in tree nodes) to schema slot index."""
    mapping = {}
    fi = 0
    for si, a in enumerate(schema):
        if a.role == "feature":
            mapping[fi] = si
            fi += 1
    return mapping


def explain_path(node: TreeNode, schema, x: Instance) -> tuple[list[ExplainStep], ClassDistribution]:
    """The tests an instance passes on its way to a leaf, plus the prediction.

    When a tested value is MISSING (or unseen), the walk stops with a note
    describing the fractional routing; the returned distribution is then the
    weighted vote over all branches and matches predict exactly.
    """
    fmap = _feature_index_map(schema)
    feature_values = [x.values[fmap[i]] for i in range(len(fmap))]
    classes = next(a for a in schema if a.role == "class").values
    steps: list[ExplainStep] = []
    cur = node
    while isinstance(cur, TreeSplit):
        v = feature_values[cur.attr_index]
        attr_schema = schema[fmap[cur.attr_index]]
        if v is MISSING:
            fracs = ", ".join(f"{f:.3f}" for f in cur.branch_fracs)
            steps.append(ExplainStep(cur.attr_name, "?", "MISSING",
                                     f"value missing: weighted routing across branches ({fracs})"))
            break
        if cur.kind == NOMINAL:
            label = attr_schema.values[int(v)]
            nxt = None
            for key, child in zip(cur.child_keys, cur.child_nodes):
                if key == int(v):
                    nxt = child
                    break
            if nxt is None:
                steps.append(ExplainStep(cur.attr_name, f"= {label}", label,
                                         "value unseen here: weighted routing across branches"))
                break
            steps.append(ExplainStep(cur.attr_name, f"= {label}", label))
            cur = nxt
        else:
            side = 0 if float(v) <= cur.threshold else 1
            op = "<=" if side == 0 else ">"
            nxt = None
            for key, child in zip(cur.child_keys, cur.child_nodes):
                if key == side:
                    nxt = child
                    break
            steps.append(ExplainStep(cur.attr_name, f"{op} {cur.threshold:g}", f"{float(v):g}"))
            if nxt is None:
                break
            cur = nxt

    counts = predict_counts(node, _values_in_feature_order(schema, x), len(classes))
    total = counts.sum()
    return steps, distribution_from_array(classes, counts / total)


def _values_in_feature_order(schema, x: Instance) -> list:
    fmap = _feature_index_map(schema)
    return [x.values[fmap[i]] for i in range(len(fmap))]


def render_tree(node: TreeNode, schema, indent: str = "") -> str:
    """Indented text form of a fitted tree, one test per line."""
    classes = next(a for a in schema if a.role == "class").values
    by_name = {a.name: a for a in schema}
    lines: list[str] = []

    def leaf_text(leaf: TreeLeaf) -> str:
        best = int(np.argmax(leaf.counts)) if sum(leaf.counts) > 0 else 0
        return f"{classes[best]} ({sum(leaf.counts):.1f})"

    def walk(n: TreeNode, prefix: str):
        if isinstance(n, TreeLeaf):
            return
        attr = by_name[n.attr_name]
        for key, child in zip(n.child_keys, n.child_nodes):
            if n.kind == NOMINAL:
                test = f"{n.attr_name} = {attr.values[key]}"
            else:
                op = "<=" if key == 0 else ">"
                test = f"{n.attr_name} {op} {n.threshold:g}"
            if isinstance(child, TreeLeaf):
                lines.append(f"{prefix}{test}: {leaf_text(child)}")
            else:
                lines.append(f"{prefix}{test}")
                walk(child, prefix + "|   ")

    if isinstance(node, TreeLeaf):
        return indent + leaf_text(node) + "\n"
    walk(node, indent)
    return "\n".join(lines) + "\n"
