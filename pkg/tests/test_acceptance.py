"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Expected values proven by independent oracles live next to the
checks; runtime budgets are asserted, not aspirational.
"""

import math
import os
import time
from collections import Counter, defaultdict

import numpy as np
import pytest

from bridgekit.classify import ClassifierSpec, fit
from bridgekit.data import Dataset, MISSING, project
from bridgekit.evaluate import (
    ConfusionMatrix,
    GridCell,
    correlate_external,
    cross_validate,
    hold_one_state_out,
    per_state_experiment,
    precision_recall,
    resample,
    stratified_folds,
    write_experiment_reports,
)
from bridgekit.featsel import chi_squared, entropy, info_gain
from bridgekit.modelio import model_to_text
from bridgekit.synth import (
    HIGH_HAZARD_STATE,
    MINORITY_CLASSES,
    make_bridge_dataset,
    make_consistent_dataset,
    make_independent_climate,
    make_k2_fixture,
    make_weather_dataset,
    random_small_dataset,
)
from bridgekit.tree import TreeLeaf, TreeSplit, finalize, grow_tree, node_count, prune

ATTRS5 = ("material", "deck_type", "max_span_length", "avg_span_length", "seismic_pga")
ATTRS4 = ("material", "deck_type", "max_span_length", "avg_span_length")
ATTRS3 = ("deck_type", "max_span_length", "avg_span_length")


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


# -- criterion 1: formula oracles ------------------------------------------------


def _entropy_oracle(counts):
    total = sum(counts)
    return -sum((c / total) * math.log2(c / total) for c in counts if c > 0)


def _info_gain_oracle(d, attr):
    j = d.index_of(attr)
    cj = d.class_index
    rows = [(x.values[j], x.values[cj]) for x in d]
    parent = _entropy_oracle(list(Counter(c for _, c in rows).values()))
    branches = defaultdict(list)
    for v, c in rows:
        branches["?" if v is MISSING else v].append(c)
    child = sum(len(m) / len(rows) * _entropy_oracle(list(Counter(m).values()))
                for m in branches.values())
    return parent - child


def _chi_squared_oracle(d, attr):
    j = d.index_of(attr)
    cj = d.class_index
    cell = defaultdict(float)
    row = defaultdict(float)
    col = defaultdict(float)
    n = 0.0
    for x in d:
        v, c = x.values[j], x.values[cj]
        if v is MISSING or c is MISSING:
            continue
        cell[(v, c)] += 1
        row[v] += 1
        col[c] += 1
        n += 1
    if len(row) < 2 or len(col) < 2:
        return 0.0
    return sum((cell[(v, c)] - row[v] * col[c] / n) ** 2 / (row[v] * col[c] / n)
               for v in row for c in col)


def test_criterion_formula_oracles():
    t0 = time.time()
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(1000):
        d = random_small_dataset(rng, missing_rate=0.15 if rng.random() < 0.5 else 0.0)
        counts = d.class_counts()
        if counts.sum() > 0:
            worst = max(worst, abs(entropy(counts) - _entropy_oracle(list(counts))))
        for name in d.feature_names():
            worst = max(worst, abs(info_gain(d, name) - max(_info_gain_oracle(d, name), 0.0)))
            worst = max(worst, abs(chi_squared(d, name) - _chi_squared_oracle(d, name)))
    weather_gain = info_gain(make_weather_dataset(), "outlook")
    elapsed = time.time() - t0
    ok = worst <= 1e-9 and abs(weather_gain - 0.2467) <= 1e-4 and elapsed < 10.0
    report("formula-oracles", ok,
           f"max |err|={worst:.2e}, outlook gain={weather_gain:.5f}, {elapsed:.1f}s")


# -- criterion 2: decision tree --------------------------------------------------


def test_criterion_decision_tree():
    t0 = time.time()
    weather = make_weather_dataset()
    from bridgekit.tree import build_tree

    root = build_tree(weather)
    oracle_shape = (
        isinstance(root, TreeSplit) and root.attr_name == "outlook"
        and isinstance(dict(zip(root.child_keys, root.child_nodes))[0], TreeSplit)
        and dict(zip(root.child_keys, root.child_nodes))[0].attr_name == "humidity"
        and isinstance(dict(zip(root.child_keys, root.child_nodes))[1], TreeLeaf)
        and dict(zip(root.child_keys, root.child_nodes))[2].attr_name == "windy"
    )

    consistent = make_consistent_dataset(400, seed=2)
    model = fit(ClassifierSpec("dtree", {"pruning": False, "min_objects": 1}), consistent)
    full_accuracy = bool((model.predict_indices(consistent) == consistent.class_column).all())

    grown = grow_tree(make_bridge_dataset(4000, seed=11), min_objects=2)
    sizes = [node_count(finalize(prune(grown, cf, True)))
             for cf in (0.15, 0.25, 0.35, 0.45)]
    monotone = sizes == sorted(sizes)

    elapsed = time.time() - t0
    ok = oracle_shape and full_accuracy and monotone and elapsed < 10.0
    report("decision-tree", ok,
           f"oracle tree={oracle_shape}, 100% train={full_accuracy}, "
           f"prune sizes {sizes}, {elapsed:.1f}s")


# -- criterion 3: bayesian network ----------------------------------------------


def _naive_bayes_oracle(d, x_values, alpha=0.5):
    cj = d.class_index
    rows = [x.values for x in d]
    class_counts = Counter(r[cj] for r in rows)
    total = sum(class_counts.values())
    n_classes = len(d.classes)
    posts = []
    slots = [i for i, a in enumerate(d.schema) if a.role == "feature"]
    for c in range(n_classes):
        p = (class_counts.get(c, 0) + alpha) / (total + alpha * n_classes)
        for j in slots:
            v = x_values[j]
            if v is MISSING:
                continue
            arity = d.schema[j].arity
            match = sum(1 for r in rows if r[cj] == c and r[j] == v)
            within = sum(1 for r in rows if r[cj] == c and r[j] is not MISSING)
            p *= (match + alpha) / (within + alpha * arity)
        posts.append(p)
    s = sum(posts)
    return np.array([p / s for p in posts])


def test_criterion_bayesian_network():
    t0 = time.time()
    rng = np.random.default_rng(777)
    worst = 0.0
    for _ in range(100):
        d = random_small_dataset(rng, missing_rate=0.15 if rng.random() < 0.5 else 0.0)
        model = fit(ClassifierSpec("bayesnet", {"max_parents": 1}), d)
        for _ in range(2):
            x = d.instance(int(rng.integers(0, len(d))))
            got = np.asarray(model.predict_distribution(x).probabilities)
            worst = max(worst, float(np.abs(got - _naive_bayes_oracle(d, x.values)).max()))

    from bridgekit.bayesnet import k2_search

    hits = 0
    for seed in range(20):
        d = make_k2_fixture(5000, seed=seed)
        structure = k2_search(d, ordering=["cls", "a", "b"], max_parents=2)
        if set(structure.arcs()) == {("cls", "a"), ("cls", "b"), ("a", "b")}:
            hits += 1

    elapsed = time.time() - t0
    ok = worst <= 1e-12 and hits >= 19 and elapsed < 60.0
    report("bayesian-network", ok,
           f"naive-oracle max err={worst:.2e}, planted arcs {hits}/20, {elapsed:.1f}s")


# -- criterion 4: resampling -----------------------------------------------------


def test_criterion_resampling():
    t0 = time.time()
    proportions = (0.41, 0.23, 0.14, 0.09, 0.05, 0.04, 0.02, 0.02)
    n = 5000
    schema = make_bridge_dataset(10, seed=0).schema  # reuse the 8-class schema
    counts = [int(round(p * n)) for p in proportions]
    counts[0] += n - sum(counts)
    rows = []
    for c, k in enumerate(counts):
        rows.extend([[0, 0, 0, 10.0, 8.0, 0.1, c]] * k)
    d = Dataset.from_rows(schema, rows)

    worst = 0.0
    n_classes = len(proportions)
    for bias in (0.0, 0.05, 0.10, 0.20, 0.35, 1.0):
        out = resample(d, bias, size_pct=1000.0, seed=42)  # 50k draws
        assert len(out) == 50000
        freq = np.bincount(out.class_column, minlength=n_classes) / len(out)
        target = np.array([(1 - bias) * c / n + bias / n_classes for c in counts])
        target /= target.sum()
        worst = max(worst, float(np.abs(freq - target).max()))

    exact = resample(d, 0.10, size_pct=100.0, seed=1)
    elapsed = time.time() - t0
    ok = worst <= 0.01 and len(exact) == len(d) and elapsed < 30.0
    report("resampling", ok, f"max |freq-target|={worst:.4f} over 50k draws, {elapsed:.1f}s")


# -- criterion 5: protocol invariants --------------------------------------------


def test_criterion_protocol_invariants(tmp_path):
    t0 = time.time()
    rng = np.random.default_rng(55)

    folds_ok = True
    for _ in range(30):
        d = random_small_dataset(rng, max_n=200)
        k = int(rng.integers(2, min(10, len(d)) + 1))
        folds = stratified_folds(d, k=k, seed=int(rng.integers(0, 1000)))
        got = np.sort(np.concatenate(folds))
        folds_ok &= bool(np.array_equal(got, np.arange(len(d))))
        y = d.class_column
        for c in range(d.class_attribute.arity):
            per_fold = [int((y[f] == c).sum()) for f in folds]
            folds_ok &= (max(per_fold) - min(per_fold)) <= 1

    recall_ok = True
    for _ in range(200):
        m = int(rng.integers(2, 6))
        counts = rng.integers(0, 25, size=(m, m)).astype(float)
        if counts.sum() == 0 or (counts.sum(axis=1) == 0).any():
            continue
        cm = ConfusionMatrix(tuple(f"c{i}" for i in range(m)), counts)
        _, _, _, wr = precision_recall(cm)
        recall_ok &= wr == float(np.trace(counts) / counts.sum())

    d = make_bridge_dataset(1500, seed=3)
    cells = [GridCell("a", ATTRS4, ClassifierSpec("dtree"), k=5, seed=9),
             GridCell("b", ATTRS4, ClassifierSpec("bayesnet"), k=5, seed=9, baseline="a")]
    r1 = per_state_experiment(d, cells, state_attr="state")
    r2 = per_state_experiment(d, cells, state_attr="state")
    write_experiment_reports(r1, tmp_path / "x")
    write_experiment_reports(r2, tmp_path / "y")
    determinism = all(
        (tmp_path / "x" / f).read_bytes() == (tmp_path / "y" / f).read_bytes()
        for f in ("absolute.csv", "deltas.csv", "per_class.csv", "summary.json"))
    determinism &= model_to_text(fit(ClassifierSpec("dtree", seed=5), d)) == \
        model_to_text(fit(ClassifierSpec("dtree", seed=5), d))

    elapsed = time.time() - t0
    ok = folds_ok and recall_ok and determinism
    report("protocol-invariants", ok,
           f"folds={folds_ok}, recall-identity={recall_ok}, "
           f"determinism={determinism}, {elapsed:.1f}s")


# -- criterion 6: directional reproduction ---------------------------------------


def _aggregate_confusions(reports):
    total = None
    for r in reports.values():
        total = r.confusion.counts if total is None else total + r.confusion.counts
    return total


def test_criterion_directional_reproduction():
    t0 = time.time()
    seeds = (0, 1, 2, 3, 4)
    d = make_bridge_dataset(20000, seed=0)
    pooled = project(d, ATTRS5)

    hoso = hold_one_state_out(d, ClassifierSpec("dtree"), state_attr="state")

    passes = {key: 0 for key in "abcde"}
    for seed in seeds:
        cells = [
            GridCell("nbi3", ATTRS3, ClassifierSpec("dtree"), k=10, seed=seed),
            GridCell("nbi4", ATTRS4, ClassifierSpec("dtree"), k=10, seed=seed,
                     baseline="nbi3"),
            GridCell("nbi4h", ATTRS5, ClassifierSpec("dtree"), k=10, seed=seed),
            GridCell("nbi4h_r", ATTRS5, ClassifierSpec("dtree"), bias=0.10, k=10,
                     seed=seed, baseline="nbi4h"),
            GridCell("bn4", ATTRS4, ClassifierSpec("bayesnet"), k=10, seed=seed),
            GridCell("bn4h", ATTRS5, ClassifierSpec("bayesnet"), k=10, seed=seed,
                     baseline="bn4"),
        ]
        res = per_state_experiment(d, cells, state_attr="state")

        # (a) per-state models beat the pooled national model
        recalls = [r.weighted_recall for r in res.reports["nbi4h"].values()]
        if np.mean(recalls) >= hoso.mean_recall + 0.05 and \
                np.std(recalls) < hoso.std_recall:
            passes["a"] += 1

        # (b) OneR < BN < DT on the pooled inventory
        rec = {kind: cross_validate(pooled, ClassifierSpec(kind), k=10,
                                    seed=seed).weighted_recall
               for kind in ("oner", "bayesnet", "dtree")}
        if rec["oner"] < rec["bayesnet"] < rec["dtree"]:
            passes["b"] += 1

        # (c) removing the material attribute hurts every state
        if all(dr > 0 for dr, _ in res.deltas["nbi4"].values()):
            passes["c"] += 1

        # (d) the hazard attribute helps most where hazard actually varies
        deltas = {s: dr for s, (dr, _) in res.deltas["bn4h"].items()}
        if max(deltas, key=deltas.get) == HIGH_HAZARD_STATE:
            passes["d"] += 1

        # (e) 10% resampling bias lifts minority recall cheaply
        base_cm = _aggregate_confusions(res.reports["nbi4h"])
        rs_cm = _aggregate_confusions(res.reports["nbi4h_r"])
        classes = list(res.reports["nbi4h"]["GA"].confusion.classes)
        mi = [classes.index(c) for c in MINORITY_CLASSES]
        mr_base = np.diag(base_cm)[mi].sum() / base_cm.sum(axis=1)[mi].sum()
        mr_rs = np.diag(rs_cm)[mi].sum() / rs_cm.sum(axis=1)[mi].sum()
        overall_base = np.trace(base_cm) / base_cm.sum()
        overall_rs = np.trace(rs_cm) / rs_cm.sum()
        if mr_rs - mr_base >= 0.10 and overall_base - overall_rs <= 0.02:
            passes["e"] += 1

    elapsed = time.time() - t0
    majority = (len(seeds) // 2) + 1
    ok = all(v >= majority for v in passes.values()) and elapsed < 300.0
    report("directional-reproduction", ok,
           f"seed passes {passes} (need >= {majority} each), {elapsed:.0f}s")


# -- criterion 7: correlation study ----------------------------------------------


def test_criterion_correlation_study():
    t0 = time.time()
    rng = np.random.default_rng(99)
    states = [f"s{i:03d}" for i in range(200)]
    recalls = {s: float(rng.uniform(0.5, 1.0)) for s in states}
    worst = 0.0
    for seed in range(10):
        climate = make_independent_climate(states, seed=seed)
        out = correlate_external(recalls, climate)
        for param, r in out.items():
            assert r is not None
            worst = max(worst, abs(r))
    elapsed = time.time() - t0
    ok = worst < 0.3
    report("correlation-study", ok, f"max |r|={worst:.3f} over 10 seeds, {elapsed:.1f}s")


# -- optional criterion: user-supplied real inventory ----------------------------


REAL_DATA_DIR = os.environ.get("BRIDGEKIT_REAL_NBI")


@pytest.mark.skipif(not REAL_DATA_DIR, reason="set BRIDGEKIT_REAL_NBI to a directory "
                    "holding dataset.csv/dataset.schema built from a real inventory")
def test_criterion_real_data_optional():
    from bridgekit.data import dataset_stats
    from bridgekit.io import read_dataset

    d = read_dataset(os.path.join(REAL_DATA_DIR, "dataset.csv"))
    stats = {row[0]: row[2] for row in dataset_stats(d, d.class_attribute.name)}
    expected = {"Stringer/Multi-beam or Girder": 41.0, "Culvert": 23.0,
                "Slab": 14.0, "Box Beam or Girders - Multiple": 9.0}
    shares_ok = all(abs(stats.get(name, 0.0) - pct) <= 3.0
                    for name, pct in expected.items())
    recall = cross_validate(d, ClassifierSpec("dtree"), k=10, seed=0).weighted_recall
    recall_ok = abs(recall - 0.825) <= 0.05
    report("real-data-optional", shares_ok and recall_ok,
           f"shares ok={shares_ok}, national DT recall={recall:.3f}")
