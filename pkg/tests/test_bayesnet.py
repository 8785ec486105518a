import math
from collections import Counter

import numpy as np
import pytest

from bridgekit.bayesnet import (
    BayesNetModel,
    NetworkStructure,
    estimate_cpts,
    k2_search,
    structure_score,
)
from bridgekit.classify import ClassifierSpec, fit
from bridgekit.data import MISSING, AttributeSchema, DataError, Dataset, Instance
from bridgekit.synth import make_k2_fixture, random_small_dataset


# -- independent naive-Bayes oracle ---------------------------------------------


def naive_bayes_oracle(d: Dataset, x_values, alpha=0.5):
    """Plain product-of-frequencies naive Bayes with the same smoothing."""
    cj = d.class_index
    classes = d.classes
    n_classes = len(classes)
    rows = [x.values for x in d]
    class_counts = Counter(r[cj] for r in rows)
    total = sum(class_counts.values())
    posts = []
    feature_slots = [i for i, a in enumerate(d.schema) if a.role == "feature"]
    for c in range(n_classes):
        p = (class_counts.get(c, 0) + alpha) / (total + alpha * n_classes)
        for j in feature_slots:
            v = x_values[j]
            if v is MISSING:
                continue
            arity = d.schema[j].arity
            match = sum(1 for r in rows if r[cj] == c and r[j] == v)
            within = sum(1 for r in rows if r[cj] == c and r[j] is not MISSING)
            p *= (match + alpha) / (within + alpha * arity)
        posts.append(p)
    total_p = sum(posts)
    return [p / total_p for p in posts]


class TestNaiveBayesEquivalence:
    def test_matches_oracle_on_random_datasets(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            d = random_small_dataset(rng, missing_rate=0.15)
            model = fit(ClassifierSpec("bayesnet", {"max_parents": 1}), d)
            for trial in range(3):
                x = d.instance(int(rng.integers(0, len(d))))
                got = model.predict_distribution(x).probabilities
                want = naive_bayes_oracle(d, x.values)
                assert np.allclose(got, want, atol=1e-12)

    def test_weather_instance(self, weather):
        model = fit(ClassifierSpec("bayesnet", {"max_parents": 1}), weather)
        x = Instance((0, 2, 0, 1, MISSING))  # sunny, cool, high, true
        got = model.predict_distribution(x).probabilities
        want = naive_bayes_oracle(weather, x.values)
        assert np.allclose(got, want, atol=1e-12)


class TestK2:
    def test_max_parents_one_keeps_naive_bayes(self):
        d = make_k2_fixture(2000, seed=3)
        structure = k2_search(d, max_parents=1)
        assert structure.parents["a"] == ("cls",)
        assert structure.parents["b"] == ("cls",)
        assert structure.parents["cls"] == ()

    def test_recovers_planted_arc(self):
        hits = 0
        for seed in range(10):
            d = make_k2_fixture(5000, seed=seed)
            structure = k2_search(d, ordering=["cls", "a", "b"], max_parents=2)
            arcs = set(structure.arcs())
            if arcs == {("cls", "a"), ("cls", "b"), ("a", "b")}:
                hits += 1
        assert hits >= 9

    def test_zero_features_class_only(self):
        schema = [AttributeSchema("cls", "nominal", ("x", "y"), role="class")]
        d = Dataset.from_rows(schema, [[0], [1], [0]])
        structure = k2_search(d)
        assert structure.nodes == ("cls",)
        model = fit(ClassifierSpec("bayesnet"), d)
        dist = model.predict_distribution(Instance((MISSING,)))
        assert dist.probabilities[0] > dist.probabilities[1]

    def test_score_never_below_naive_initialization(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = random_small_dataset(rng)
            found = k2_search(d, max_parents=3)
            naive = NetworkStructure(found.nodes, {
                n: (() if n == d.class_attribute.name else (d.class_attribute.name,))
                for n in found.nodes})
            assert structure_score(found, d) >= structure_score(naive, d) - 1e-9

    def test_structure_invariants(self):
        d = make_k2_fixture(1000, seed=1)
        structure = k2_search(d, max_parents=2)
        for node, parents in structure.parents.items():
            assert len(parents) <= 2
        with pytest.raises(DataError):
            NetworkStructure(("cls", "a"), {"cls": ("a",)})  # class with parent
        with pytest.raises(DataError):
            NetworkStructure(("cls", "a", "b"), {"a": ("b",)})  # parent after child
        with pytest.raises(DataError):
            k2_search(d, ordering=["cls", "a"])  # incomplete ordering
        with pytest.raises(DataError):
            k2_search(d, max_parents=0)


class TestCpts:
    def test_smoothing_formula(self):
        schema = [AttributeSchema("cls", "nominal", ("x", "y"), role="class")]
        d = Dataset.from_rows(schema, [[0]] * 3 + [[1]] * 1)
        structure = NetworkStructure(("cls",), {"cls": ()})
        cpt = estimate_cpts(structure, d, alpha=0.5)["cls"]
        assert np.allclose(cpt[0], [0.7, 0.3])

    def test_unseen_parent_combination_uniform(self):
        schema = [AttributeSchema("a", "nominal", ("u", "v")),
                  AttributeSchema("cls", "nominal", ("x", "y", "z"), role="class")]
        d = Dataset.from_rows(schema, [[0, 0], [0, 1]])  # a=v never seen
        structure = NetworkStructure(("cls", "a"), {"cls": (), "a": ("cls",)})
        cpt = estimate_cpts(structure, d, alpha=0.5)["a"]
        assert np.allclose(cpt[2], [0.5, 0.5])  # class z unseen -> uniform over a

    def test_alpha_zero_gives_maximum_likelihood(self):
        schema = [AttributeSchema("cls", "nominal", ("x", "y"), role="class")]
        d = Dataset.from_rows(schema, [[0]] * 3 + [[1]] * 1)
        structure = NetworkStructure(("cls",), {"cls": ()})
        cpt = estimate_cpts(structure, d, alpha=0.0)["cls"]
        assert np.allclose(cpt[0], [0.75, 0.25])

    def test_conditionals_sum_to_one(self):
        d = make_k2_fixture(500, seed=2)
        structure = k2_search(d, max_parents=2)
        for node, cpt in estimate_cpts(structure, d).items():
            assert np.allclose(cpt.sum(axis=1), 1.0, atol=1e-9)
            assert (cpt > 0).all()


class TestPrediction:
    def test_all_missing_gives_smoothed_prior(self, weather):
        model = fit(ClassifierSpec("bayesnet"), weather)
        dist = model.predict_distribution(Instance((MISSING,) * 5))
        want = [(9 + 0.5) / (14 + 1), (5 + 0.5) / (14 + 1)]
        assert np.allclose(dist.probabilities, want, atol=1e-12)

    def test_uniform_cpts_give_uniform_distribution(self):
        schema = [AttributeSchema("a", "nominal", ("u", "v")),
                  AttributeSchema("cls", "nominal", ("x", "y"), role="class")]
        structure = NetworkStructure(("cls", "a"), {"cls": (), "a": ("cls",)})
        model = BayesNetModel(schema, ClassifierSpec("bayesnet"),
                              __import__("bridgekit.discretize", fromlist=["Discretizer"]).Discretizer({}),
                              structure,
                              {"cls": np.array([[0.5, 0.5]]), "a": np.full((2, 2), 0.5)},
                              {"a": ("u", "v")})
        dist = model.predict_distribution(Instance((0, MISSING)))
        assert np.allclose(dist.probabilities, [0.5, 0.5], atol=1e-12)

    def test_probability_matrix_matches_single_predictions(self):
        rng = np.random.default_rng(17)
        d = random_small_dataset(rng, missing_rate=0.2)
        model = fit(ClassifierSpec("bayesnet"), d)
        matrix = model.probability_matrix(d)
        for i in range(len(d)):
            single = model.predict_distribution(d.instance(i)).probabilities
            assert np.allclose(matrix[i], single, atol=1e-12)


class TestExplanations:
    def test_contributions_reconstruct_prediction(self, weather):
        model = fit(ClassifierSpec("bayesnet"), weather)
        rng = np.random.default_rng(3)
        for _ in range(10):
            values = tuple(
                MISSING if rng.random() < 0.3 else int(rng.integers(0, a.arity))
                for a in weather.schema)
            x = Instance(values)
            prior, rows = model.explain_contributions(x)
            total = prior.copy()
            for row in rows:
                if not row.skipped:
                    total = total + np.asarray(row.log_contributions)
            total -= total.max()
            p = np.exp(total)
            p /= p.sum()
            assert np.allclose(p, model.predict_distribution(x).probabilities, atol=0)

    def test_missing_feature_flagged_skipped(self, weather):
        model = fit(ClassifierSpec("bayesnet"), weather)
        _, rows = model.explain_contributions(Instance((MISSING, 0, 0, 0, MISSING)))
        by_node = {r.node: r for r in rows}
        assert by_node["outlook"].skipped and "missing" in by_node["outlook"].reason
        assert not by_node["temperature"].skipped

    def test_oracle_factors_on_weather(self, weather):
        model = fit(ClassifierSpec("bayesnet", {"max_parents": 1}), weather)
        x = Instance((0, MISSING, MISSING, MISSING, MISSING))  # sunny only
        _, rows = model.explain_contributions(x)
        row = next(r for r in rows if r.node == "outlook")
        # sunny given yes: (2 + 0.5)/(9 + 1.5); given no: (3 + 0.5)/(5 + 1.5)
        assert row.log_contributions[0] == pytest.approx(math.log(2.5 / 10.5), abs=1e-12)
        assert row.log_contributions[1] == pytest.approx(math.log(3.5 / 6.5), abs=1e-12)


class TestNoiseRobustness:
    def test_label_flips_disturb_network_less_than_tree(self):
        from bridgekit.evaluate import cross_validate
        from bridgekit.synth import make_bridge_dataset

        bn_deltas, dt_deltas = [], []
        for seed in range(10):
            # continuous spans: the regime where tree thresholds jitter
            d = make_bridge_dataset(4000, seed=100 + seed, quantize_spans=False)
            rng = np.random.default_rng(seed)
            y = d.class_column.copy()
            flip = rng.random(len(d)) < 0.01
            y[flip] = rng.integers(0, len(d.classes), size=int(flip.sum()))
            noisy = d.replace_column(d.class_attribute.name, d.class_attribute, y)
            for spec_kind, out in (("bayesnet", bn_deltas), ("dtree", dt_deltas)):
                spec = ClassifierSpec(spec_kind)
                clean_recall = cross_validate(d, spec, k=5, seed=seed).weighted_recall
                noisy_recall = cross_validate(noisy, spec, k=5, seed=seed).weighted_recall
                out.append(abs(clean_recall - noisy_recall))
        assert np.mean(bn_deltas) < np.mean(dt_deltas)
