"""Datasets, frequency stats, and attribute scoring on a tiny fixture.

Walks the core vocabulary: build a dataset, inspect the class balance,
score attributes with information gain and chi-squared, apply the 70%
rank cutoff, and discretize a numeric column with supervised binning.
"""

import numpy as np

from bridgekit.data import AttributeSchema, Dataset, dataset_stats, partition_by
from bridgekit.discretize import discretize
from bridgekit.featsel import chi_squared, entropy, info_gain, rank_attributes
from bridgekit.synth import make_weather_dataset

weather = make_weather_dataset()

print("== class balance ==")
for value, count, pct in dataset_stats(weather, "play"):
    print(f"  {value:4s} {count:4.0f}  {pct:5.1f}%")

print("\n== entropy ==")
print(f"  class counts {list(weather.class_counts())} ->",
      f"{entropy(weather.class_counts()):.5f} bits")

print("\n== per-attribute scores ==")
for name in weather.feature_names():
    print(f"  {name:12s} gain={info_gain(weather, name):.4f}"
          f"  chi2={chi_squared(weather, name):.3f}")

print("\n== ranking with the 70% cutoff ==")
for score in rank_attributes(weather, "chi2"):
    flag = "kept" if score.kept else "dropped"
    print(f"  {score.attribute:12s} {score.score:7.3f}  {flag}")

print("\n== supervised discretization ==")
rng = np.random.default_rng(1)
spans = np.concatenate([rng.uniform(5, 12, 40), rng.uniform(25, 60, 40)])
labels = np.array([0] * 40 + [1] * 40, dtype=np.int32)
schema = [AttributeSchema("span", "numeric"),
          AttributeSchema("kind", "nominal", ("short", "long"), role="class")]
d = Dataset(schema, [spans, labels])
binned = discretize(d, "span")
print("  bins:", ", ".join(binned.attribute("span").values))

print("\n== partitioning ==")
schema = [AttributeSchema("state", "nominal", ("VA", "CA"), role="meta"),
          AttributeSchema("cls", "nominal", ("a", "b"), role="class")]
two_state = Dataset.from_rows(schema, [[0, 0]] * 6 + [[1, 1]] * 4)
parts = partition_by(two_state, "state")
print(" ", {k: len(v) for k, v in parts.parts.items()})
