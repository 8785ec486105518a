"""Train the three model kinds and read their fitted structures.

Every model exposes the same contract: a class distribution per instance
plus a human-readable account of how it got there (decision path, factor
table, or rule lookup).
"""

from bridgekit.classify import ClassifierSpec, fit
from bridgekit.synth import make_weather_dataset

weather = make_weather_dataset()
sunny_cool_high_windy = weather.instance(5)

for kind in ("oner", "bayesnet", "dtree"):
    model = fit(ClassifierSpec(kind), weather)
    print(f"==== {kind} ====")
    print(model.explain())
    dist = model.predict_distribution(sunny_cool_high_windy)
    print("instance (rainy, cool, normal, windy):")
    for cls, p in dist.ranked():
        print(f"  {cls:4s} {p:.3f}")
    print("because:")
    for line in model.explain_instance(sunny_cool_high_windy):
        print(f"  {line}")
    print()
