"""Serve trained per-state models and drive the what-if endpoints in-process.

Trains a couple of models, saves them as model files, mounts the HTTP
advisor over them, and exercises /models, /predict (including the lat/lon
hazard lookup), and /whatif — the same endpoints the browser console uses.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from bridgekit.classify import ClassifierSpec, fit
from bridgekit.data import partition_by, project
from bridgekit.evaluate import cross_validate
from bridgekit.ingest import SeismicGrid
from bridgekit.modelio import save_model
from bridgekit.service import ModelRegistry, create_app
from bridgekit.synth import make_bridge_dataset

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
ATTRS = ("material", "deck_type", "max_span_length", "avg_span_length", "seismic_pga")

with tempfile.TemporaryDirectory() as tmp:
    model_dir = Path(tmp)
    data = make_bridge_dataset(5000, seed=3)
    parts = partition_by(data, "state").parts
    for state in ("WA", "GA"):
        ds = project(parts[state], ATTRS)
        spec = ClassifierSpec("dtree")
        recall = cross_validate(ds, spec, k=5, seed=1).weighted_recall
        save_model(fit(spec, ds), model_dir / f"{state.lower()}_dtree.model",
                   {"state": state, "cv_recall": round(recall, 4)})
        print(f"trained {state} dtree (cv recall {recall:.3f})")

    registry = ModelRegistry(model_dir)
    app = create_app(registry, SeismicGrid.load(FIXTURES / "seismic_grid.dat"))
    client = TestClient(app)

    print("\nGET /models")
    for entry in client.get("/models").json():
        print(f"  {entry['state']} {entry['kind']} recall={entry['cv_recall']}")

    body = {
        "state": "WA",
        "kind": "dtree",
        "features": {"material": "concrete", "deck_type": "cast_in_place",
                     "max_span_length": 20.0, "avg_span_length": 15.0,
                     "seismic_pga": 0.55},
    }
    print("\nPOST /predict (known hazard)")
    result = client.post("/predict", json=body).json()
    for row in result["distribution"][:3]:
        print(f"  {row['class']:9s} {row['p']:.3f}")
    print("  path: " + " | ".join(result["explanation"][:-1]))

    print("\nPOST /predict (hazard from coordinates)")
    coords = dict(body, features={**body["features"], "seismic_pga": None,
                                  "latitude": 37.026, "longitude": -121.981})
    result = client.post("/predict", json=coords).json()
    print(f"  top: {result['distribution'][0]['class']}"
          f" (grid point supplied the acceleration)")

    print("\nPOST /whatif over material")
    result = client.post("/whatif", json={**body, "vary": "material"}).json()
    for row in result["rows"]:
        print(f"  {row['value']:12s} -> {row['distribution'][0]['class']}"
              f" ({row['distribution'][0]['p']:.2f})")
