import json

import numpy as np
import pytest

from bridgekit.classify import ClassifierSpec, fit
from bridgekit.data import DataError
from bridgekit.modelio import (
    inspect_text,
    load_model,
    model_from_text,
    model_to_text,
    save_model,
)


@pytest.mark.parametrize("kind", ["dtree", "bayesnet", "oner"])
def test_round_trip_preserves_predictions(tmp_path, bridges_small, kind):
    model = fit(ClassifierSpec(kind, seed=3), bridges_small)
    path = tmp_path / f"{kind}.model"
    save_model(model, path, {"state": "ALL", "cv_recall": 0.9})
    loaded, metadata = load_model(path)
    assert metadata["state"] == "ALL"
    assert loaded.fingerprint == model.fingerprint
    a = model.probability_matrix(bridges_small)
    b = loaded.probability_matrix(bridges_small)
    assert np.array_equal(a, b)


def test_serialization_is_byte_identical(bridges_small):
    spec = ClassifierSpec("dtree", seed=1)
    t1 = model_to_text(fit(spec, bridges_small))
    t2 = model_to_text(fit(spec, bridges_small))
    assert t1 == t2


def test_format_and_version_checked(tmp_path, weather):
    model = fit(ClassifierSpec("oner"), weather)
    text = model_to_text(model)
    doc = json.loads(text)
    doc["format"] = "something-else"
    with pytest.raises(DataError):
        model_from_text(json.dumps(doc))
    doc = json.loads(text)
    doc["version"] = 99
    with pytest.raises(DataError):
        model_from_text(json.dumps(doc))
    doc = json.loads(text)
    doc["fingerprint"] = "0" * 16
    with pytest.raises(DataError):
        model_from_text(json.dumps(doc))
    with pytest.raises(DataError):
        model_from_text("not json at all")


def test_inspect_text_structure(weather):
    model = fit(ClassifierSpec("dtree"), weather)
    text = inspect_text(model, {"state": "VA"})
    assert "kind: dtree" in text
    assert "state: VA" in text
    assert "outlook" in text

    bn = fit(ClassifierSpec("bayesnet"), weather)
    bn_text = inspect_text(bn)
    assert "nodes:" in bn_text and "<-" in bn_text
