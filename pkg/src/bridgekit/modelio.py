"""Versioned model files: a self-describing JSON layout.

Layout (version 1):

```
{
  "format": "bridgekit-model",
  "version": 1,
  "kind": "dtree" | "bayesnet" | "oner",
  "spec": {"kind": ..., "params": {...}, "seed": ...},
  "schema": [{"name", "kind", "values", "role"}, ...],
  "fingerprint": "<schema digest>",
  "metadata": {...},            # free-form: state, cv_recall, trained_at, ...
  "payload": {...}              # model-specific fitted structure
}
```

Serialization is canonical (sorted keys, two-space indent), so two fits from
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .bayesnet import BayesNetModel
from .classify import ClassifierSpec, DecisionTreeModel, OneRModel, TrainedModel
from .data import AttributeSchema, DataError, schema_fingerprint
from .io import atomic_write_text

FORMAT = "bridgekit-model"
VERSION = 1

_MODEL_TYPES = {
    "dtree": DecisionTreeModel,
    "bayesnet": BayesNetModel,
    "oner": OneRModel,
}


def model_to_text(m: TrainedModel, metadata: Mapping[str, object] | None = None) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": m.kind,
        "spec": {"kind": m.spec.kind, "params": dict(m.spec.params), "seed": m.spec.seed},
        "schema": [
            {"name": a.name, "kind": a.kind, "values": list(a.values), "role": a.role}
            for a in m.schema
        ],
        "fingerprint": m.fingerprint,
        "metadata": dict(metadata or {}),
        "payload": m.payload(),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_model(m: TrainedModel, path: str | Path,
               metadata: Mapping[str, object] | None = None) -> None:
    atomic_write_text(path, model_to_text(m, metadata))


def model_from_text(text: str) -> tuple[TrainedModel, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"not a model file: {exc}") from None
    if doc.get("format") != FORMAT:
        raise DataError("not a model file (format marker missing)")
    if doc.get("version") != VERSION:
        raise DataError(f"unsupported model file version {doc.get('version')!r}")
    kind = doc.get("kind")
    if kind not in _MODEL_TYPES:
        raise DataError(f"unknown model kind {kind!r}")
    schema = tuple(
        AttributeSchema(a["name"], a["kind"], tuple(a["values"]), a["role"])
        for a in doc["schema"]
    )
    if schema_fingerprint(schema) != doc["fingerprint"]:
        raise DataError("model file fingerprint does not match its schema")
    spec_doc = doc["spec"]
    spec = ClassifierSpec(spec_doc["kind"], spec_doc["params"], spec_doc["seed"])
    model = _MODEL_TYPES[kind].from_payload(schema, spec, doc["payload"])
    return model, doc.get("metadata", {})


def load_model(path: str | Path) -> tuple[TrainedModel, dict]:
    return model_from_text(Path(path).read_text(encoding="utf-8"))


def inspect_text(m: TrainedModel, metadata: Mapping[str, object] | None = None) -> str:
    """Human-readable structure: header plus the model's own explanation."""
    lines = [
        f"kind: {m.kind}",
        f"spec: {m.spec.describe()}",
        f"classes: {', '.join(m.classes)}",
        f"features: {', '.join(a.name for a in m.schema if a.role == 'feature')}",
        f"fingerprint: {m.fingerprint}",
    ]
    for key in sorted(metadata or {}):
        lines.append(f"{key}: {metadata[key]}")
    lines.append("")
    return "\n".join(lines) + m.explain()
