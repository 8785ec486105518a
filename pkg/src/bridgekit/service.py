"""HTTP advisor: serves trained per-state models to the what-if UI.

Endpoints (JSON):

- ``GET /models`` — registry metadata (attribute sets, CV recall, dates)
- ``POST /predict`` — body ``{state, kind, features: {name: value|null}}``;
  returns ``{distribution: [{class, p}], explanation: [...]}``
- ``POST /whatif`` — same body plus ``vary``; one row per value of the
  varied nominal attribute, plus the base prediction
- ``POST /admin/reload`` — rescan the model directory

Models are immutable snapshots; the registry is swapped atomically on
reload, so concurrent requests never observe a half-loaded state. Bad input
maps to 404/422, never a 500.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .classify import TrainedModel
from .data import MISSING, NOMINAL, Instance
from .ingest import SeismicGrid
from .modelio import load_model

log = logging.getLogger(__name__)

SEISMIC_ATTRIBUTE = "seismic_pga"
LATITUDE_KEY = "latitude"
LONGITUDE_KEY = "longitude"


class RequestProblem(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass(frozen=True)
class RegisteredModel:
    state: str
    kind: str
    model: TrainedModel
    metadata: dict


class ModelRegistry:
    """Read-only view over a directory of model files, reloadable on demand."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._lock = threading.Lock()
        self._models: dict[tuple[str, str], RegisteredModel] = {}
        self.reload()

    def reload(self) -> int:
        """Rescan the directory; the registry swap is atomic."""
        found: dict[tuple[str, str], RegisteredModel] = {}
        for path in sorted(self.directory.glob("*.model")):
            try:
                model, metadata = load_model(path)
            except Exception as exc:
                log.warning("skipping %s: %s", path.name, exc)
                continue
            state = str(metadata.get("state", "national"))
            entry = RegisteredModel(state, model.kind, model, metadata)
            found[(state, model.kind)] = entry
        with self._lock:
            self._models = found
        return len(found)

    def get(self, state: str, kind: str) -> RegisteredModel | None:
        with self._lock:
            return self._models.get((state, kind))

    def entries(self) -> list[RegisteredModel]:
        with self._lock:
            return sorted(self._models.values(), key=lambda e: (e.state, e.kind))


def _coerce_features(entry: RegisteredModel, features, grid: SeismicGrid | None) -> Instance:
    """Validate request features against the model schema; unknown values
    become MISSING, structurally bad input raises 422."""
    if not isinstance(features, Mapping):
        raise RequestProblem(422, "features must be an object of name: value")
    model = entry.model
    values = []
    for attr in model.schema:
        if attr.role != "feature":
            values.append(MISSING)
            continue
        raw = features.get(attr.name)
        if raw is None:
            values.append(MISSING)
        elif attr.kind == NOMINAL:
            if not isinstance(raw, str):
                raise RequestProblem(422, f"feature {attr.name!r} expects a category label")
            if raw in attr.values:
                values.append(attr.values.index(raw))
            else:
                values.append(MISSING)  # unknown category: treated as missing
        else:
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise RequestProblem(422, f"feature {attr.name!r} expects a number")
            values.append(float(raw))

    # location fallback: derive the hazard value from lat/lon when absent
    names = [a.name for a in model.schema]
    if SEISMIC_ATTRIBUTE in names and grid is not None:
        slot = names.index(SEISMIC_ATTRIBUTE)
        if values[slot] is MISSING:
            lat = features.get(LATITUDE_KEY)
            lon = features.get(LONGITUDE_KEY)
            if isinstance(lat, (int, float)) and isinstance(lon, (int, float)) \
                    and not isinstance(lat, bool) and not isinstance(lon, bool):
                pga = grid.lookup(float(lat), float(lon))
                if pga is not None:
                    values[slot] = pga
    return Instance(tuple(values))


def _prediction_body(entry: RegisteredModel, x: Instance) -> dict:
    dist = entry.model.predict_distribution(x)
    return {
        "distribution": [{"class": c, "p": p} for c, p in dist.ranked()],
        "explanation": entry.model.explain_instance(x),
    }


def _lookup(registry: ModelRegistry, payload) -> RegisteredModel:
    if not isinstance(payload, Mapping):
        raise RequestProblem(422, "request body must be a JSON object")
    state = payload.get("state")
    kind = payload.get("kind")
    if not isinstance(state, str) or not isinstance(kind, str):
        raise RequestProblem(422, "state and kind must be strings")
    entry = registry.get(state, kind)
    if entry is None:
        raise RequestProblem(404, f"no model for state={state!r} kind={kind!r}")
    return entry


def create_app(registry: ModelRegistry, grid: SeismicGrid | None = None) -> FastAPI:
    app = FastAPI(title="bridge design advisor")

    @app.exception_handler(RequestProblem)
    async def _problem(request, exc: RequestProblem):
        return JSONResponse(status_code=exc.status, content={"detail": exc.message})

    @app.exception_handler(Exception)
    async def _unexpected(request, exc: Exception):
        log.exception("request failed")
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/models")
    def list_models():
        return [
            {
                "state": e.state,
                "kind": e.kind,
                "attributes": [a.name for a in e.model.schema if a.role == "feature"],
                "feature_schema": [
                    {"name": a.name, "kind": a.kind, "values": list(a.values)}
                    for a in e.model.schema if a.role == "feature"
                ],
                "classes": list(e.model.classes),
                "cv_recall": e.metadata.get("cv_recall"),
                "trained_at": e.metadata.get("trained_at"),
            }
            for e in registry.entries()
        ]

    @app.post("/predict")
    def predict(payload: dict):
        entry = _lookup(registry, payload)
        x = _coerce_features(entry, payload.get("features") or {}, grid)
        return _prediction_body(entry, x)

    @app.post("/whatif")
    def whatif(payload: dict):
        entry = _lookup(registry, payload)
        vary = payload.get("vary")
        if not isinstance(vary, str):
            raise RequestProblem(422, "vary must name a nominal attribute")
        attr = next((a for a in entry.model.schema
                     if a.name == vary and a.role == "feature"), None)
        if attr is None:
            raise RequestProblem(422, f"unknown attribute {vary!r}")
        if attr.kind != NOMINAL:
            raise RequestProblem(422, f"attribute {vary!r} is numeric; what-if requires nominal")
        features = payload.get("features") or {}
        if not isinstance(features, Mapping):
            raise RequestProblem(422, "features must be an object of name: value")
        base = _coerce_features(entry, features, grid)
        rows = []
        for label in attr.values:
            varied = dict(features)
            varied[vary] = label
            x = _coerce_features(entry, varied, grid)
            rows.append({"value": label, **_prediction_body(entry, x)})
        return {"vary": vary, "base": _prediction_body(entry, base), "rows": rows}

    @app.post("/admin/reload")
    def reload_models():
        return {"models": registry.reload()}

    return app
