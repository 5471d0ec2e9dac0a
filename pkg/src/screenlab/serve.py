"""HTTP service for the screening client.

Endpoints:
  POST /api/v1/predict  questionnaire answers -> rule score + model prediction
  GET  /api/v1/model    loaded-model card (kind, schema summary, training info)
  GET  /health          503 until a model is loaded, 200 afterwards

Every prediction response carries the deterministic questionnaire outcome
next to the model's, with an explicit flag when they disagree: the scoring
rule is the labeling ground truth, the model is the learned screener.
Submitted answers are never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .ensemble import EnsembleModel, predict_ensemble
from .features import encode_record
from .mlp import MlpModel, predict_mlp
from .persist import load, model_digest, model_kind
from .records import (
    FieldError,
    ValidationError,
    derive_label,
    record_from_payload,
)
from .tree import TreeModel, predict_tree


@dataclass
class LoadedModel:
    model: object
    kind: str
    model_id: str

    def predict(self, row) -> tuple[str, float]:
        if isinstance(self.model, TreeModel):
            return predict_tree(self.model, row)
        if isinstance(self.model, EnsembleModel):
            return predict_ensemble(self.model, row)
        return predict_mlp(self.model, row)


def _error_response(status: int, errors: list[dict]) -> JSONResponse:
    return JSONResponse(status_code=status, content={"errors": errors})


def _age_semantically_impossible(payload) -> bool:
    """True when age_months parses as an integer but cannot be an age."""
    if not isinstance(payload, dict):
        return False
    age = payload.get("age_months")
    if isinstance(age, str) and age.strip().lstrip("+-").isdigit():
        age = int(age.strip())
    return isinstance(age, int) and not isinstance(age, bool) and age <= 0


def create_app(model_path=None, cors_origins=None) -> FastAPI:
    """Build the service; with no model path the service is up but
    reports itself unready (503) until load_model is called."""
    app = FastAPI(title="screenlab", docs_url=None, redoc_url=None)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )
    app.state.loaded = None

    def load_model(path) -> None:
        model, _ = load(path)
        app.state.loaded = LoadedModel(
            model=model, kind=model_kind(model), model_id=model_digest(path)
        )

    app.state.load_model = load_model
    if model_path is not None:
        load_model(model_path)

    @app.get("/health")
    def health():
        if app.state.loaded is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok"}

    @app.get("/api/v1/model")
    def model_card():
        loaded = app.state.loaded
        if loaded is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        model = loaded.model
        schema = model.schema
        card = {
            "model_kind": loaded.kind,
            "model_id": loaded.model_id,
            "positive_class": model.positive_class,
            "schema": {
                "n_columns": schema.n_columns,
                "columns": list(schema.column_names),
                "groups": {g: schema.categories(g) for g in schema.groups},
            },
        }
        if isinstance(model, TreeModel):
            card["training"] = {
                "criterion": model.params.criterion,
                "pruned": model.params.prune,
                "nodes": model.node_count(),
            }
        elif isinstance(model, EnsembleModel):
            card["training"] = {
                "n_trees": model.params.n_trees,
                "mtry": model.params.mtry,
                "seed": model.params.seed,
            }
        else:
            card["training"] = {
                "layer_sizes": list(model.layer_sizes),
                "converged": model.converged,
                "final_error": model.final_error,
                "epochs_run": model.epochs_run,
            }
        return card

    @app.post("/api/v1/predict")
    async def predict(request: Request):
        loaded = app.state.loaded
        if loaded is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        try:
            payload = await request.json()
        except Exception:
            return _error_response(400, [{"field": "body", "message": "not valid JSON"}])
        if not isinstance(payload, dict):
            return _error_response(400, [{"field": "body", "message": "expected a JSON object"}])
        if _age_semantically_impossible(payload):
            return _error_response(
                422, [{"field": "age_months", "message": "must be a positive number of months"}]
            )
        try:
            record = record_from_payload(payload)
        except FieldError as err:
            return _error_response(400, [{"field": err.field, "message": err.message}])
        except ValidationError as err:
            return _error_response(400, [{"field": "body", "message": str(err)}])
        row, warnings = encode_record(record, loaded.model.schema)
        label, score = loaded.predict(row)
        rule_label = derive_label(record.qchat_score)
        return {
            "qchat_score": record.qchat_score,
            "qchat_label": rule_label,
            "label": label,
            "score": score,
            "model_kind": loaded.kind,
            "model_id": loaded.model_id,
            "warnings": warnings,
            "rule_model_disagree": label != rule_label,
        }

    return app


def run(model_path, host: str = "127.0.0.1", port: int = 8080,
        cors_origins=None) -> None:
    import uvicorn

    app = create_app(model_path=model_path, cors_origins=cors_origins)
    uvicorn.run(app, host=host, port=port, log_level="warning")
