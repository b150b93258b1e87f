"""FastAPI application factory for the prediction service.

Single-user desk deployment: no authentication, CORS open so the bundled
web UI (or a dev server) can call the API from any origin. The model
registry is loaded once at startup and never mutated, so concurrent
requests need no locking.
"""

from __future__ import annotations

import json
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .advice import advice_for
from .predictor import FeatureValidationError, predict_image, predict_tabular
from .registry import load_registry
from .schemas import HealthResponse, ModelInfo, PredictResponse

log = logging.getLogger(__name__)

DEFAULT_MAX_BODY_BYTES = 10 * 1024 * 1024


class ApiError(Exception):
    """Carries an HTTP status plus the JSON error body {error, fields?}."""

    def __init__(self, status_code: int, error: str, fields: list[str] | None = None):
        super().__init__(error)
        self.status_code = status_code
        self.error = error
        self.fields = fields


def create_app(models_dir: str, static_dir: str | None = None, max_body_bytes: int = DEFAULT_MAX_BODY_BYTES) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.registry = load_registry(models_dir)
        yield

    app = FastAPI(title="disease prediction service", lifespan=lifespan)
    app.state.registry = None  # not loaded until startup runs

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        body = {"error": exc.error}
        if exc.fields is not None:
            body["fields"] = exc.fields
        return JSONResponse(status_code=exc.status_code, content=body)

    def registry_or_503():
        registry = app.state.registry
        if registry is None:
            raise ApiError(503, "service is still loading its models")
        return registry

    @app.get("/health", response_model=HealthResponse)
    async def health():
        registry = app.state.registry
        if registry is None:
            return JSONResponse(status_code=503, content={"status": "unavailable", "model_count": 0})
        return HealthResponse(status="ok", model_count=len(registry))

    @app.get("/models", response_model=list[ModelInfo])
    async def models():
        return [ModelInfo(**info) for info in registry_or_503().describe()]

    @app.post("/predict/{disease}", response_model=PredictResponse)
    async def predict_endpoint(disease: str, request: Request):
        registry = registry_or_503()
        artifact = registry.get(disease)
        if artifact is None:
            known = ", ".join(registry.diseases()) or "none"
            raise ApiError(404, f"unknown disease {disease!r}; available: {known}")

        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > max_body_bytes:
            raise ApiError(413, f"request body exceeds the {max_body_bytes} byte limit")

        content_type = request.headers.get("content-type", "")
        if artifact.schema.input_kind == "image":
            if not content_type.startswith("multipart/form-data"):
                raise ApiError(415, f"{disease} takes a multipart image upload, not {content_type or 'an empty content type'}")
            form = await request.form()
            uploads = [v for v in form.values() if hasattr(v, "read")]
            if len(uploads) != 1:
                raise ApiError(422, f"expected exactly one uploaded image file, got {len(uploads)}")
            data = await uploads[0].read()
            if len(data) > max_body_bytes:
                raise ApiError(413, f"uploaded file exceeds the {max_body_bytes} byte limit")
            try:
                label, probability = predict_image(artifact, data)
            except ValueError as exc:
                raise ApiError(422, str(exc))
        else:
            if not content_type.startswith("application/json"):
                raise ApiError(415, f"{disease} takes a JSON body of named features, not {content_type or 'an empty content type'}")
            raw = await request.body()
            if len(raw) > max_body_bytes:
                raise ApiError(413, f"request body exceeds the {max_body_bytes} byte limit")
            try:
                body = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ApiError(422, f"request body is not valid JSON: {exc}")
            try:
                label, probability = predict_tabular(artifact, body)
            except FeatureValidationError as exc:
                raise ApiError(422, str(exc), fields=exc.fields)

        return PredictResponse(
            disease=disease,
            label=label,
            probability=probability,
            advice=advice_for(disease, label),
            model_kind=artifact.model_kind,
        )

    if static_dir is not None:
        # mounted last so the API routes above win the route match
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
