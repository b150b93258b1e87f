"""Wire types for the prediction service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class PredictResponse(BaseModel):
    # "model_kind" is ours, not pydantic's model_* namespace
    model_config = ConfigDict(protected_namespaces=())

    disease: str
    label: str
    probability: float = Field(ge=0.0, le=1.0)
    advice: str
    model_kind: str


class ModelInfo(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    disease: str
    model_kind: str
    input_kind: str
    feature_names: list[str]
    class_names: list[str]
    image_size: list[int] | None = None


class HealthResponse(BaseModel):
    status: str
    model_count: int
