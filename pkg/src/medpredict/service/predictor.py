"""Request payload validation and the bridge from HTTP inputs to models."""

from __future__ import annotations

import math

import numpy as np

from ..ensemble import predict
from ..neuralnet import SequentialNet, predict_proba
from ..persistence import LoadedArtifact
from ..vision import decode_image, resize_bilinear


class FeatureValidationError(ValueError):
    """Raised with the full list of offending fields, not just the first."""

    def __init__(self, message: str, fields: list[str]):
        super().__init__(message)
        self.fields = fields


def _is_number(value) -> bool:
    # bool is an int subclass but true/false are not measurements
    if isinstance(value, bool):
        return False
    return isinstance(value, (int, float)) and math.isfinite(value)


def validate_features(feature_names: list[str], body) -> np.ndarray:
    """Check a JSON body against the schema and return the feature row in
    schema order. Missing, unexpected and non-numeric fields are all
    collected so the caller sees every problem at once."""
    if not isinstance(body, dict):
        raise FeatureValidationError("request body must be a JSON object of named features", [])
    known = set(feature_names)
    missing = [name for name in feature_names if name not in body]
    extra = [key for key in body if key not in known]
    bad = [name for name in feature_names if name in body and not _is_number(body[name])]
    if missing or extra or bad:
        parts = []
        if missing:
            parts.append("missing: " + ", ".join(missing))
        if extra:
            parts.append("unexpected: " + ", ".join(extra))
        if bad:
            parts.append("non-numeric: " + ", ".join(bad))
        raise FeatureValidationError("invalid features (" + "; ".join(parts) + ")", missing + extra + bad)
    return np.array([float(body[name]) for name in feature_names], dtype=np.float64)


def predict_tabular(artifact: LoadedArtifact, body) -> tuple[str, float]:
    """Validate, scale with the stored scaler, predict. Returns the
    predicted class name and its probability."""
    x = validate_features(artifact.schema.feature_names, body)
    if artifact.scaler is not None:
        x = artifact.scaler.transform(x)
    result = predict(artifact.model, x)
    label = artifact.schema.class_names[result.class_index]
    return label, float(result.probabilities[result.class_index])


def predict_image(artifact: LoadedArtifact, data: bytes) -> tuple[str, float]:
    """Decode an uploaded PNG/JPEG, resize to the model's input size and
    run an eval-mode forward pass. Raises ValueError on undecodable data."""
    if not data:
        raise ValueError("could not decode image: the upload is empty")
    img = decode_image(data)
    height, width = artifact.schema.image_size
    if img.shape[:2] != (height, width):
        img = resize_bilinear(img, height, width)
    model = artifact.model
    if not isinstance(model, SequentialNet):
        raise ValueError(f"the {artifact.model_kind} model does not take images")
    probs = predict_proba(model, img[np.newaxis], batch_size=1)[0]
    idx = int(np.argmax(probs))
    return artifact.schema.class_names[idx], float(probs[idx])
