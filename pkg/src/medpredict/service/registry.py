"""Startup-time loading of model artifacts into an immutable registry."""

from __future__ import annotations

import logging
import os

from ..persistence import LoadedArtifact, ModelFormatError, load

log = logging.getLogger(__name__)

ARTIFACT_SUFFIX = ".model"


class ModelRegistry:
    """Maps disease tag to its loaded artifact. Read-only after creation;
    request handlers share it without locking."""

    def __init__(self, entries: dict[str, LoadedArtifact]):
        self._entries = dict(entries)

    def get(self, disease: str) -> LoadedArtifact | None:
        return self._entries.get(disease)

    def diseases(self) -> list[str]:
        return sorted(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def describe(self) -> list[dict]:
        """One summary per model, in disease order; feeds GET /models."""
        out = []
        for disease in self.diseases():
            art = self._entries[disease]
            info = {
                "disease": disease,
                "model_kind": art.model_kind,
                "input_kind": art.schema.input_kind,
                "feature_names": art.schema.feature_names,
                "class_names": art.schema.class_names,
                "image_size": list(art.schema.image_size) if art.schema.image_size else None,
            }
            out.append(info)
        return out


def load_registry(models_dir: str) -> ModelRegistry:
    """Load every *.model file in models_dir. The artifact's disease_tag
    names the entry; artifacts saved without a tag register under their
    file stem. Two artifacts claiming the same disease is a setup error."""
    if not os.path.isdir(models_dir):
        raise FileNotFoundError(f"models directory {models_dir!r} does not exist")
    entries: dict[str, LoadedArtifact] = {}
    for name in sorted(os.listdir(models_dir)):
        if not name.endswith(ARTIFACT_SUFFIX):
            continue
        path = os.path.join(models_dir, name)
        try:
            artifact = load(path)
        except ModelFormatError as exc:
            # one broken file must not take down the other models
            log.error("skipping %s: %s", name, exc)
            continue
        tag = artifact.disease_tag or name[: -len(ARTIFACT_SUFFIX)]
        if tag in entries:
            raise ValueError(f"two artifacts register the disease {tag!r} in {models_dir}")
        entries[tag] = artifact
        log.info("loaded %s model for %r from %s", artifact.model_kind, tag, name)
    if not entries:
        log.warning("no model artifacts (*%s) found in %s; service starts empty", ARTIFACT_SUFFIX, models_dir)
    return ModelRegistry(entries)
