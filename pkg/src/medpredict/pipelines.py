"""End-to-end train and evaluate pipelines for the built-in diseases.

Four diseases ship with schemas and model choices out of the box:
diabetes and heart (CSV, classical ensembles), lung and brain (image
folders, convolutional nets). Everything here is deterministic given the
seed in PipelineSettings; the CLI and tests rely on that.
"""

from __future__ import annotations

import configparser
import logging
from dataclasses import dataclass, field, fields

import numpy as np

from .ensemble import (
    TreeConfig,
    fit_adaboost,
    fit_bagging,
    fit_forest,
    fit_logistic,
    predict_batch,
)
from .metrics import ClassificationReport, ConfusionMatrix, confusion_matrix, report
from .neuralnet import SGDConfig, build_lung_cnn, build_vgg16, predict_proba, train
from .persistence import ArtifactSchema, LoadedArtifact
from .tabular import (
    ColumnSchema,
    Dataset,
    ScalerParams,
    impute_missing,
    load_csv,
    scale_features,
    select_features,
    train_test_split,
)
from .vision import (
    AugmentConfig,
    ImageFolderDataset,
    load_image_dataset,
    make_augment_fn,
    scan_image_dir,
)

log = logging.getLogger(__name__)

DISEASES = ("diabetes", "heart", "lung", "brain")
TABULAR_MODEL_KINDS = ("forest", "bagging", "adaboost", "logistic")
TRAIN_RATIO = 0.8  # the fixed 80/20 protocol

# folders with this name hold unlabeled images for manual prediction,
# not training examples
UNLABELED_FOLDER = "pred"

PIMA_SCHEMA = [
    ColumnSchema("Pregnancies"),
    ColumnSchema("Glucose", missing_marker=0),
    ColumnSchema("BloodPressure"),
    ColumnSchema("SkinThickness"),
    ColumnSchema("Insulin", missing_marker=0),
    ColumnSchema("BMI", missing_marker=0),
    ColumnSchema("DiabetesPedigreeFunction"),
    ColumnSchema("Age"),
    ColumnSchema("Outcome", kind="target"),
]
PIMA_FEATURES = ["Pregnancies", "Glucose", "Insulin", "BMI", "Age"]

HEART_SCHEMA = [
    ColumnSchema("age"),
    ColumnSchema("sex"),
    ColumnSchema("cp"),
    ColumnSchema("trestbps"),
    ColumnSchema("chol"),
    ColumnSchema("fbs"),
    ColumnSchema("restecg"),
    ColumnSchema("thalach"),
    ColumnSchema("exang"),
    ColumnSchema("oldpeak"),
    ColumnSchema("slope"),
    ColumnSchema("ca"),
    ColumnSchema("thal"),
    ColumnSchema("target", kind="target"),
]
HEART_FEATURES = ["age", "sex", "cp", "trestbps", "restecg", "thalach", "exang", "oldpeak", "slope", "ca", "thal"]

CSV_SCHEMAS = {"diabetes": PIMA_SCHEMA, "heart": HEART_SCHEMA}
CSV_FEATURES = {"diabetes": PIMA_FEATURES, "heart": HEART_FEATURES}


@dataclass(frozen=True)
class PipelineSettings:
    """Every tunable the pipelines consume, with desk-friendly defaults.

    The three `None` fields resolve per scale and disease at run time;
    a config file or explicit value pins them.
    """

    seed: int = 42
    scale: str = "desk"
    model_kind: str = "forest"
    n_trees: int = 25
    max_depth: int = 16
    min_samples_split: int = 2
    n_rounds: int = 50
    learning_rate: float = 0.1
    epochs: int = 300
    net_learning_rate: float = 0.01
    net_epochs: int | None = None
    batch_size: int = 32
    image_size: int | None = None
    max_images: int | None = None
    augment: bool = True
    rotation_degrees: float = 15.0
    scale_low: float = 0.9
    scale_high: float = 1.1

    def __post_init__(self):
        if self.scale not in ("desk", "full"):
            raise ValueError(f"scale must be 'desk' or 'full', got {self.scale!r}")
        if self.model_kind not in TABULAR_MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {TABULAR_MODEL_KINDS}, got {self.model_kind!r}")

    def resolved_image_size(self, disease: str) -> int:
        if self.image_size is not None:
            return self.image_size
        if self.scale == "full" and disease == "brain":
            return 224
        return 64

    def resolved_net_epochs(self, disease: str) -> int:
        if self.net_epochs is not None:
            return self.net_epochs
        if self.scale == "full":
            return 25 if disease == "lung" else 10
        return 20

    def resolved_max_images(self) -> int | None:
        if self.max_images is not None:
            return self.max_images
        return 300 if self.scale == "desk" else None


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _int_or_auto(raw: str):
    return None if raw.strip().lower() == "auto" else int(raw)


_CONFIG_PARSERS = {
    "seed": int,
    "scale": str,
    "model_kind": str,
    "n_trees": int,
    "max_depth": int,
    "min_samples_split": int,
    "n_rounds": int,
    "learning_rate": float,
    "epochs": int,
    "net_learning_rate": float,
    "net_epochs": _int_or_auto,
    "batch_size": int,
    "image_size": _int_or_auto,
    "max_images": _int_or_auto,
    "augment": _parse_bool,
    "rotation_degrees": float,
    "scale_low": float,
    "scale_high": float,
}
assert set(_CONFIG_PARSERS) == {f.name for f in fields(PipelineSettings)}


def load_settings_config(path: str) -> dict:
    """Read overrides from an INI file with a single [train] section.

    Returns only the keys present, so callers can layer them between
    defaults and command-line flags."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    extra_sections = [s for s in parser.sections() if s != "train"]
    if extra_sections:
        raise ValueError(f"config may only contain a [train] section; found {extra_sections}")
    if not parser.has_section("train"):
        raise ValueError("config file needs a [train] section")
    overrides = {}
    unknown = []
    for key, raw in parser.items("train"):
        if key not in _CONFIG_PARSERS:
            unknown.append(key)
            continue
        try:
            overrides[key] = _CONFIG_PARSERS[key](raw)
        except ValueError as exc:
            raise ValueError(f"config key {key!r}: {exc}") from exc
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return overrides


def resolve_settings(config_path: str | None = None, **flag_overrides) -> PipelineSettings:
    """Defaults, then config file values, then explicit flags (None skips)."""
    values = load_settings_config(config_path) if config_path else {}
    values.update({k: v for k, v in flag_overrides.items() if v is not None})
    return PipelineSettings(**values)


@dataclass
class TrainResult:
    disease: str
    model: object
    schema: ArtifactSchema
    scaler: ScalerParams | None
    cm: ConfusionMatrix
    report: ClassificationReport
    test_accuracy: float
    history: list = field(default_factory=list)


# ----------------------------------------------------------- tabular path


def _fit_tabular(X, y, settings: PipelineSettings, class_names: list[str]):
    cfg = TreeConfig(max_depth=settings.max_depth, min_samples_split=settings.min_samples_split)
    kind = settings.model_kind
    if kind == "forest":
        return fit_forest(X, y, cfg, settings.n_trees, settings.seed, class_names=class_names)
    if kind == "bagging":
        return fit_bagging(X, y, cfg, settings.n_trees, settings.seed, class_names=class_names)
    if kind == "adaboost":
        return fit_adaboost(X, y, settings.n_rounds, settings.seed, class_names=class_names)
    return fit_logistic(X, y, settings.learning_rate, settings.epochs, settings.seed, class_names=class_names)


def train_tabular(disease: str, csv_path: str, settings: PipelineSettings) -> TrainResult:
    """Ingest -> impute -> select -> scale -> split 80/20 -> fit -> report."""
    ds = load_csv(csv_path, CSV_SCHEMAS[disease])
    ds = impute_missing(ds, "median")
    ds = select_features(ds, CSV_FEATURES[disease])
    ds, scaler = scale_features(ds)
    split = train_test_split(ds, TRAIN_RATIO, settings.seed, stratified=True)
    model = _fit_tabular(split.train.rows, split.train.target, settings, ds.class_names)
    preds, _ = predict_batch(model, split.test.rows)
    cm = confusion_matrix(split.test.target, preds, ds.class_names)
    rep = report(cm)
    schema = ArtifactSchema(
        feature_names=ds.feature_names,
        class_names=ds.class_names,
        target_name=next(c.name for c in CSV_SCHEMAS[disease] if c.kind == "target"),
    )
    return TrainResult(disease, model, schema, scaler, cm, rep, rep.accuracy)


# ------------------------------------------------------------- image path


def drop_unlabeled_folder(folder: ImageFolderDataset) -> ImageFolderDataset:
    """Remove the conventional unlabeled-holdout folder from a scan."""
    if UNLABELED_FOLDER not in folder.class_names:
        return folder
    keep = [c for c in folder.class_names if c != UNLABELED_FOLDER]
    if len(keep) < 2:
        raise ValueError(f"after ignoring {UNLABELED_FOLDER!r}, fewer than 2 class folders remain")
    remap = {folder.class_names.index(c): i for i, c in enumerate(keep)}
    items = [(p, remap[l]) for p, l in folder.items if folder.class_names[l] != UNLABELED_FOLDER]
    dropped = len(folder.items) - len(items)
    log.info("ignoring %d images under %r (unlabeled holdout)", dropped, UNLABELED_FOLDER)
    return ImageFolderDataset(items=items, class_names=keep, skipped=folder.skipped)


def stratified_subsample(folder: ImageFolderDataset, cap: int, seed: int) -> ImageFolderDataset:
    """At most `cap` images total, split evenly across classes, drawn
    reproducibly. Classes short on images keep all they have."""
    k = len(folder.class_names)
    per_class = cap // k
    if per_class < 1:
        raise ValueError(f"cap {cap} leaves no room for {k} classes")
    labels = folder.labels()
    rng = np.random.default_rng([seed, 101])
    chosen = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size > per_class:
            members = rng.choice(members, size=per_class, replace=False)
        chosen.extend(members.tolist())
    chosen.sort()  # keep scan order for reproducible decode order
    items = [folder.items[i] for i in chosen]
    return ImageFolderDataset(items=items, class_names=folder.class_names, skipped=folder.skipped)


def _split_indices(labels: np.ndarray, class_names: list[str], seed: int):
    """Stratified 80/20 index split, reusing the tabular splitter so the
    rounding contract is identical everywhere."""
    carrier = Dataset(
        [ColumnSchema("index")],
        np.zeros((len(labels), 1)),
        labels,
        class_names,
    )
    split = train_test_split(carrier, TRAIN_RATIO, seed, stratified=True)
    return split.train_indices, split.test_indices


def _build_net(disease: str, size: int, n_classes: int, settings: PipelineSettings):
    if disease == "brain" and settings.scale == "full":
        if size != 224:
            raise ValueError("the full-scale brain network expects 224x224 inputs; set image_size = 224 or auto")
        return build_vgg16(n_classes=n_classes, seed=settings.seed)
    return build_lung_cnn(input_size=(size, size), n_classes=n_classes, in_channels=3, seed=settings.seed)


def train_image(disease: str, root: str, settings: PipelineSettings) -> TrainResult:
    """Scan folders -> subsample -> decode+resize -> split -> SGD -> report."""
    folder = drop_unlabeled_folder(scan_image_dir(root))
    cap = settings.resolved_max_images()
    if cap is not None and cap < len(folder.items):
        folder = stratified_subsample(folder, cap, settings.seed)
    size = settings.resolved_image_size(disease)
    X = load_image_dataset(folder, (size, size))
    labels = folder.labels()
    n_classes = len(folder.class_names)
    Y = np.eye(n_classes)[labels]
    train_idx, test_idx = _split_indices(labels, folder.class_names, settings.seed)

    net = _build_net(disease, size, n_classes, settings)
    augment_fn = None
    if disease == "brain" and settings.augment:
        augment_fn = make_augment_fn(
            AugmentConfig(
                rotation_degrees=settings.rotation_degrees,
                scale_range=(settings.scale_low, settings.scale_high),
                seed=settings.seed,
            )
        )
    cfg = SGDConfig(
        learning_rate=settings.net_learning_rate,
        batch_size=settings.batch_size,
        epochs=settings.resolved_net_epochs(disease),
        seed=settings.seed,
    )
    net, history = train(net, X[train_idx], Y[train_idx], cfg, augment_fn=augment_fn)

    probs = predict_proba(net, X[test_idx])
    preds = probs.argmax(axis=1)
    cm = confusion_matrix(labels[test_idx], preds, folder.class_names)
    rep = report(cm)
    schema = ArtifactSchema(
        feature_names=[],
        class_names=folder.class_names,
        input_kind="image",
        image_size=(size, size),
    )
    return TrainResult(disease, net, schema, None, cm, rep, rep.accuracy, history)


def train_disease(disease: str, data_path: str, settings: PipelineSettings) -> TrainResult:
    if disease not in DISEASES:
        raise ValueError(f"unknown disease {disease!r}; expected one of {DISEASES}")
    if disease in CSV_SCHEMAS:
        return train_tabular(disease, data_path, settings)
    return train_image(disease, data_path, settings)


# --------------------------------------------------------------- evaluate


def _generic_csv_schema(schema: ArtifactSchema) -> list[ColumnSchema]:
    cols = [ColumnSchema(name) for name in schema.feature_names]
    cols.append(ColumnSchema(schema.target_name or "target", kind="target"))
    return cols


def _remap_labels(found: list[str], wanted: list[str], y: np.ndarray) -> np.ndarray:
    index_of = {name: i for i, name in enumerate(wanted)}
    unknown = sorted(set(found) - set(wanted))
    if unknown:
        raise ValueError(f"dataset contains classes the model does not know: {', '.join(unknown)}")
    lookup = np.array([index_of[name] for name in found], dtype=np.int64)
    return lookup[y]


def evaluate_artifact(artifact: LoadedArtifact, data_path: str) -> tuple[ConfusionMatrix, ClassificationReport]:
    """Score a saved model on labeled data, reproducing its preprocessing."""
    if artifact.schema.input_kind == "tabular":
        base = CSV_SCHEMAS.get(artifact.disease_tag) or _generic_csv_schema(artifact.schema)
        ds = load_csv(data_path, base)
        if ds.n == 0:
            raise ValueError(f"{data_path} holds no data rows to evaluate on")
        ds = impute_missing(ds, "median")
        ds = select_features(ds, artifact.schema.feature_names)
        y_true = _remap_labels(ds.class_names, artifact.schema.class_names, ds.target)
        X = artifact.scaler.transform(ds.rows) if artifact.scaler else ds.rows
        preds, _ = predict_batch(artifact.model, X)
    else:
        folder = drop_unlabeled_folder(scan_image_dir(data_path))
        height, width = artifact.schema.image_size
        X = load_image_dataset(folder, (height, width))
        y_true = _remap_labels(folder.class_names, artifact.schema.class_names, folder.labels())
        preds = predict_proba(artifact.model, X).argmax(axis=1)
    cm = confusion_matrix(y_true, preds, artifact.schema.class_names)
    return cm, report(cm)
