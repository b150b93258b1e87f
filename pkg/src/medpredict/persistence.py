"""Versioned binary serialization of trained models.

One artifact file carries the model, the feature/class schema and the
optional scaler it was trained with, so the serving path can never apply
mismatched preprocessing. The byte layout (fixed field order, little
endian, length prefixes, trailing CRC-32) is documented field by field in
docs/model-format.md; writes are atomic (temp file + rename) and the byte
stream is deterministic, so saving the same model twice gives identical
files.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
import zlib
from dataclasses import dataclass

import numpy as np

from .ensemble import (
    AdaBoostModel,
    BaggingModel,
    Internal,
    Leaf,
    LogisticModel,
    RandomForestModel,
    TreeConfig,
)
from .neuralnet import (
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    MaxPool2D,
    ReLU,
    SequentialNet,
    Softmax,
)
from .tabular import ScalerParams

MAGIC = b"MDPMODEL"
FORMAT_VERSION = 1
MODEL_KINDS = ("tree", "forest", "bagging", "adaboost", "logistic", "neuralnet")


class ModelFormatError(Exception):
    """Base for everything wrong with an artifact file."""


class BadMagicError(ModelFormatError):
    """The file does not start with the artifact magic: not a model file."""


class UnsupportedVersionError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


class TruncatedError(ModelFormatError):
    pass


@dataclass
class ArtifactSchema:
    """What the model consumes and produces, carried inside the artifact."""

    feature_names: list[str]
    class_names: list[str]
    target_name: str = ""
    input_kind: str = "tabular"
    image_size: tuple[int, int] | None = None

    def __post_init__(self):
        if self.input_kind not in ("tabular", "image"):
            raise ValueError(f"input_kind must be 'tabular' or 'image', got {self.input_kind!r}")
        if not self.class_names:
            raise ValueError("schema needs at least one class name")
        if self.input_kind == "image" and self.image_size is None:
            raise ValueError("image schemas need image_size")

    def to_json(self) -> str:
        data = {
            "feature_names": self.feature_names,
            "class_names": self.class_names,
            "target_name": self.target_name,
            "input_kind": self.input_kind,
            "image_size": list(self.image_size) if self.image_size else None,
        }
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ArtifactSchema":
        data = json.loads(text)
        size = data.get("image_size")
        return cls(
            feature_names=list(data["feature_names"]),
            class_names=list(data["class_names"]),
            target_name=data.get("target_name", ""),
            input_kind=data.get("input_kind", "tabular"),
            image_size=tuple(size) if size else None,
        )


@dataclass
class LoadedArtifact:
    model: object
    schema: ArtifactSchema
    scaler: ScalerParams | None
    model_kind: str
    disease_tag: str
    format_version: int


# -------------------------------------------------------- byte plumbing


class _Writer:
    def __init__(self):
        self.buf = bytearray()

    def u8(self, v):
        self.buf += struct.pack("<B", v)

    def u32(self, v):
        self.buf += struct.pack("<I", v)

    def i64(self, v):
        self.buf += struct.pack("<q", v)

    def f64(self, v):
        self.buf += struct.pack("<d", float(v))

    def text(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.buf += raw

    def f64_array(self, arr):
        arr = np.ascontiguousarray(arr, dtype="<f8")
        self.buf += struct.pack("<Q", arr.size)
        self.u32(arr.ndim)
        for extent in arr.shape:
            self.buf += struct.pack("<Q", extent)
        self.buf += arr.tobytes()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise TruncatedError(
                f"artifact ends mid-field: wanted {n} bytes at offset {self.offset}, "
                f"have {len(self.data) - self.offset}"
            )
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def u8(self):
        return struct.unpack("<B", self.take(1))[0]

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def i64(self):
        return struct.unpack("<q", self.take(8))[0]

    def f64(self):
        return struct.unpack("<d", self.take(8))[0]

    def text(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def f64_array(self) -> np.ndarray:
        size = struct.unpack("<Q", self.take(8))[0]
        ndim = self.u32()
        shape = tuple(struct.unpack("<Q", self.take(8))[0] for _ in range(ndim))
        expected = 1
        for extent in shape:
            expected *= extent
        if expected != size:
            raise ModelFormatError(f"array header inconsistent: {size} values vs shape {shape}")
        arr = np.frombuffer(self.take(size * 8), dtype="<f8").copy()
        return arr.reshape(shape)

    def done(self):
        if self.offset != len(self.data):
            raise ModelFormatError(f"{len(self.data) - self.offset} unexpected trailing bytes")


# ------------------------------------------------------------ tree codec


def _write_tree(w: _Writer, node):
    if isinstance(node, Leaf):
        w.u8(0)
        w.f64_array(node.class_counts)
    else:
        w.u8(1)
        w.u32(node.feature_index)
        w.f64(node.threshold)
        _write_tree(w, node.left)
        _write_tree(w, node.right)


def _read_tree(r: _Reader):
    tag = r.u8()
    if tag == 0:
        return Leaf(r.f64_array())
    if tag == 1:
        feature = r.u32()
        threshold = r.f64()
        return Internal(feature, threshold, _read_tree(r), _read_tree(r))
    raise ModelFormatError(f"unknown tree node tag {tag}")


def _write_tree_config(w: _Writer, cfg: TreeConfig):
    w.u32(cfg.max_depth)
    w.u32(cfg.min_samples_split)
    w.text(cfg.criterion)
    w.text(cfg.feature_subsample)


def _read_tree_config(r: _Reader) -> TreeConfig:
    return TreeConfig(
        max_depth=r.u32(),
        min_samples_split=r.u32(),
        criterion=r.text(),
        feature_subsample=r.text(),
    )


# --------------------------------------------------------- model codecs


def _write_forest(w: _Writer, model: RandomForestModel):
    w.u32(model.n_trees)
    w.i64(model.seed)
    w.u32(model.n_features)
    w.u32(len(model.class_names))
    for name in model.class_names:
        w.text(name)
    _write_tree_config(w, model.tree_configs[0])
    for tree in model.trees:
        _write_tree(w, tree)


def _read_forest(r: _Reader, kind: str):
    n_trees = r.u32()
    seed = r.i64()
    n_features = r.u32()
    class_names = [r.text() for _ in range(r.u32())]
    cfg = _read_tree_config(r)
    trees = [_read_tree(r) for _ in range(n_trees)]
    cls = BaggingModel if kind == "bagging" else RandomForestModel
    return cls(
        trees=trees,
        n_trees=n_trees,
        seed=seed,
        class_names=class_names,
        tree_configs=[cfg] * n_trees,
        n_features=n_features,
    )


def _write_adaboost(w: _Writer, model: AdaBoostModel):
    w.u32(len(model.stumps))
    w.u32(model.n_features)
    w.u32(len(model.class_names))
    for name in model.class_names:
        w.text(name)
    w.f64_array(np.asarray(model.alphas))
    for stump in model.stumps:
        _write_tree(w, stump)


def _read_adaboost(r: _Reader) -> AdaBoostModel:
    n_stumps = r.u32()
    n_features = r.u32()
    class_names = [r.text() for _ in range(r.u32())]
    alphas = r.f64_array().tolist()
    stumps = [_read_tree(r) for _ in range(n_stumps)]
    return AdaBoostModel(stumps=stumps, alphas=alphas, class_names=class_names, n_features=n_features)


def _write_logistic(w: _Writer, model: LogisticModel):
    w.u32(len(model.class_names))
    for name in model.class_names:
        w.text(name)
    w.f64_array(model.weights)
    w.f64(model.bias)
    w.f64(model.learning_rate)
    w.u32(model.epochs)


def _read_logistic(r: _Reader) -> LogisticModel:
    class_names = [r.text() for _ in range(r.u32())]
    weights = r.f64_array()
    return LogisticModel(
        weights=weights,
        bias=r.f64(),
        learning_rate=r.f64(),
        epochs=r.u32(),
        class_names=class_names,
    )


def _write_net(w: _Writer, net: SequentialNet):
    shape = net.input_shape or ()
    w.u32(len(shape))
    for extent in shape:
        w.u32(extent)
    w.u32(len(net.layers))
    for layer in net.layers:
        if isinstance(layer, Conv2D):
            w.text("conv")
            kh, kw, c_in, c_out = layer.weights.shape
            w.u32(kh)
            w.u32(c_in)
            w.u32(c_out)
            w.u32(layer.stride)
            w.text(layer.padding)
            w.f64_array(layer.weights)
            w.f64_array(layer.bias)
        elif isinstance(layer, MaxPool2D):
            w.text("maxpool")
            w.u32(layer.window)
            w.u32(layer.stride)
        elif isinstance(layer, ReLU):
            w.text("relu")
        elif isinstance(layer, Flatten):
            w.text("flatten")
        elif isinstance(layer, Dense):
            w.text("dense")
            w.f64_array(layer.weights)
            w.f64_array(layer.bias)
        elif isinstance(layer, Dropout):
            w.text("dropout")
            w.f64(layer.rate)
        elif isinstance(layer, Softmax):
            w.text("softmax")
        else:
            raise ValueError(f"cannot serialize layer type {type(layer).__name__}")


def _read_net(r: _Reader) -> SequentialNet:
    shape = tuple(r.u32() for _ in range(r.u32()))
    layers = []
    for _ in range(r.u32()):
        kind = r.text()
        if kind == "conv":
            kernel = r.u32()
            c_in = r.u32()
            c_out = r.u32()
            stride = r.u32()
            padding = r.text()
            layer = Conv2D.__new__(Conv2D)
            layer.weights = r.f64_array().reshape(kernel, kernel, c_in, c_out)
            layer.bias = r.f64_array()
            layer.stride = stride
            layer.padding = padding
            layer.grad_weights = np.zeros_like(layer.weights)
            layer.grad_bias = np.zeros_like(layer.bias)
            layer._cache = None
            layers.append(layer)
        elif kind == "maxpool":
            layers.append(MaxPool2D(r.u32(), r.u32()))
        elif kind == "relu":
            layers.append(ReLU())
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "dense":
            layer = Dense.__new__(Dense)
            layer.weights = r.f64_array()
            layer.bias = r.f64_array()
            layer.grad_weights = np.zeros_like(layer.weights)
            layer.grad_bias = np.zeros_like(layer.bias)
            layer._cache = None
            layers.append(layer)
        elif kind == "dropout":
            layers.append(Dropout(r.f64(), rng=np.random.default_rng(0)))
        elif kind == "softmax":
            layers.append(Softmax())
        else:
            raise ModelFormatError(f"unknown layer kind {kind!r}")
    net = SequentialNet(layers, input_shape=shape if shape else None)
    net.set_mode("eval")
    return net


_WRITERS = {
    "forest": _write_forest,
    "bagging": _write_forest,
    "adaboost": _write_adaboost,
    "logistic": _write_logistic,
    "neuralnet": _write_net,
    "tree": _write_tree,
}


def _kind_of(model) -> str:
    if isinstance(model, BaggingModel):
        return "bagging"
    if isinstance(model, RandomForestModel):
        return "forest"
    if isinstance(model, AdaBoostModel):
        return "adaboost"
    if isinstance(model, LogisticModel):
        return "logistic"
    if isinstance(model, SequentialNet):
        return "neuralnet"
    if isinstance(model, (Leaf, Internal)):
        return "tree"
    raise ValueError(f"cannot serialize model type {type(model).__name__}")


def _model_arrays(model):
    if isinstance(model, RandomForestModel):
        for tree in model.trees:
            yield from _tree_arrays(tree)
    elif isinstance(model, AdaBoostModel):
        yield np.asarray(model.alphas)
        for stump in model.stumps:
            yield from _tree_arrays(stump)
    elif isinstance(model, LogisticModel):
        yield model.weights
        yield np.asarray([model.bias])
    elif isinstance(model, SequentialNet):
        yield from model.parameters()
    elif isinstance(model, (Leaf, Internal)):
        yield from _tree_arrays(model)


def _tree_arrays(node):
    if isinstance(node, Leaf):
        yield node.class_counts
    else:
        yield np.asarray([node.threshold])
        yield from _tree_arrays(node.left)
        yield from _tree_arrays(node.right)


def _model_width(model) -> int | None:
    if isinstance(model, (RandomForestModel, AdaBoostModel)):
        return model.n_features
    if isinstance(model, LogisticModel):
        return int(model.weights.shape[0])
    return None


def _check_consistency(model, schema: ArtifactSchema, scaler: ScalerParams | None):
    width = _model_width(model)
    if schema.input_kind == "tabular":
        if width is not None and width != len(schema.feature_names):
            raise ValueError(
                f"model consumes {width} features but schema lists {len(schema.feature_names)}"
            )
        if scaler is not None and scaler.mean.shape[0] != len(schema.feature_names):
            raise ValueError("scaler length does not match schema feature count")
    else:
        if isinstance(model, SequentialNet) and model.input_shape is not None:
            if schema.image_size != tuple(model.input_shape[:2]):
                raise ValueError(
                    f"schema image_size {schema.image_size} does not match network input {model.input_shape[:2]}"
                )
    model_classes = getattr(model, "class_names", None)
    if model_classes is not None and list(model_classes) != list(schema.class_names):
        raise ValueError("model class names do not match schema class names")


# ------------------------------------------------------------ public API


def save(model, schema: ArtifactSchema, scaler: ScalerParams | None, path: str, disease_tag: str = "") -> int:
    """Serialize to `path` atomically. Returns the artifact size in bytes."""
    kind = _kind_of(model)
    for arr in _model_arrays(model):
        if not np.all(np.isfinite(arr)):
            raise ValueError("refusing to save a model with non-finite values")
    _check_consistency(model, schema, scaler)
    w = _Writer()
    w.buf += MAGIC
    w.u32(FORMAT_VERSION)
    w.text(kind)
    w.text(disease_tag)
    w.text(schema.to_json())
    if scaler is None:
        w.u8(0)
    else:
        w.u8(1)
        w.f64_array(scaler.mean)
        w.f64_array(scaler.std)
    _WRITERS[kind](w, model)
    w.u32(zlib.crc32(bytes(w.buf)) & 0xFFFFFFFF)
    data = bytes(w.buf)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(data)


def load(path: str) -> LoadedArtifact:
    """Read, verify (magic, checksum, version) and reconstruct an artifact."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(MAGIC):
        raise BadMagicError(f"{path}: not a model file (magic bytes missing)")
    if len(data) < len(MAGIC) + 8:
        raise TruncatedError("artifact too short to hold version and checksum")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    actual_crc = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumError(
            f"checksum mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )
    r = _Reader(data[:-4])
    r.take(len(MAGIC))
    version = r.u32()
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"artifact format version {version} is not supported; this build reads version {FORMAT_VERSION}"
        )
    kind = r.text()
    if kind not in MODEL_KINDS:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    disease_tag = r.text()
    schema = ArtifactSchema.from_json(r.text())
    scaler = None
    if r.u8():
        scaler = ScalerParams(r.f64_array(), r.f64_array())
    if kind in ("forest", "bagging"):
        model = _read_forest(r, kind)
    elif kind == "adaboost":
        model = _read_adaboost(r)
    elif kind == "logistic":
        model = _read_logistic(r)
    elif kind == "neuralnet":
        model = _read_net(r)
    else:
        model = _read_tree(r)
    r.done()
    return LoadedArtifact(
        model=model,
        schema=schema,
        scaler=scaler,
        model_kind=kind,
        disease_tag=disease_tag,
        format_version=version,
    )
