"""Image dataset handling for the two vision pipelines.

Images are plain NHWC float64 arrays with values in [0, 1] and three
channels (grayscale inputs are replicated). Directory scanning, bilinear
resizing, random rotate/scale augmentation and label binarization all
live here; Pillow is used only to decode and its formats are restricted
to PNG and JPEG.
"""

from __future__ import annotations

import io
import logging
import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .tabular import encode_categorical

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass
class ImageFolderDataset:
    """(path, class index) pairs from a class-per-subdirectory layout."""

    items: list[tuple[str, int]]
    class_names: list[str]
    skipped: int = 0

    def __post_init__(self):
        for path, idx in self.items:
            if not 0 <= idx < len(self.class_names):
                raise ValueError(f"class index {idx} out of range for {path}")

    @property
    def n(self) -> int:
        return len(self.items)

    def labels(self) -> np.ndarray:
        return np.array([idx for _, idx in self.items], dtype=np.int64)


@dataclass(frozen=True)
class AugmentConfig:
    rotation_degrees: float = 15.0
    scale_range: tuple[float, float] = (0.9, 1.1)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rotation_degrees <= 180.0:
            raise ValueError("rotation_degrees must be in [0, 180]")
        lo, hi = self.scale_range
        if lo <= 0 or hi <= 0 or lo > hi:
            raise ValueError("scale_range bounds must be positive with low <= high")


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG or JPEG bytes to (H, W, 3) float64 in [0, 1]."""
    try:
        im = Image.open(io.BytesIO(data))
    except Exception as exc:
        raise ValueError(f"could not decode image: {exc}") from exc
    with im:
        if im.format not in ("PNG", "JPEG"):
            raise ValueError(f"unsupported image format {im.format!r}; only PNG and JPEG are accepted")
        if im.mode != "RGB":
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.float64) / 255.0


def load_image(path: str) -> np.ndarray:
    """Decode a PNG or JPEG file to (H, W, 3) float64 in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return decode_image(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def scan_image_dir(root: str) -> ImageFolderDataset:
    """Walk `<root>/<class_name>/**` collecting PNG/JPEG paths.

    Class names are the subdirectory names sorted lexicographically; items
    are path-sorted within each class so the scan is deterministic.
    Non-image entries are skipped and counted, with a warning logged.
    """
    if not os.path.isdir(root):
        raise FileNotFoundError(f"image root not found: {root}")
    class_names = sorted(e.name for e in os.scandir(root) if e.is_dir())
    if not class_names:
        raise ValueError(f"{root}: no class subdirectories")
    items: list[tuple[str, int]] = []
    skipped = 0
    for index, name in enumerate(class_names):
        found = []
        for dirpath, dirnames, filenames in os.walk(os.path.join(root, name)):
            dirnames.sort()
            for fname in sorted(filenames):
                path = os.path.join(dirpath, fname)
                if fname.lower().endswith(IMAGE_EXTENSIONS):
                    found.append(path)
                else:
                    skipped += 1
        items.extend((p, index) for p in sorted(found))
    if not items:
        raise ValueError(f"{root}: class subdirectories contain no PNG/JPEG images")
    if skipped:
        log.warning("scan of %s skipped %d non-image entries", root, skipped)
    return ImageFolderDataset(items, class_names, skipped)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resize; values stay inside [0, 1]."""
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be >= 1")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    rows = np.arange(out_h) * ((h - 1) / (out_h - 1)) if out_h > 1 else np.array([(h - 1) / 2.0])
    cols = np.arange(out_w) * ((w - 1) / (out_w - 1)) if out_w > 1 else np.array([(w - 1) / 2.0])
    grid_r, grid_c = np.meshgrid(rows, cols, indexing="ij")
    return _bilinear_sample(img, grid_r, grid_c, fill=None)


def _bilinear_sample(img: np.ndarray, src_r: np.ndarray, src_c: np.ndarray, fill=0.0) -> np.ndarray:
    """Sample `img` at fractional (row, col) positions.

    fill=None asserts every sample lies inside the frame (resize);
    otherwise out-of-frame samples take the fill value (augmentation).
    """
    h, w = img.shape[:2]
    r0 = np.floor(src_r).astype(np.int64)
    c0 = np.floor(src_c).astype(np.int64)
    fr = src_r - r0
    fc = src_c - c0
    r0c = np.clip(r0, 0, h - 1)
    r1c = np.clip(r0 + 1, 0, h - 1)
    c0c = np.clip(c0, 0, w - 1)
    c1c = np.clip(c0 + 1, 0, w - 1)
    if img.ndim == 3:
        fr = fr[..., None]
        fc = fc[..., None]
    top = img[r0c, c0c] * (1 - fc) + img[r0c, c1c] * fc
    bottom = img[r1c, c0c] * (1 - fc) + img[r1c, c1c] * fc
    out = top * (1 - fr) + bottom * fr
    if fill is not None:
        inside = (src_r >= 0) & (src_r <= h - 1) & (src_c >= 0) & (src_c <= w - 1)
        out = np.where(inside[..., None] if img.ndim == 3 else inside, out, fill)
    return out


def rotate_scale(img: np.ndarray, angle_degrees: float, scale: float) -> np.ndarray:
    """Rotate about the image center and scale, bilinear resampling with
    zero fill outside the original frame. Positive angles turn the image
    clockwise on screen. Output shape equals input shape."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    theta = math.radians(angle_degrees)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rows, cols = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    xd = cols - cx
    yd = rows - cy
    # inverse map: rotate destination offsets by -theta, undo the scale
    xs = (math.cos(theta) * xd + math.sin(theta) * yd) / scale
    ys = (-math.sin(theta) * xd + math.cos(theta) * yd) / scale
    return _bilinear_sample(img, ys + cy, xs + cx, fill=0.0)


def augment(img: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """One random rotate+scale draw from `rng` applied to one image."""
    angle = rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees)
    scale = rng.uniform(cfg.scale_range[0], cfg.scale_range[1])
    return rotate_scale(img, angle, scale)


def make_augment_fn(cfg: AugmentConfig):
    """Adapt augment to the training loop's (batch, rng) -> batch hook, so
    each epoch sees freshly drawn variants and originals stay untouched."""

    def augment_batch(batch: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.stack([augment(img, cfg, rng) for img in batch])

    return augment_batch


def binarize_labels(dataset: ImageFolderDataset) -> tuple[np.ndarray, list[str]]:
    """Class labels as a single 0/1 column (two classes) or one-hot matrix
    (three or more), mirroring the tabular categorical encoding."""
    values = [dataset.class_names[idx] for _, idx in dataset.items]
    if len(set(values)) < 2:
        raise ValueError("need at least two distinct classes to binarize labels")
    return encode_categorical(values)


def load_image_dataset(dataset: ImageFolderDataset, size: tuple[int, int]) -> np.ndarray:
    """Decode and resize every item to (n, H, W, 3) in dataset order."""
    out_h, out_w = size
    return np.stack([resize_bilinear(load_image(path), out_h, out_w) for path, _ in dataset.items])
