"""Class-per-subdirectory image folders: scanning, split planning, decoding."""

from dataclasses import dataclass
from itertools import zip_longest
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, JobError, SplitTooLarge

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".webp"}


@dataclass(frozen=True)
class Example:
    path: Path
    label: int


def scan_classes(data_dir) -> list[tuple[str, list[Path]]]:
    """List (class_name, image_paths) sorted by directory name.

    The position of a class in this listing is its label.
    """
    root = Path(data_dir)
    if not root.is_dir():
        raise JobError(f"dataset directory {root} does not exist")
    classes = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        files = sorted(p for p in sub.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise JobError(f"class directory {sub} contains no images")
        classes.append((sub.name, files))
    if len(classes) < 2:
        raise JobError(f"{root}: found {len(classes)} class directories, need at least 2")
    return classes


def plan_splits(classes, n_train: int, n_val: int) -> tuple[list[Example], list[Example]]:
    """Deterministic train/val assignment over the whole dataset.

    Sizes are totals. Classes are interleaved (first image of each class,
    then the second of each, ...) so every class appears early in both
    splits; no randomness is involved.
    """
    total = sum(len(files) for _, files in classes)
    if n_train + n_val > total:
        raise SplitTooLarge(
            f"requested {n_train} train + {n_val} val but only {total} images exist"
        )
    ordered = []
    for row in zip_longest(*(files for _, files in classes)):
        for label, path in enumerate(row):
            if path is not None:
                ordered.append(Example(path=path, label=label))
    return ordered[:n_train], ordered[n_train : n_train + n_val]


def load_image(path, input_size: int) -> np.ndarray:
    """Decode to a float32 CHW array in [0, 1].

    Shorter side resized to input_size (bilinear), then a center crop to a
    square. Intentionally free of model-specific normalization.
    """
    try:
        with Image.open(path) as img:
            img = img.convert("RGB")
            w, h = img.size
            scale = input_size / min(w, h)
            img = img.resize(
                (max(input_size, round(w * scale)), max(input_size, round(h * scale))),
                Image.Resampling.BILINEAR,
            )
            w, h = img.size
            left = (w - input_size) // 2
            top = (h - input_size) // 2
            img = img.crop((left, top, left + input_size, top + input_size))
            arr = np.asarray(img, dtype=np.float32) / 255.0
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from None
    return arr.transpose(2, 0, 1)


def load_batch(examples, input_size: int) -> np.ndarray:
    return np.stack([load_image(ex.path, input_size) for ex in examples])
