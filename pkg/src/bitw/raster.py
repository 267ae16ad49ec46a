"""Image decoding, channel splitting and dataset enumeration."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, EmptyDataset, TooSmall, UnreadableDirectory

MIN_SIDE = 8
DEFAULT_EXTENSIONS = ("png", "tif", "tiff", "jpg", "jpeg")
CHANNEL_NAMES = ("R", "G", "B")

# Modes that Pillow maps onto 8-bit RGB without rescaling.
_EIGHT_BIT_MODES = {"1", "L", "LA", "La", "P", "PA", "RGB", "RGBA", "RGBa", "RGBX", "CMYK", "YCbCr", "LAB", "HSV"}


@dataclass(frozen=True)
class ImageSample:
    path: str
    label: str | None
    pixels: np.ndarray  # (H, W, 3) uint8

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


@dataclass(frozen=True)
class ChannelRaster:
    values: np.ndarray  # (H, W) integers in [0, levels)
    levels: int = 256

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError(f"gray-level count must be >= 2, got {self.levels}")
        if self.values.ndim != 2:
            raise ValueError("channel raster must be two-dimensional")
        if self.values.size and (self.values.min() < 0 or self.values.max() >= self.levels):
            raise ValueError(f"raster values must lie in [0, {self.levels - 1}]")


@dataclass(frozen=True)
class DatasetManifest:
    root: str
    samples: list[tuple[str, str]] = field(default_factory=list)
    classes: list[str] = field(default_factory=list)

    @property
    def paths(self) -> list[str]:
        return [p for p, _ in self.samples]

    @property
    def labels(self) -> list[str]:
        return [lab for _, lab in self.samples]

    def __len__(self):
        return len(self.samples)


def sample_from_array(pixels, path: str = "<array>", label: str | None = None) -> ImageSample:
    """Validate an in-memory array and wrap it as an :class:`ImageSample`.

    Accepts ``(H, W)`` grayscale, ``(H, W, 3)`` RGB or ``(H, W, 4)`` RGBA
    arrays. Grayscale is replicated to three channels and alpha is dropped.
    """
    arr = np.asarray(pixels)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[:, :, :3]
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DecodeError(f"{path}: expected 3 channels, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise DecodeError(f"{path}: pixel values must be integers")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise DecodeError(f"{path}: pixel values must lie in [0, 255]")
    h, w = arr.shape[:2]
    if h < MIN_SIDE or w < MIN_SIDE:
        raise TooSmall(f"{path}: image is {h}x{w}, minimum is {MIN_SIDE}x{MIN_SIDE}")
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    arr.setflags(write=False)
    return ImageSample(path=str(path), label=label, pixels=arr)


def load_image(path, label: str | None = None) -> ImageSample:
    """Decode a PNG/TIFF/JPEG file into an 8-bit RGB sample."""
    try:
        with Image.open(path) as img:
            if img.mode not in _EIGHT_BIT_MODES:
                raise DecodeError(f"{path}: unsupported pixel mode {img.mode!r}")
            img.load()
            rgb = img.convert("RGB")
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return sample_from_array(np.asarray(rgb), path=str(path), label=label)


def split_channels(sample: ImageSample) -> tuple[ChannelRaster, ChannelRaster, ChannelRaster]:
    px = sample.pixels
    return tuple(ChannelRaster(px[:, :, c], 256) for c in range(3))


def merge_channels(channels: Iterable[ChannelRaster]) -> np.ndarray:
    """Stack channel planes back into an ``(H, W, C)`` array."""
    return np.stack([c.values for c in channels], axis=2)


def _normalise_extensions(extension_filter) -> tuple[str, ...]:
    if extension_filter is None:
        return DEFAULT_EXTENSIONS
    if isinstance(extension_filter, str):
        extension_filter = extension_filter.split(",")
    return tuple(e.strip().lower().lstrip(".") for e in extension_filter if e.strip())


def scan_dataset(root_dir, extension_filter=None) -> DatasetManifest:
    """Enumerate ``root/<class>/<file>`` trees.

    Files below each class directory are collected recursively; hidden
    entries are ignored. Extension matching is case-insensitive. Samples are
    ordered bytewise on their path relative to *root_dir*, so the manifest is
    identical across runs and platforms.
    """
    root = Path(root_dir)
    exts = set(_normalise_extensions(extension_filter))
    if not root.is_dir():
        raise UnreadableDirectory(f"{root}: not a directory")
    try:
        class_dirs = [d for d in root.iterdir() if d.is_dir() and not d.name.startswith(".")]
    except OSError as exc:
        raise UnreadableDirectory(f"{root}: {exc}") from exc

    found: list[tuple[bytes, str, str]] = []
    for cdir in class_dirs:
        try:
            for dirpath, dirnames, filenames in os.walk(cdir, onerror=_raise_unreadable):
                dirnames[:] = [d for d in dirnames if not d.startswith(".")]
                for name in filenames:
                    if name.startswith("."):
                        continue
                    if name.rsplit(".", 1)[-1].lower() not in exts or "." not in name:
                        continue
                    full = Path(dirpath) / name
                    rel = full.relative_to(root).as_posix()
                    found.append((os.fsencode(rel), str(full), cdir.name))
        except OSError as exc:
            raise UnreadableDirectory(f"{cdir}: {exc}") from exc

    if not found:
        raise EmptyDataset(f"{root}: no images matching {sorted(exts)} in class subdirectories")
    found.sort(key=lambda t: t[0])
    samples = [(path, label) for _, path, label in found]
    classes = sorted({label for _, label in samples}, key=os.fsencode)
    return DatasetManifest(root=str(root), samples=samples, classes=classes)


def _raise_unreadable(exc: OSError):
    raise UnreadableDirectory(str(exc)) from exc
