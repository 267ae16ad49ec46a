"""Synthetic texture benchmark: smoothed noise with class-specific correlation.

Each class is white Gaussian noise blurred by an anisotropic Gaussian kernel,
so the classes differ in correlation length and orientation. Colour channels
get independent noise fields, and each image is min-max stretched to 0..255.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

# (sigma_rows, sigma_cols) per class
TEXTURE_CLASSES = {
    "fine": (0.8, 0.8),
    "coarse": (3.0, 3.0),
    "horizontal": (0.8, 4.0),
    "vertical": (4.0, 0.8),
}


def texture_image(sigma, size: int = 64, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    planes = []
    for _ in range(3):
        field = gaussian_filter(rng.standard_normal((size, size)), sigma, mode="wrap")
        field -= field.min()
        field *= 255.0 / field.max()
        planes.append(np.rint(field))
    return np.stack(planes, axis=2).astype(np.uint8)


def texture_benchmark(per_class: int = 50, size: int = 64, seed: int = 0):
    """Return ``(images, labels)`` for the four-class benchmark."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for name, sigma in TEXTURE_CLASSES.items():
        for _ in range(per_class):
            images.append(texture_image(sigma, size, rng))
            labels.append(name)
    return images, labels


def write_texture_dataset(root, per_class: int = 50, size: int = 64, seed: int = 0) -> Path:
    """Write the benchmark as ``root/<class>/<nnn>.png``."""
    root = Path(root)
    images, labels = texture_benchmark(per_class, size, seed)
    counters: dict[str, int] = {}
    for img, label in zip(images, labels):
        n = counters.get(label, 0)
        counters[label] = n + 1
        out = root / label
        out.mkdir(parents=True, exist_ok=True)
        Image.fromarray(img).save(out / f"{n:03d}.png")
    return root
