"""BiTW descriptor: channel biodiversity plus subband taxonomic features.

Layout of the feature vector (``levels = 3`` gives 297 values)::

    bio.R.*  bio.G.*  bio.B.*                      3 x 9 biodiversity features
    taxo.R.h1.*  taxo.R.v1.*  ...  taxo.R.a3.*     10 x 9 per channel
    taxo.G.h1.*  ...
    taxo.B.h1.*  ...  taxo.B.a3.*

Biodiversity is measured on the raw 8-bit channels only. Taxonomic features
are measured on wavelet subbands after an affine min-max quantization to
``bins`` levels, since the coefficients are real-valued and may be negative.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dwt import WaveletConfig, decompose_pyramid, subband_names
from .eco import BIODIVERSITY_NAMES, biodiversity_vector
from .errors import NonFiniteCoefficient
from .raster import CHANNEL_NAMES, ImageSample, sample_from_array, split_channels
from .taxo import TAXONOMIC_NAMES, Distance, taxonomic_vector

DEFAULT_BINS = 256


@dataclass(frozen=True)
class QuantizedSubband:
    levels: np.ndarray
    bins: int
    min_c: float
    max_c: float


def quantize_subband(grid, bins: int = DEFAULT_BINS) -> QuantizedSubband:
    """Map real coefficients onto ``0..bins-1`` by an affine min-max map.

    The level is the nearest integer to ``(x - min) / (max - min) * (bins - 1)``.
    Halfway cases are rounded away from the midpoint of the range, so the
    result commutes exactly with negating the grid (level ``L`` becomes
    ``bins - 1 - L``). With an even number of bins a value exactly at the
    midpoint has no such image; it goes to the side holding more mass
    (compared by count, then by sorted distance from the midpoint) and up
    when both sides are mirror images. A constant grid maps to all zeros.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    x = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteCoefficient("subband contains NaN or infinite coefficients")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return QuantizedSubband(np.zeros(x.shape, dtype=np.int64), bins, lo, hi)

    half = (bins - 1) / 2
    # (x - lo) - (hi - x) is exactly negated when x, lo, hi are
    centred = ((x - lo) - (hi - x)) / (hi - lo) * half
    mag = np.abs(centred)
    if bins % 2:
        offset = np.floor(mag + 0.5)
    else:
        offset = np.floor(mag) + 0.5
    offset = np.where(centred < 0, -offset, offset)
    if bins % 2 == 0:
        mid = centred == 0
        if mid.any():
            offset[mid] = 0.5 if _upper_side_heavier(centred) else -0.5
    levels = (offset + half).astype(np.int64)
    np.clip(levels, 0, bins - 1, out=levels)
    return QuantizedSubband(levels, bins, lo, hi)


def _upper_side_heavier(centred: np.ndarray) -> bool:
    above = np.sort(centred[centred > 0])
    below = np.sort(-centred[centred < 0])
    if len(above) != len(below):
        return len(above) > len(below)
    diff = np.flatnonzero(above != below)
    if diff.size == 0:
        return True
    i = diff[0]
    return bool(above[i] > below[i])


def feature_count(levels: int = 3) -> int:
    return 9 * 3 + 9 * 3 * (3 * levels + 1)


@lru_cache(maxsize=None)
def feature_names(levels: int = 3) -> tuple[str, ...]:
    names = [f"bio.{c}.{f}" for c in CHANNEL_NAMES for f in BIODIVERSITY_NAMES]
    names += [
        f"taxo.{c}.{band}.{f}"
        for c in CHANNEL_NAMES
        for band in subband_names(levels)
        for f in TAXONOMIC_NAMES
    ]
    return tuple(names)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    names: tuple[str, ...]

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))

    @property
    def biodiversity(self) -> np.ndarray:
        return self.values[:27]

    @property
    def taxonomic(self) -> np.ndarray:
        return self.values[27:]


def extract_bitw(
    sample,
    config: WaveletConfig | None = None,
    bins: int = DEFAULT_BINS,
    distance: Distance | None = None,
) -> FeatureVector:
    """Compute the BiTW descriptor of one RGB image.

    ``sample`` is an :class:`~bitw.raster.ImageSample` or an array accepted
    by :func:`~bitw.raster.sample_from_array`.
    """
    config = config or WaveletConfig()
    if not isinstance(sample, ImageSample):
        sample = sample_from_array(sample)
    channels = split_channels(sample)
    bio = [biodiversity_vector(ch) for ch in channels]
    taxo = []
    for ch in channels:
        pyramid = decompose_pyramid(ch, config)
        for _, grid in pyramid.subbands():
            taxo.append(taxonomic_vector(quantize_subband(grid, bins), distance))
    values = np.concatenate(bio + taxo)
    values.setflags(write=False)
    return FeatureVector(values, feature_names(config.levels))


def extract_many(samples, config=None, bins=DEFAULT_BINS, distance=None, threads: int = 1):
    """Extract descriptors for an iterable of samples, preserving input order."""
    def one(s):
        return extract_bitw(s, config, bins, distance)

    if threads <= 1:
        return [one(s) for s in samples]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, samples))
