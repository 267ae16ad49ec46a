"""Separable 2-D discrete wavelet transform built on two-channel filter banks.

Filters are applied by correlation at even offsets: for a 1-D signal ``x``
the low-pass output is ``a[k] = sum_m lo_d[m] * x[2k + m]`` and the high-pass
output uses ``hi_d`` the same way. Synthesis is the adjoint operation,
``x[2k + m] += lo_r[m] * a[k] + hi_r[m] * d[k]``, which is the exact inverse
for orthonormal banks (``lo_r == lo_d``).

Two boundary policies are supported:

``symmetric``
    Whole-sample symmetric extension (``x[-1] == x[1]``). Every coefficient
    whose support touches the signal is kept, so a length-``N`` signal yields
    ``(N - 1) // 2 + L // 2`` coefficients for a length-``L`` filter. For Haar
    this is ``ceil(N / 2)``.
``periodic``
    Circular extension. Odd-length signals are first extended by one sample
    (``x[N] = x[0]``), giving ``ceil(N / 2)`` coefficients for any filter.

In 2-D, rows are filtered and decimated first (along axis 1), then columns
(axis 0). ``h`` is row-low/column-high, ``v`` is row-high/column-low and
``d`` is high-pass in both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGrid, ShapeMismatch, TooShallow

BOUNDARIES = ("symmetric", "periodic")


@dataclass(frozen=True)
class FilterBank:
    name: str
    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray

    @classmethod
    def orthonormal(cls, name: str, lo) -> "FilterBank":
        """Build a quadrature-mirror bank from an orthonormal scaling filter."""
        lo = np.asarray(lo, dtype=float)
        hi = quadrature_mirror(lo)
        for arr in (lo, hi):
            arr.setflags(write=False)
        return cls(name, lo, hi, lo, hi)

    @property
    def length(self) -> int:
        return len(self.lo_d)


def quadrature_mirror(lo) -> np.ndarray:
    """``hi[k] = (-1)**k * lo[L - 1 - k]``."""
    lo = np.asarray(lo, dtype=float)
    signs = np.where(np.arange(len(lo)) % 2 == 0, 1.0, -1.0)
    return signs * lo[::-1]


_S = 1.0 / math.sqrt(2.0)
_R3 = math.sqrt(3.0)

_SCALING_FILTERS = {
    "haar": [_S, _S],
    "db2": [
        (1 + _R3) / (4 * math.sqrt(2.0)),
        (3 + _R3) / (4 * math.sqrt(2.0)),
        (3 - _R3) / (4 * math.sqrt(2.0)),
        (1 - _R3) / (4 * math.sqrt(2.0)),
    ],
    "db4": [
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ],
}
_ALIASES = {"db1": "haar"}

FAMILIES = tuple(_SCALING_FILTERS)


def get_filter_bank(family: str | FilterBank) -> FilterBank:
    if isinstance(family, FilterBank):
        return family
    key = _ALIASES.get(family.lower(), family.lower())
    try:
        return _BANKS[key]
    except KeyError:
        raise ValueError(f"unknown wavelet family {family!r}; choose from {FAMILIES}") from None


_BANKS = {name: FilterBank.orthonormal(name, lo) for name, lo in _SCALING_FILTERS.items()}


def _check_boundary(boundary: str) -> str:
    if boundary not in BOUNDARIES:
        raise ValueError(f"unknown boundary policy {boundary!r}; choose from {BOUNDARIES}")
    return boundary


def coefficient_count(n: int, filter_length: int, boundary: str) -> int:
    """Number of coefficients produced from a length-``n`` signal."""
    if boundary == "periodic":
        return (n + 1) // 2
    return (n - 1) // 2 + filter_length // 2


def _analysis_1d(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, boundary: str):
    """Filter and decimate along the last axis."""
    n = x.shape[-1]
    L = len(lo)
    pad = [(0, 0)] * (x.ndim - 1)
    if boundary == "periodic":
        if n % 2:
            x = np.concatenate([x, x[..., :1]], axis=-1)
        m = x.shape[-1] // 2
        ext = np.pad(x, pad + [(0, L - 2)], mode="wrap") if L > 2 else x
    else:
        m = coefficient_count(n, L, boundary)
        right = 2 * ((n - 1) // 2) + L - 1 - (n - 1)
        ext = np.pad(x, pad + [(L - 2, right)], mode="reflect")
    low = np.zeros(x.shape[:-1] + (m,))
    high = np.zeros(x.shape[:-1] + (m,))
    for k in range(L):
        seg = ext[..., k : k + 2 * m : 2]
        low += lo[k] * seg
        high += hi[k] * seg
    return low, high


def _synthesis_1d(low: np.ndarray, high: np.ndarray, lo: np.ndarray, hi: np.ndarray, boundary: str, n: int):
    """Adjoint of :func:`_analysis_1d`, cropped to ``n`` output samples."""
    m = low.shape[-1]
    L = len(lo)
    buf = np.zeros(low.shape[:-1] + (2 * m + L - 2,))
    for k in range(L):
        buf[..., k : k + 2 * m : 2] += lo[k] * low + hi[k] * high
    if boundary == "periodic":
        period = 2 * m
        out = buf[..., :period].copy()
        for start in range(period, buf.shape[-1], period):
            chunk = buf[..., start : start + period]
            out[..., : chunk.shape[-1]] += chunk
        return out[..., :n]
    return buf[..., L - 2 : L - 2 + n]


def _default_length(m: int, filter_length: int, boundary: str) -> int:
    if boundary == "periodic":
        return 2 * m
    return 2 * m - filter_length + 2


def _check_length(n: int, m: int, filter_length: int, boundary: str, axis: int):
    if n < 1 or coefficient_count(n, filter_length, boundary) != m:
        raise ShapeMismatch(f"{m} coefficients along axis {axis} cannot reconstruct {n} samples")


def dwt2_single_level(grid, bank="haar", boundary: str = "symmetric"):
    """One level of the separable 2-D DWT.

    Returns
    -------
    tuple of ndarray
        ``(a, h, v, d)``.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 2 or min(x.shape) < 2:
        raise DegenerateGrid(f"grid must be 2-D with both sides >= 2, got shape {x.shape}")
    bank = get_filter_bank(bank)
    _check_boundary(boundary)
    row_lo, row_hi = _analysis_1d(x, bank.lo_d, bank.hi_d, boundary)
    a, h = (t.swapaxes(0, 1) for t in _analysis_1d(row_lo.swapaxes(0, 1), bank.lo_d, bank.hi_d, boundary))
    v, d = (t.swapaxes(0, 1) for t in _analysis_1d(row_hi.swapaxes(0, 1), bank.lo_d, bank.hi_d, boundary))
    return a, h, v, d


def idwt2_single_level(a, h, v, d, bank="haar", boundary: str = "symmetric", shape=None):
    """Invert :func:`dwt2_single_level`.

    ``shape`` is the size of the grid that was decomposed. It is needed when
    that grid had an odd side; by default the even-sized candidate is used.
    """
    bands = [np.asarray(b, dtype=float) for b in (a, h, v, d)]
    if any(b.ndim != 2 for b in bands) or len({b.shape for b in bands}) != 1:
        raise ShapeMismatch(f"subband shapes differ: {[b.shape for b in bands]}")
    bank = get_filter_bank(bank)
    _check_boundary(boundary)
    L = bank.length
    m0, m1 = bands[0].shape
    if shape is None:
        shape = (_default_length(m0, L, boundary), _default_length(m1, L, boundary))
    rows, cols = shape
    _check_length(rows, m0, L, boundary, 0)
    _check_length(cols, m1, L, boundary, 1)
    a, h, v, d = (b.swapaxes(0, 1) for b in bands)
    row_lo = _synthesis_1d(a, h, bank.lo_r, bank.hi_r, boundary, rows).swapaxes(0, 1)
    row_hi = _synthesis_1d(v, d, bank.lo_r, bank.hi_r, boundary, rows).swapaxes(0, 1)
    return _synthesis_1d(row_lo, row_hi, bank.lo_r, bank.hi_r, boundary, cols)


@dataclass(frozen=True)
class WaveletConfig:
    family: str = "haar"
    levels: int = 3
    boundary: str = "symmetric"

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        _check_boundary(self.boundary)
        get_filter_bank(self.family)

    @property
    def bank(self) -> FilterBank:
        return get_filter_bank(self.family)


def subband_names(levels: int) -> list[str]:
    """``['h1', 'v1', 'd1', ..., 'hL', 'vL', 'dL', 'aL']``."""
    names = [f"{kind}{q}" for q in range(1, levels + 1) for kind in "hvd"]
    return names + [f"a{levels}"]


@dataclass
class SubbandPyramid:
    levels: list  # [(h, v, d)] for q = 1..L
    final_a: np.ndarray
    source_dims: tuple
    level_dims: list = field(default_factory=list)  # input dims at each level
    config: WaveletConfig = field(default_factory=WaveletConfig)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def subbands(self) -> list[tuple[str, np.ndarray]]:
        """Grids in feature order: details level by level, then the final approximation."""
        grids = [g for hvd in self.levels for g in hvd] + [self.final_a]
        return list(zip(subband_names(self.depth), grids))

    def __len__(self):
        return 3 * self.depth + 1


def decompose_pyramid(channel, config: WaveletConfig | None = None) -> SubbandPyramid:
    """Recursive decomposition of the approximation band.

    ``channel`` may be a :class:`~bitw.raster.ChannelRaster` or any 2-D array.
    """
    config = config or WaveletConfig()
    values = getattr(channel, "values", channel)
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise DegenerateGrid(f"expected a 2-D grid, got shape {x.shape}")
    if min(x.shape) < 2 ** config.levels:
        raise TooShallow(
            f"{x.shape[0]}x{x.shape[1]} grid cannot be decomposed {config.levels} times"
        )
    bank = config.bank
    details, dims = [], []
    a = x
    for _ in range(config.levels):
        dims.append(a.shape)
        a, h, v, d = dwt2_single_level(a, bank, config.boundary)
        details.append((h, v, d))
    return SubbandPyramid(details, a, x.shape, dims, config)


def reconstruct_pyramid(pyramid: SubbandPyramid) -> np.ndarray:
    cfg = pyramid.config
    a = pyramid.final_a
    for (h, v, d), dims in zip(reversed(pyramid.levels), reversed(pyramid.level_dims)):
        a = idwt2_single_level(a, h, v, d, cfg.bank, cfg.boundary, shape=dims)
    return a
