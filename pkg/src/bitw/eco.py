"""Biodiversity indices of a gray-level abundance histogram.

A channel is treated as a community: every pixel is an individual and every
distinct gray level is a species whose abundance is its pixel count. All
logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedForSinglePixel

FISHER_ALPHA_CAP = 1e6
FISHER_TOLERANCE = 1e-9

BIODIVERSITY_NAMES = ("d_Mg", "d_Mn", "d_SW", "e_M", "d_BP", "d_F", "d_KT", "H", "I_total")


@dataclass(frozen=True)
class AbundanceHistogram:
    species: np.ndarray  # distinct gray levels, ascending
    counts: np.ndarray  # abundance of each level (all >= 1)

    @classmethod
    def from_counts(cls, counts) -> "AbundanceHistogram":
        """Histogram with species labelled ``0..S-1``; zero counts are dropped."""
        counts = np.asarray(counts, dtype=np.int64).ravel()
        if np.any(counts < 0):
            raise ValueError("abundances must be non-negative")
        keep = np.flatnonzero(counts)
        return cls(keep.astype(np.int64), counts[keep])

    @classmethod
    def from_mapping(cls, mapping) -> "AbundanceHistogram":
        items = sorted((int(k), int(v)) for k, v in mapping.items() if v)
        return cls(np.array([k for k, _ in items], dtype=np.int64), np.array([v for _, v in items], dtype=np.int64))

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def S(self) -> int:
        return len(self.counts)

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.N

    def as_dict(self) -> dict[int, int]:
        return {int(k): int(v) for k, v in zip(self.species, self.counts)}


def histogram(channel) -> AbundanceHistogram:
    """Exact per-level pixel counts of a raster."""
    values = np.asarray(getattr(channel, "values", channel))
    if values.size == 0:
        raise ValueError("cannot build a histogram of an empty raster")
    flat = values.ravel().astype(np.int64)
    if flat.min() < 0:
        raise ValueError("gray levels must be non-negative")
    counts = np.bincount(flat)
    keep = np.flatnonzero(counts)
    return AbundanceHistogram(keep, counts[keep])


def _hist(h) -> AbundanceHistogram:
    return h if isinstance(h, AbundanceHistogram) else AbundanceHistogram.from_counts(h)


def margalef(hist) -> float:
    """``(S - 1) / ln N``."""
    hist = _hist(hist)
    if hist.N < 2:
        raise UndefinedForSinglePixel("Margalef's index needs at least two pixels")
    return (hist.S - 1) / math.log(hist.N)


def menhinick(hist) -> float:
    """``S / N``.

    Note this is the ratio without the square root found in most ecology
    texts (``S / sqrt(N)``).
    """
    hist = _hist(hist)
    return hist.S / hist.N


def shannon_wiener(hist) -> float:
    hist = _hist(hist)
    p = hist.proportions
    return float(-np.sum(p * np.log(p)))


def mcintosh(hist) -> float:
    """``sqrt(sum n_i^2 / ((N - S + 1)^2 + S - 1))``."""
    hist = _hist(hist)
    n, s = hist.N, hist.S
    sum_sq = float(np.sum(hist.counts.astype(float) ** 2))
    return math.sqrt(sum_sq / ((n - s + 1) ** 2 + s - 1))


def berger_parker(hist) -> float:
    hist = _hist(hist)
    return int(hist.counts.max()) / hist.N


def _fisher_curve(alpha: float, n: int) -> float:
    return alpha * math.log1p(n / alpha)


def fisher_alpha(hist=None, *, S: int | None = None, N: int | None = None) -> float:
    """Fisher's alpha: the root of ``S = alpha * ln(1 + N / alpha)``.

    The left side grows monotonically from 0 to N, so for ``1 <= S < N`` the
    root is unique. It is bracketed by doubling and refined by Newton steps
    that fall back to bisection whenever they leave the bracket.

    Degenerate richness is mapped to sentinels: ``S == 1`` gives 0 and
    ``S == N`` (every pixel its own level, alpha diverges) gives
    :data:`FISHER_ALPHA_CAP`.
    """
    if hist is not None:
        hist = _hist(hist)
        S, N = hist.S, hist.N
    if S is None or N is None:
        raise TypeError("pass a histogram or both S and N")
    if not 1 <= S <= N:
        raise ValueError(f"need 1 <= S <= N, got S={S}, N={N}")
    if S == 1:
        return 0.0
    if S == N:
        return FISHER_ALPHA_CAP

    lo, hi = 0.0, max(float(S), 1.0)
    while _fisher_curve(hi, N) < S:
        lo, hi = hi, 2.0 * hi
    alpha = 0.5 * (lo + hi)
    for _ in range(400):
        f = _fisher_curve(alpha, N) - S
        if abs(f) <= FISHER_TOLERANCE:
            break
        if f < 0:
            lo = alpha
        else:
            hi = alpha
        slope = math.log1p(N / alpha) - N / (alpha + N)
        step = alpha - f / slope if slope > 0 else math.nan
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if step == alpha:
            break
        alpha = step
    return alpha


def kempton_taylor(hist) -> float:
    """Interquartile slope of the cumulative species-abundance curve.

    Species are ranked by increasing abundance. ``R1`` and ``R2`` are the
    abundances at ranks ``ceil(S/4)`` and ``ceil(3S/4)``; with ``n_r`` the
    number of species of abundance ``r``::

        (n_R1 / 2 + sum_{R1 < r < R2} n_r + n_R2 / 2) / ln(R2 / R1)

    Fewer than four species, or ``R1 == R2``, give 0.
    """
    hist = _hist(hist)
    s = hist.S
    if s < 4:
        return 0.0
    ranked = np.sort(hist.counts)
    r1 = int(ranked[math.ceil(0.25 * s) - 1])
    r2 = int(ranked[math.ceil(0.75 * s) - 1])
    if r1 == r2:
        return 0.0
    n_r1 = np.count_nonzero(ranked == r1)
    n_r2 = np.count_nonzero(ranked == r2)
    between = np.count_nonzero((ranked > r1) & (ranked < r2))
    return (0.5 * n_r1 + between + 0.5 * n_r2) / math.log(r2 / r1)


def total_information(hist) -> float:
    """Extensive Shannon information ``N * H`` in nats."""
    hist = _hist(hist)
    return hist.N * shannon_wiener(hist)


def biodiversity_vector(channel) -> np.ndarray:
    """The 9 channel-level features, ordered as :data:`BIODIVERSITY_NAMES`."""
    hist = channel if isinstance(channel, AbundanceHistogram) else histogram(channel)
    h = shannon_wiener(hist)
    return np.array(
        [
            margalef(hist),
            menhinick(hist),
            h,
            mcintosh(hist),
            berger_parker(hist),
            fisher_alpha(hist),
            kempton_taylor(hist),
            h,
            hist.N * h,
        ]
    )
