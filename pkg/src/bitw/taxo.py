"""Taxonomic indices: abundance-weighted statistics of pairwise level distances.

Every function works on the species histogram (at most ``Q`` distinct
levels), never on pixel pairs. The distance between two gray levels is a
pluggable callable mapping the array of present levels to a symmetric
matrix with a zero diagonal; the default is ``|i - j|``.

Degenerate communities (a single species) give 0 for every index.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .eco import AbundanceHistogram, histogram, shannon_wiener
from .errors import UndefinedForSinglePixel

Distance = Callable[[np.ndarray], np.ndarray]

TAXONOMIC_NAMES = ("delta", "delta_star", "s_PD", "d_NN", "e_EQ", "e_IQ", "d_TT", "H", "I_total")


def absolute_distance(levels) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    return np.abs(levels[:, None] - levels[None, :])


def _prepare(hist, dist: Distance | None):
    if not isinstance(hist, AbundanceHistogram):
        hist = AbundanceHistogram.from_counts(hist)
    D = np.asarray((dist or absolute_distance)(hist.species), dtype=float)
    return hist, D


def _weighted_pair_sum(x: np.ndarray, D: np.ndarray) -> float:
    # sum over i < j of D_ij x_i x_j; D is symmetric with zero diagonal
    return 0.5 * float(x @ D @ x)


def _pair_product_sum(x: np.ndarray) -> float:
    # sum over i < j of x_i x_j
    return 0.5 * (float(x.sum()) ** 2 - float(x @ x))


def taxonomic_diversity(hist, dist: Distance | None = None) -> float:
    """Mean distance between two pixels drawn without replacement (``Delta``)."""
    hist, D = _prepare(hist, dist)
    n = hist.N
    if n < 2:
        raise UndefinedForSinglePixel("taxonomic diversity needs at least two pixels")
    x = hist.counts.astype(float)
    return _weighted_pair_sum(x, D) / (n * (n - 1) / 2)


def taxonomic_distinctness(hist, dist: Distance | None = None) -> float:
    """Mean distance between two pixels of different levels (``Delta*``)."""
    hist, D = _prepare(hist, dist)
    if hist.S < 2:
        return 0.0
    x = hist.counts.astype(float)
    return _weighted_pair_sum(x, D) / _pair_product_sum(x)


def sum_phylogenetic_distances(hist, dist: Distance | None = None) -> float:
    """Number of level pairs times their abundance-weighted mean distance."""
    hist, _ = _prepare(hist, dist)
    s = hist.S
    if s < 2:
        return 0.0
    return s * (s - 1) / 2 * taxonomic_distinctness(hist, dist)


def nearest_neighbor_distance(hist, dist: Distance | None = None) -> float:
    """Sum over present levels of the distance to the closest other level."""
    hist, D = _prepare(hist, dist)
    if hist.S < 2:
        return 0.0
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    return float(D.min(axis=1).sum())


def extensive_quadratic_entropy(hist, dist: Distance | None = None) -> float:
    """Sum of distances over ordered pairs of distinct present levels."""
    hist, D = _prepare(hist, dist)
    return float(D.sum() - np.trace(D))


def intensive_quadratic_entropy(hist, dist: Distance | None = None) -> float:
    hist, _ = _prepare(hist, dist)
    return extensive_quadratic_entropy(hist, dist) / hist.S ** 2


def total_taxonomic_distinctness(hist, dist: Distance | None = None) -> float:
    """Sum over levels of the mean distance to every other level."""
    hist, _ = _prepare(hist, dist)
    s = hist.S
    if s < 2:
        return 0.0
    return extensive_quadratic_entropy(hist, dist) / (s - 1)


def taxonomic_vector(grid, dist: Distance | None = None) -> np.ndarray:
    """The 9 subband features ordered as :data:`TAXONOMIC_NAMES`.

    ``grid`` holds quantized levels (an array or a ``QuantizedSubband``).
    """
    levels = getattr(grid, "levels", grid)
    hist = levels if isinstance(levels, AbundanceHistogram) else histogram(levels)
    if hist.S < 2:
        return np.zeros(len(TAXONOMIC_NAMES))
    hist, D = _prepare(hist, dist)
    x = hist.counts.astype(float)
    n, s = hist.N, hist.S

    weighted = _weighted_pair_sum(x, D)
    delta = weighted / (n * (n - 1) / 2)
    delta_star = weighted / _pair_product_sum(x)
    s_pd = s * (s - 1) / 2 * delta_star
    off = D.copy()
    np.fill_diagonal(off, np.inf)
    d_nn = float(off.min(axis=1).sum())
    e_eq = float(D.sum() - np.trace(D))
    e_iq = e_eq / s ** 2
    d_tt = e_eq / (s - 1)
    h = shannon_wiener(hist)
    return np.array([delta, delta_star, s_pd, d_nn, e_eq, e_iq, d_tt, h, n * h])
