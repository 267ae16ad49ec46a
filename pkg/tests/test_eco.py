import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitw.eco import (
    FISHER_ALPHA_CAP,
    AbundanceHistogram,
    berger_parker,
    biodiversity_vector,
    fisher_alpha,
    histogram,
    kempton_taylor,
    margalef,
    mcintosh,
    menhinick,
    shannon_wiener,
    total_information,
)
from bitw.errors import UndefinedForSinglePixel

H = AbundanceHistogram.from_counts


def kempton_taylor_brute(abundances):
    """Walk the ranked cumulative curve one species at a time."""
    ranked = sorted(abundances)
    s = len(ranked)
    if s < 4:
        return 0.0
    r1 = ranked[math.ceil(s / 4) - 1]
    r2 = ranked[math.ceil(3 * s / 4) - 1]
    if r1 == r2:
        return 0.0
    num = 0.0
    for r in range(r1, r2 + 1):
        n_r = sum(1 for a in ranked if a == r)
        num += n_r / 2 if r in (r1, r2) else n_r
    return num / math.log(r2 / r1)


def fisher_bisection(S, N):
    lo, hi = 1e-12, 1.0
    while hi * math.log1p(N / hi) < S:
        hi *= 2
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid * math.log1p(N / mid) < S:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---- histogram


def test_histogram_constant():
    h = histogram(np.zeros((4, 4), int))
    assert h.as_dict() == {0: 16} and h.N == 16 and h.S == 1


def test_histogram_direct_count():
    h = histogram(np.array([[0, 0], [1, 2]]))
    assert h.as_dict() == {0: 2, 1: 1, 2: 1} and h.N == 4 and h.S == 3


def test_histogram_recount(rng):
    x = rng.integers(0, 256, (16, 16))
    h = histogram(x)
    assert h.N == 256
    for level, n in h.as_dict().items():
        assert n == np.count_nonzero(x == level)


# ---- richness


def test_margalef():
    assert margalef(H([7])) == 0.0
    assert margalef(H([25] * 4)) == pytest.approx(3 / math.log(100))
    assert margalef(H([1, 1])) == pytest.approx(1 / math.log(2))
    with pytest.raises(UndefinedForSinglePixel):
        margalef(H([1]))


def test_menhinick():
    assert menhinick(H([16])) == 1 / 16
    assert menhinick(H([1] * 9)) == 1.0
    assert menhinick(H([40, 30, 20, 10])) == pytest.approx(0.04)


# ---- evenness / dominance


def test_shannon_wiener():
    assert shannon_wiener(H([9])) == 0.0
    assert shannon_wiener(H([5, 5])) == pytest.approx(math.log(2))
    assert shannon_wiener(H([2, 1, 1])) == pytest.approx(-(0.5 * math.log(0.5) + 2 * 0.25 * math.log(0.25)))


def test_mcintosh():
    assert mcintosh(H([12])) == pytest.approx(1.0)
    assert mcintosh(H([4, 4])) == pytest.approx(0.8)
    counts = [5, 3, 9, 1]
    n, s = sum(counts), len(counts)
    assert mcintosh(H(counts)) == pytest.approx(math.sqrt(sum(c * c for c in counts) / ((n - s + 1) ** 2 + s - 1)))


def test_berger_parker():
    assert berger_parker(H([3] * 5)) == pytest.approx(1 / 5)
    assert berger_parker(H([6, 2])) == 0.75
    assert berger_parker(H([10])) == 1.0


# ---- Fisher's alpha


def test_fisher_alpha_reference_value():
    alpha = fisher_alpha(S=10, N=100)
    assert 2.7 < alpha < 2.8
    # 40-digit bisection with mpmath: 2.766289663356942...
    assert alpha == pytest.approx(2.766289663356942, rel=1e-12)
    assert alpha == pytest.approx(fisher_bisection(10, 100), rel=1e-12)


def test_fisher_alpha_sentinels():
    assert fisher_alpha(H([50])) == 0.0
    assert fisher_alpha(H([1] * 12)) == FISHER_ALPHA_CAP


def test_fisher_alpha_from_histogram():
    h = H([30, 20, 10, 5, 5, 10, 10, 10])
    assert fisher_alpha(h) == pytest.approx(fisher_bisection(h.S, h.N), rel=1e-10)


@settings(max_examples=300, deadline=None)
@given(st.integers(3, 10**6).flatmap(lambda n: st.tuples(st.integers(2, n - 1), st.just(n))))
def test_fisher_alpha_residual(sn):
    S, N = sn
    a = fisher_alpha(S=S, N=N)
    assert abs(S - a * math.log1p(N / a)) <= 1e-8


def test_fisher_alpha_monotone_in_richness():
    N = 5000
    alphas = [fisher_alpha(S=s, N=N) for s in range(2, N, 37)]
    assert all(b > a for a, b in zip(alphas, alphas[1:]))


# ---- Kempton-Taylor


def test_kempton_taylor_fibonacci():
    abund = [1, 1, 2, 3, 5, 8, 13, 21]
    assert kempton_taylor(H(abund)) == pytest.approx(kempton_taylor_brute(abund), abs=1e-12)
    assert kempton_taylor(H(abund)) == pytest.approx(4.5 / math.log(8))


def test_kempton_taylor_degenerate():
    assert kempton_taylor(H([7] * 10)) == 0.0
    assert kempton_taylor(H([9])) == 0.0
    assert kempton_taylor(H([1, 2, 3])) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=1, max_size=40))
def test_kempton_taylor_matches_brute_force(abund):
    assert kempton_taylor(H(abund)) == pytest.approx(kempton_taylor_brute(abund), abs=1e-12)


# ---- total information


def test_total_information():
    assert total_information(H([16])) == 0.0
    assert total_information(H([2, 1, 1])) == pytest.approx(4 * shannon_wiener(H([2, 1, 1])))


def test_total_information_doubles_when_tiled(rng):
    x = rng.integers(0, 20, (8, 8))
    single = total_information(histogram(x))
    assert total_information(histogram(np.tile(x, (1, 2)))) == pytest.approx(2 * single)


# ---- assembled vector


def test_constant_channel_vector():
    vec = biodiversity_vector(np.full((8, 8), 77))
    np.testing.assert_allclose(vec, [0, 1 / 64, 0, 1, 1, 0, 0, 0, 0], atol=1e-15)


def test_vector_composition(rng):
    x = rng.integers(0, 256, (16, 16))
    h = histogram(x)
    want = [
        margalef(h), menhinick(h), shannon_wiener(h), mcintosh(h), berger_parker(h),
        fisher_alpha(h), kempton_taylor(h), shannon_wiener(h), total_information(h),
    ]
    vec = biodiversity_vector(x)
    assert len(vec) == 9
    np.testing.assert_array_equal(vec, want)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), levels=st.integers(1, 256))
def test_vector_properties(seed, levels):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, levels, (12, 9))
    vec = biodiversity_vector(x)
    assert np.all(np.isfinite(vec))
    h = histogram(x)
    assert 0 <= vec[2] <= math.log(h.S) + 1e-12
    assert 1 / h.S - 1e-12 <= vec[4] <= 1
    assert 0 < vec[1] <= 1
    # pixel shuffles, rotations and reflections leave every bit unchanged
    for variant in (rng.permutation(x.ravel()).reshape(x.shape), np.rot90(x), np.rot90(x, 2), x[::-1], x[:, ::-1]):
        np.testing.assert_array_equal(biodiversity_vector(variant), vec)
