from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from encforge.errors import AllZeroWeights, EmptyDistribution
from encforge.sampling import (EmpiricalDistribution, RngStream, WeightedChooser, ecdf_eval,
                               pair_stream_id, sample_inverse_transform, stream_id, weighted_choice)


def test_ecdf_examples():
    d = EmpiricalDistribution([2, 4, 6])
    assert ecdf_eval(d, 4) == pytest.approx(2 / 3)
    assert ecdf_eval(d, 1) == 0
    assert ecdf_eval(d, 6) == 1
    assert ecdf_eval(d, 100) == 1


def test_empty_distribution_rejected():
    with pytest.raises(EmptyDistribution):
        EmpiricalDistribution([])


def test_degenerate_distribution():
    d = EmpiricalDistribution([7])
    rng = RngStream(1, 2)
    assert all(sample_inverse_transform(d, rng) == 7 for _ in range(50))


def test_quantile_convention():
    d = EmpiricalDistribution([6, 2, 4])
    assert d.quantile(0.5) == 4
    assert d.quantile(0.0) == 2
    assert d.quantile(np.nextafter(1.0, 0)) == 6
    assert d.quantile(1 / 3) == 4


def test_large_sample_mass():
    d = EmpiricalDistribution([1, 1, 1, 9])
    draws = d.sample(RngStream(5, 0), 100_000)
    assert abs(np.mean(draws == 9) - 0.25) < 0.01


def test_weighted_choice_examples():
    rng = RngStream(3, 1)
    assert all(weighted_choice([1], rng) == 0 for _ in range(20))
    assert all(weighted_choice([0, 5], rng) == 1 for _ in range(20))
    picks = WeightedChooser([1, 3]).draw(RngStream(3, 2), 100_000)
    assert abs(np.mean(picks == 1) - 0.75) < 0.01


def test_weighted_choice_never_picks_zero_weight_edges():
    chooser = WeightedChooser([0, 2, 0, 0, 1, 0])
    picks = chooser.pick(np.array([0.0, np.nextafter(1.0, 0), 0.5, 2 / 3, 0.99999]))
    assert set(picks.tolist()) <= {1, 4}
    assert chooser.pick(np.nextafter(1.0, 0)) == 4


def test_all_zero_weights():
    with pytest.raises(AllZeroWeights):
        weighted_choice([0, 0], RngStream(0))


def test_streams_are_deterministic_and_distinct():
    a = RngStream(42, 7).random(1000)
    assert np.array_equal(a, RngStream(42, 7).random(1000))
    assert not np.array_equal(a, RngStream(42, 8).random(1000))
    assert not np.array_equal(a, RngStream(43, 7).random(1000))


def test_stream_is_chunk_independent():
    whole = RngStream(9, 9).random(1001)
    rng = RngStream(9, 9)
    parts = np.concatenate([rng.random(1), rng.random(500), rng.random(500)])
    assert np.array_equal(whole, parts)


def test_known_philox_values():
    # frozen reference draws; a change here breaks cross-run reproducibility
    assert RngStream(0, 0).random(3).tolist() == [
        0.011546754286331562, 0.24154919656271812, 0.11142585551493822]
    assert RngStream(2**64 - 1, 12345).random(2).tolist() == [0.832643599250613, 0.22333207350772055]


def test_stream_ids_stable():
    assert stream_id("pair", 1, 2) == pair_stream_id(2, 1)
    assert stream_id("pair", 1, 2) != stream_id("pair", 2, 1)
    assert stream_id("edges", 0, 1) == int.from_bytes(
        __import__("hashlib").blake2b(b"edges/0/1", digest_size=8).digest(), "little")


def test_permutation_is_a_permutation():
    p = RngStream(1, 1).permutation(50)
    assert sorted(p.tolist()) == list(range(50))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=1, max_size=30), st.integers(0, 2**64 - 1))
def test_sampling_closure(samples, seed):
    d = EmpiricalDistribution(samples)
    draws = d.sample(RngStream(seed, 1), 2000)
    assert set(draws.tolist()) <= set(samples)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=40), st.integers(0, 2**32))
def test_draws_match_ecdf_within_ks(samples, seed):
    d = EmpiricalDistribution(samples)
    draws = np.sort(d.sample(RngStream(seed, 3), 100_000))
    support = np.unique(d.samples)
    drawn_cdf = np.searchsorted(draws, support, side="right") / len(draws)
    assert np.max(np.abs(drawn_cdf - d.cdf(support))) < 0.01


def test_inverse_transform_exact_mass_by_enumeration():
    # floor(u*n) maps each of n equal u-intervals to one sorted position
    samples = [3, 1, 3, 8, 3]
    d = EmpiricalDistribution(samples)
    n = len(samples)
    mids = (np.arange(n) + 0.5) / n
    assert Counter(d.quantile(mids).tolist()) == Counter(samples)
