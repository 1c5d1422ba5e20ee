import numpy as np
import pytest

from tornadotab import rng


def test_mix64_scalar_vec_agree():
    xs = np.array([0, 1, 2, 0xDEADBEEF, rng.M64], dtype=np.uint64)
    vec = rng.mix64_vec(xs)
    for x, v in zip(xs, vec):
        assert rng.mix64(int(x)) == int(v)


def test_mix64_is_64_bits_and_nontrivial():
    vals = {rng.mix64(i) for i in range(1000)}
    assert len(vals) == 1000
    assert all(0 <= v <= rng.M64 for v in vals)


def test_field_value_scalar_vec_agree():
    slots = np.arange(64, dtype=np.uint64)
    vec = rng.field_value_vec(7, rng.KIND_LEVEL, 3, 2, slots)
    for a, v in zip(slots, vec):
        assert rng.field_value(7, rng.KIND_LEVEL, 3, 2, int(a)) == int(v)


def test_field_value_distinguishes_coordinates():
    base = rng.field_value(1, 0, 0, 0, 0)
    assert base != rng.field_value(2, 0, 0, 0, 0)
    assert base != rng.field_value(1, 1, 0, 0, 0)
    assert base != rng.field_value(1, 0, 1, 0, 0)
    assert base != rng.field_value(1, 0, 0, 1, 0)
    assert base != rng.field_value(1, 0, 0, 0, 1)


def test_trial_seed_vec_agrees():
    ts = np.arange(100, dtype=np.uint64)
    vec = rng.trial_seed_vec(42, ts)
    assert all(rng.trial_seed(42, t) == int(v) for t, v in enumerate(vec))


def test_sample_distinct_keys_properties():
    keys = rng.sample_distinct_keys(5, 200, 10)
    assert len(keys) == 200
    assert len(np.unique(keys)) == 200
    assert keys.max() < 1024
    again = rng.sample_distinct_keys(5, 200, 10)
    assert np.array_equal(keys, again)


def test_sample_distinct_keys_exclude():
    excl = rng.sample_distinct_keys(5, 100, 8)
    more = rng.sample_distinct_keys(5, 100, 8, exclude=excl)
    assert not np.isin(more, excl).any()


def test_sample_distinct_keys_whole_universe():
    keys = rng.sample_distinct_keys(9, 256, 8)
    assert sorted(int(k) for k in keys) == list(range(256))


def test_sample_distinct_keys_too_many():
    with pytest.raises(ValueError):
        rng.sample_distinct_keys(1, 300, 8)


def test_mixer_hash_matches_vec():
    xs = np.arange(50, dtype=np.uint64)
    vec = rng.mixer_hash_vec(3, xs, 16)
    assert all(rng.mixer_hash(3, int(x), 16) == int(v) for x, v in zip(xs, vec))
    assert vec.max() < 1 << 16
