import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_schemes.noise import NoiseStream, normals_at, resolve_noise


def test_equal_fields_equal_draws():
    a, b = NoiseStream(5, 2, 10), NoiseStream(5, 2, 10)
    assert np.array_equal(a.draw((3, 4)), b.draw((3, 4)))


def test_draws_never_reused():
    s = NoiseStream(1)
    first = s.draw(100)
    second = s.draw(100)
    assert s.counter == 200
    assert not np.any(first == second)
    assert np.array_equal(np.concatenate([first, second]), normals_at(1, 0, 0, 200))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 50), st.integers(0, 1000), st.integers(1, 300))
def test_slices_are_consistent(seed, stream, start, count):
    full = normals_at(seed, stream, 0, start + count)
    assert np.array_equal(normals_at(seed, stream, start, count), full[start:])


def test_streams_and_seeds_differ():
    assert not np.array_equal(normals_at(1, 0, 0, 16), normals_at(1, 1, 0, 16))
    assert not np.array_equal(normals_at(1, 0, 0, 16), normals_at(2, 0, 0, 16))


def test_moments():
    z = normals_at(2024, 0, 0, 2_000_000)
    assert abs(z.mean()) < 4 / np.sqrt(2e6)
    assert abs(z.var() - 1) < 4 * np.sqrt(2 / 2e6)
    assert abs(np.mean(z ** 4) - 3) < 0.02
    assert abs(np.corrcoef(z[:-1], z[1:])[0, 1]) < 4 / np.sqrt(2e6)


def test_invalid_fields():
    with pytest.raises(ValueError):
        NoiseStream(-1)
    with pytest.raises(ValueError):
        NoiseStream(1, -2)


def test_resolve_noise():
    assert resolve_noise(np.zeros(3), (2, 3)).shape == (2, 3)
    s = NoiseStream(3)
    assert resolve_noise(s, (2, 2)).shape == (2, 2) and s.counter == 4


def test_top_of_seed_range_is_distinct():
    a = normals_at(2**64 - 1, 3, 0, 4)
    b = normals_at(2**64 - 2, 3, 0, 4)
    assert not np.array_equal(a, b)
