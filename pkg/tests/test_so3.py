import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerosym.so3 import E1, E2, E3, check_rotation, exp_so3, heading, rotate, rotation_error, skew

from conftest import random_rotation

vec = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3).map(np.array)


def test_skew_examples():
    np.testing.assert_array_equal(skew(E3) @ E1, E2)
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(skew(x) @ x, np.zeros(3))
    np.testing.assert_array_equal(skew(x) @ np.array([4.0, 5.0, 6.0]), [-3.0, 6.0, -3.0])


def test_skew_rejects_nonfinite():
    with pytest.raises(ValueError):
        skew([0.0, np.nan, 1.0])


@given(vec, vec, st.floats(-5, 5))
def test_skew_linear_and_antisymmetric(x, y, a):
    np.testing.assert_allclose(skew(a * x + y), a * skew(x) + skew(y), atol=1e-12)
    np.testing.assert_array_equal(skew(x).T, -skew(x))
    np.testing.assert_allclose(skew(x) @ y, np.cross(x, y), atol=1e-12)


def test_rotate_examples(rng):
    R = random_rotation(rng)
    x = rng.normal(size=3)
    np.testing.assert_array_equal(rotate(np.eye(3), x), x)
    np.testing.assert_allclose(rotate(R, E3), R[:, 2], atol=1e-15)
    np.testing.assert_allclose(rotate(R.T, rotate(R, x)), x, atol=1e-12)
    assert abs(np.linalg.norm(rotate(R, x)) - np.linalg.norm(x)) < 1e-12 * np.linalg.norm(x)


@given(st.integers(0, 2**32 - 1), vec, vec)
def test_rotate_preserves_dot(seed, x, y):
    R = random_rotation(np.random.default_rng(seed))
    assert abs(rotate(R, x) @ rotate(R, y) - x @ y) < 1e-10


def test_exp_examples():
    np.testing.assert_array_equal(exp_so3([0.0, 0.0, 0.0]), np.eye(3))
    np.testing.assert_allclose(exp_so3([0.0, 0.0, math.pi / 2]) @ E1, E2, atol=1e-12)
    w = np.array([0.3, -1.2, 2.0])
    np.testing.assert_allclose(exp_so3(w) @ exp_so3(-w), np.eye(3), atol=1e-12)


def test_exp_small_angle_series_is_continuous():
    w = np.array([1.0, -2.0, 0.5])
    w /= np.linalg.norm(w)
    for a in (0.99e-8, 1.01e-8):
        series = np.eye(3) + skew(w * a) + 0.5 * skew(w * a) @ skew(w * a)
        np.testing.assert_allclose(exp_so3(w * a), series, rtol=0, atol=1e-16)


@settings(max_examples=300)
@given(vec)
def test_exp_is_rotation(w):
    R = exp_so3(w)
    orth, det = rotation_error(R)
    assert orth < 1e-9 and det < 1e-9
    # axis is fixed by the rotation
    np.testing.assert_allclose(R @ w, w, atol=1e-9)


def test_check_rotation():
    check_rotation(np.eye(3))
    with pytest.raises(ValueError):
        check_rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        check_rotation(np.eye(3) * 1.01)


def test_heading():
    assert heading(exp_so3([0.0, 0.0, 0.7])) == pytest.approx(0.7)
