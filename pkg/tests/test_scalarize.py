import math
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from umoead.errors import ConfigurationError, DomainError
from umoead.scalarize import (
    WEIGHT_FLOOR,
    angle_to_weight,
    clamp_weight,
    das_dennis,
    mtche,
    mtche_matrix,
    update_ideal,
    weight_to_angle,
)


def simplex(m, floor=1e-6):
    return (
        st.lists(st.floats(max(floor, 1e-9), 1.0), min_size=m, max_size=m)
        .map(lambda v: np.array(v) / np.sum(v))
        .filter(lambda v: v.min() >= floor)
    )


def angles(m):
    return arrays(float, m - 1, elements=st.floats(0.0, math.pi / 2))


@pytest.mark.parametrize(
    "y, lam, expected",
    [((0.5, 0.5), (0.5, 0.5), 1.0), ((0.2, 0.8), (0.5, 0.5), 1.6)],
)
def test_mtche_examples(y, lam, expected):
    assert mtche(y, lam, (0.0, 0.0)) == pytest.approx(expected, abs=1e-15)


@given(lam=simplex(3))
def test_mtche_at_ideal_is_zero(lam):
    z = np.array([0.1, -0.3, 2.0])
    assert mtche(z, lam, z) == 0.0


def test_mtche_boundary_weight_is_finite():
    assert np.isfinite(mtche((0.5, 0.5), (1.0, 0.0), (0.0, 0.0)))
    assert mtche((0.5, 0.5), (1.0, 0.0), (0.0, 0.0)) == pytest.approx(0.5 / WEIGHT_FLOOR, rel=1e-5)


def test_mtche_nan():
    with pytest.raises(DomainError):
        mtche((np.nan, 0.0), (0.5, 0.5), (0.0, 0.0))


@given(
    lam=simplex(3),
    y=arrays(float, 3, elements=st.floats(-5, 5)),
    dy=arrays(float, 3, elements=st.floats(1e-3, 1.0)),
)
def test_mtche_strictly_decreasing(lam, y, dy):
    z = np.zeros(3)
    assert mtche(y - dy, lam, z) < mtche(y, lam, z)


@given(
    Y=arrays(float, (4, 2), elements=st.floats(-3, 3)),
    W=st.lists(simplex(2, 0.0), min_size=3, max_size=3),
)
def test_mtche_matrix_matches_scalar(Y, W):
    W = np.array(W)
    z = np.array([-1.0, 0.5])
    M = mtche_matrix(Y, W, z)
    for a in range(len(Y)):
        for b in range(len(W)):
            assert M[a, b] == pytest.approx(mtche(Y[a], W[b], z), rel=1e-14, abs=1e-14)


def test_clamp_weight_keeps_simplex():
    lam = clamp_weight([1.0, 0.0, 0.0])
    assert lam.sum() == pytest.approx(1.0, abs=1e-15)
    assert lam.min() > 0


@pytest.mark.parametrize(
    "theta, lam",
    [
        ([math.pi / 4], [0.5, 0.5]),
        ([0.0], [1.0, 0.0]),
        ([math.pi / 4, math.pi / 4], [0.5, 0.25, 0.25]),
    ],
)
def test_angle_weight_examples(theta, lam):
    np.testing.assert_allclose(angle_to_weight(theta), lam, atol=1e-15)
    np.testing.assert_allclose(weight_to_angle(lam), theta, atol=1e-15)


def test_degenerate_inverse_sets_zero():
    np.testing.assert_array_equal(weight_to_angle([1.0, 0.0, 0.0]), [0.0, 0.0])
    theta = weight_to_angle([0.0, 0.0, 1.0])
    np.testing.assert_allclose(theta, [math.pi / 2, math.pi / 2])


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@given(data=st.data())
def test_round_trip(m, data):
    lam = data.draw(simplex(m))
    assert np.max(np.abs(angle_to_weight(weight_to_angle(lam)) - lam)) < 1e-12


@pytest.mark.parametrize("m", [2, 3, 4])
@given(data=st.data())
def test_angle_image_on_simplex(m, data):
    lam = angle_to_weight(data.draw(angles(m)))
    assert lam.min() >= 0.0
    assert abs(lam.sum() - 1.0) < 1e-12


@given(data=st.data())
def test_angle_inverse_on_interior(data):
    theta = data.draw(arrays(float, 2, elements=st.floats(1e-3, math.pi / 2 - 1e-3)))
    np.testing.assert_allclose(weight_to_angle(angle_to_weight(theta)), theta, atol=1e-9)


def test_batch_shapes():
    T = np.random.default_rng(0).uniform(0, math.pi / 2, size=(7, 2))
    W = angle_to_weight(T)
    assert W.shape == (7, 3)
    np.testing.assert_allclose(weight_to_angle(W), T, atol=1e-12)


def test_das_dennis_examples():
    np.testing.assert_allclose(
        das_dennis(2, 4), [[0, 1], [0.25, 0.75], [0.5, 0.5], [0.75, 0.25], [1, 0]]
    )
    np.testing.assert_array_equal(das_dennis(3, 1), [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    assert len(das_dennis(3, 12)) == 91


@pytest.mark.parametrize("m, H", [(2, 7), (3, 5), (4, 3), (5, 2)])
def test_das_dennis_lattice(m, H):
    W = das_dennis(m, H)
    assert len(W) == comb(H + m - 1, m - 1)
    np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)
    assert W.min() >= 0
    np.testing.assert_allclose(W * H, np.round(W * H), atol=1e-12)
    assert [tuple(r) for r in W] == sorted(tuple(r) for r in W)
    assert len({tuple(r) for r in W}) == len(W)


def test_das_dennis_invalid():
    with pytest.raises(ConfigurationError):
        das_dennis(3, 0)


@pytest.mark.parametrize(
    "z, y, expected",
    [((0, 0), (0.5, 0.5), (0, 0)), ((1, 1), (0.5, 2), (0.5, 1)), ((0.3, 0.2), (0.3, 0.2), (0.3, 0.2))],
)
def test_update_ideal(z, y, expected):
    np.testing.assert_array_equal(update_ideal(z, y), expected)


@given(ys=st.lists(arrays(float, 2, elements=st.floats(-10, 10)), min_size=1, max_size=20))
def test_update_ideal_monotone(ys):
    z = np.full(2, np.inf)
    for y in ys:
        new = update_ideal(z, y)
        assert np.all(new <= z)
        z = new
    np.testing.assert_array_equal(z, np.min(ys, axis=0))
