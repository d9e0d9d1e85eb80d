"""Dimension-agnostic measurement primitives and alignment distance."""

import numpy as np
import pytest

from polyrig.errors import DegenerateMeasurement
from polyrig.pointsets import (
    Angle,
    Coplanar,
    DiagonalAngle,
    Distance,
    align_distance,
    diameter,
    measurement_gradient,
    measurement_value,
)

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)


def test_basic_values():
    assert measurement_value(Distance(0, 2), SQUARE) == pytest.approx(np.sqrt(2))
    assert measurement_value(Angle(0, 1, 2), SQUARE) == pytest.approx(np.pi / 2)
    assert measurement_value(Angle(1, 0, 2), SQUARE) == pytest.approx(np.pi / 4)
    # the two diagonals of a square cross at a right angle
    assert measurement_value(DiagonalAngle(0, 2, 1, 3), SQUARE) == pytest.approx(
        np.pi / 2
    )
    # a side against the parallel opposite side
    assert measurement_value(DiagonalAngle(0, 1, 3, 2), SQUARE) == pytest.approx(0.0)


def test_coplanar_value_is_triple_product():
    pts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 2]],
        dtype=float,
    )
    assert measurement_value(Coplanar(0, 1, 2, 3), pts) == pytest.approx(2.0)
    flat = pts.copy()
    flat[3, 2] = 0.0
    flat[3, :2] = [0.3, 0.4]
    assert measurement_value(Coplanar(0, 1, 2, 3), flat) == pytest.approx(0.0)


def test_degenerate_measurements_raise():
    pts = SQUARE.copy()
    with pytest.raises(DegenerateMeasurement):
        measurement_value(Distance(0, 0), pts)
    collinear = np.array([[0, 0], [1, 0], [2, 0]], dtype=float)
    # value of a straight angle is fine, its gradient is not
    assert measurement_value(Angle(0, 1, 2), collinear) == pytest.approx(np.pi)
    with pytest.raises(DegenerateMeasurement):
        measurement_gradient(Angle(0, 1, 2), collinear)


@pytest.mark.parametrize("dim", [2, 3])
def test_gradients_match_finite_differences(dim):
    rng = np.random.default_rng(17)
    pts = rng.normal(size=(5, dim))
    ms = [Distance(0, 3), Angle(1, 2, 4), DiagonalAngle(0, 1, 2, 3)]
    if dim == 3:
        ms.append(Coplanar(0, 1, 2, 3))
    for m in ms:
        g = measurement_gradient(m, pts)
        flat = pts.ravel()
        fd = np.zeros_like(flat)
        for i in range(flat.size):
            up, dn = flat.copy(), flat.copy()
            up[i] += 1e-6
            dn[i] -= 1e-6
            fd[i] = (
                measurement_value(m, up.reshape(pts.shape))
                - measurement_value(m, dn.reshape(pts.shape))
            ) / 2e-6
        assert np.abs(g - fd).max() < 1e-7


def test_angle_gradient_invariant_to_translation_direction():
    # rows must sum to zero: sliding the whole configuration cannot
    # change any measurement
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(4, 3))
    for m in (Distance(0, 1), Angle(0, 1, 2), DiagonalAngle(0, 1, 2, 3),
              Coplanar(0, 1, 2, 3)):
        g = measurement_gradient(m, pts).reshape(4, 3)
        assert np.abs(g.sum(axis=0)).max() < 1e-12


def test_diameter():
    assert diameter(SQUARE) == pytest.approx(np.sqrt(2))


def test_align_distance_rigid_and_mirror():
    rng = np.random.default_rng(9)
    pts = rng.normal(size=(6, 2))
    theta = 0.77
    R = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    moved = pts @ R.T + np.array([2.0, -1.0])
    assert align_distance(pts, moved) < 1e-12

    mirrored = pts * np.array([1.0, -1.0])
    assert align_distance(pts, mirrored) > 1e-3
    assert align_distance(pts, mirrored, allow_reflection=True) < 1e-12
