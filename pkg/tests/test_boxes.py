import numpy as np
import pytest

from psdsample.boxes import HyperRectangle


def box(lo, hi):
    return HyperRectangle(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))


def test_basic_properties():
    b = box([-1.0, 0.0], [1.0, 4.0])
    assert b.dim == 2
    assert np.allclose(b.side_lengths, [2.0, 4.0])
    assert np.allclose(b.center, [0.0, 2.0])
    assert b.volume() == 8.0
    assert b.is_bounded()


def test_rejects_inverted_corners():
    with pytest.raises(ValueError):
        box([1.0], [0.0])


def test_contains_is_half_open():
    b = box([0.0], [1.0])
    inside = b.contains(np.array([[0.0], [0.5], [0.999999]]))
    assert inside.all()
    assert not b.contains(np.array([[1.0]]))[0]
    assert not b.contains(np.array([[-1e-12]]))[0]


def test_split_largest_side_halves_and_partitions():
    b = box([0.0, 0.0], [1.0, 4.0])
    left, right, axis = b.split_largest_side()
    assert axis == 1
    assert np.allclose(left.upper, [1.0, 2.0])
    assert np.allclose(right.lower, [0.0, 2.0])
    assert left.volume() + right.volume() == b.volume()


def test_split_tie_picks_lowest_index():
    b = box([0.0, 0.0], [2.0, 2.0])
    _, _, axis = b.split_largest_side()
    assert axis == 0


def test_whole_space_is_unbounded_with_infinite_volume():
    w = HyperRectangle.whole_space(3)
    assert not w.is_bounded()
    assert w.volume() == np.inf
    assert w.contains(np.array([[1e30, -1e30, 0.0]]))[0]


def test_volume_rejects_zero_times_infinity():
    b = HyperRectangle(np.array([0.0, -np.inf]), np.array([0.0, np.inf]))
    with pytest.raises(ValueError):
        b.volume()


def test_double_size_keeps_center_and_doubles_sides():
    b = box([0.0, 1.0], [2.0, 5.0])
    d = b.double_size()
    assert np.allclose(d.center, b.center)
    assert np.allclose(d.side_lengths, 2.0 * b.side_lengths)


def test_bounding_box_covers_points():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(40, 3))
    b = HyperRectangle.bounding_box(pts)
    assert np.allclose(b.lower, pts.min(axis=0))
    assert np.allclose(b.upper, pts.max(axis=0))


def test_repeated_splits_reach_leaf_size():
    b = box([-1.0], [1.0])
    for _ in range(7):
        b, _, _ = b.split_largest_side()
    assert b.side_lengths[0] == 2.0 ** (1 - 7)
