import itertools

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given

from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.cubes import (
    AnisoCube,
    ancestor,
    children,
    cube_center,
    cube_contains,
    cube_realize,
    cube_volume,
    enlarged,
    parent,
    partition_J,
    scaled_cube,
)
from tilekit.geometry.rects import Rect
from tilekit.utilities.testing import assert_call

A11 = AnisoExponent((1, 1))
A12 = AnisoExponent((1, 2))


@pytest.mark.parametrize(
    "cube, alpha, rect, center",
    [
        (AnisoCube(1, (1, 1)), A12, Rect((2, 4), (4, 8)), (3, 6)),
        (AnisoCube(0, (0, 0)), A11, Rect((0, 0), (1, 1)), (0.5, 0.5)),
        (AnisoCube(-1, (0, 0)), A12, Rect((0, 0), (0.5, 0.25)), (0.25, 0.125)),
        (AnisoCube(0, (-1, -2)), A12, Rect((-1, -2), (0, -1)), (-0.5, -1.5)),
    ],
)
def test_realize_and_center(cube, alpha, rect, center):
    assert cube_realize(cube, alpha) == rect
    np.testing.assert_array_equal(cube_center(cube, alpha), center)


def test_dimension_mismatch():
    assert_call(cube_realize, ValueError("dimension"), AnisoCube(0, (0,)), A12)


@pytest.mark.parametrize(
    "cube, alpha, expect",
    [
        (AnisoCube(1, (1, 1)), A12, AnisoCube(2, (0, 0))),
        (AnisoCube(0, (3, 5)), A12, AnisoCube(1, (1, 1))),
        (AnisoCube(0, (-1, -1)), A11, AnisoCube(1, (-1, -1))),
    ],
)
def test_parent(cube, alpha, expect):
    assert parent(cube, alpha) == expect
    assert cube_volume(expect, alpha) == 2 ** alpha.total * cube_volume(cube, alpha)
    assert cube_realize(expect, alpha).contains(cube_realize(cube, alpha))


def test_children_tile_the_unit_square():
    kids = children(AnisoCube(0, (0, 0)), A11)
    assert len(kids) == 4
    assert {cube_realize(c, A11) for c in kids} == {
        Rect((0, 0), (0.5, 0.5)),
        Rect((0, 0.5), (0.5, 1)),
        Rect((0.5, 0), (1, 0.5)),
        Rect((0.5, 0.5), (1, 1)),
    }


@given(st.integers(-4, 4), st.integers(-20, 20), st.integers(-20, 20))
def test_children_invert_parent(k, i, j):
    cube = AnisoCube(k, (i, j))
    kids = children(cube, A12)
    assert len(kids) == 2 ** A12.total
    assert all(parent(c, A12) == cube for c in kids)
    assert sum(cube_volume(c, A12) for c in kids) == cube_volume(cube, A12)


def test_ancestor_below_scale_rejected():
    assert_call(ancestor, ValueError("at least the cube scale"), AnisoCube(2, (0, 0)), 1, A12)


@pytest.mark.parametrize(
    "cube, alpha, lengths",
    [
        (AnisoCube(0, (0, 0)), A11, (3, 3)),
        (AnisoCube(0, (0, 0)), A12, (3, 7)),
        (AnisoCube(-1, (2, 1)), A12, (1.5, 7 / 4)),
    ],
)
def test_enlarged(cube, alpha, lengths):
    box = enlarged(cube, alpha)
    np.testing.assert_array_equal(box.lengths, lengths)
    np.testing.assert_array_equal(box.center, cube_center(cube, alpha))
    assert box.contains(cube_realize(cube, alpha))


@pytest.mark.parametrize(
    "cube, j, alpha, expect",
    [
        (AnisoCube(0, (0, 0)), 0, A11, Rect((0, 0), (1, 1))),
        (AnisoCube(0, (0, 0)), 1, A11, Rect((-0.5, -0.5), (1.5, 1.5))),
        (AnisoCube(0, (0, 0)), 2, A12, Rect((-1.5, -7.5), (2.5, 8.5))),
        (AnisoCube(0, (0, 0)), -1, A12, ValueError("non-negative")),
    ],
)
def test_scaled_cube(cube, j, alpha, expect):
    assert_call(scaled_cube, expect, cube, j, alpha)


def _realized_arrays(cubes, alpha):
    rects = [cube_realize(c, alpha) for c in cubes]
    return np.array([r.lower for r in rects]), np.array([r.upper for r in rects])


def test_nesting_dichotomy_exhaustively():
    cubes = [
        AnisoCube(k, index)
        for k in range(-3, 4)
        for index in itertools.product(range(-8, 9), repeat=2)
    ]
    lowers, uppers = _realized_arrays(cubes, A12)
    for start in range(0, len(cubes), 256):
        lo, up = lowers[start : start + 256, None, :], uppers[start : start + 256, None, :]
        disjoint = np.any(
            np.maximum(lo, lowers[None]) >= np.minimum(up, uppers[None]), axis=2
        )
        row_inside = np.all((lo >= lowers[None]) & (up <= uppers[None]), axis=2)
        col_inside = np.all((lowers[None] >= lo) & (uppers[None] <= up), axis=2)
        assert np.all(disjoint | row_inside | col_inside)
        # the integer containment agrees with the float geometry on a sample
        for i in range(start, min(start + 256, len(cubes)), 37):
            for j in range(0, len(cubes), 53):
                assert cube_contains(cubes[j], cubes[i], A12) == row_inside[i - start, j]


def _brute_force_partition(tile_intervals, window, k_floor, alpha):
    realized = [cube_realize(c, alpha) for c in tile_intervals]

    def valid(cube):
        box = enlarged(cube, alpha)
        return not any(box.contains(r) for r in realized)

    candidates = [window]
    level = [window]
    for _ in range(window.k - k_floor):
        level = [c for cube in level for c in children(cube, alpha)]
        candidates.extend(level)

    def strict_ancestors(cube):
        return [ancestor(cube, k, alpha) for k in range(cube.k + 1, window.k + 1)]

    return sorted(
        c
        for c in candidates
        if (valid(c) or c.k == k_floor) and not any(valid(a) for a in strict_ancestors(c))
    )


@pytest.mark.parametrize(
    "tile_intervals, window, k_floor, alpha",
    [
        ([AnisoCube(2, (0, 0))], AnisoCube(2, (0, 0)), -1, A11),
        ([AnisoCube(0, (1, 2))], AnisoCube(2, (0, 0)), -2, A11),
        ([AnisoCube(0, (1, 2)), AnisoCube(1, (0, 0))], AnisoCube(2, (0, 0)), -1, A11),
        ([AnisoCube(1, (1, 0))], AnisoCube(2, (0, 0)), 0, A12),
        ([AnisoCube(-1, (5, 3)), AnisoCube(0, (0, 1))], AnisoCube(1, (0, 0)), -2, A12),
    ],
)
def test_partition_against_brute_force(tile_intervals, window, k_floor, alpha):
    partition = partition_J(tile_intervals, window, k_floor, alpha)
    assert partition == _brute_force_partition(tile_intervals, window, k_floor, alpha)
    assert sum(cube_volume(c, alpha) for c in partition) == cube_volume(window, alpha)
    for i, a in enumerate(partition):
        assert cube_contains(window, a, alpha)
        for b in partition[i + 1 :]:
            assert not cube_realize(a, alpha).intersects(cube_realize(b, alpha))


def test_partition_without_tiles_is_the_window():
    window = AnisoCube(3, (1, 0))
    assert partition_J([], window, -2, A12) == [window]


@pytest.mark.parametrize(
    "tile_intervals, k_floor, expect",
    [
        ([AnisoCube(0, (0, 0))], 1, ValueError("smallest tile interval scale")),
        ([], 3, ValueError("must not exceed the window scale")),
    ],
)
def test_partition_floor_validation(tile_intervals, k_floor, expect):
    assert_call(partition_J, expect, tile_intervals, AnisoCube(2, (0, 0)), k_floor, A11)


@given(
    st.lists(
        st.tuples(st.integers(-1, 1), st.integers(0, 7), st.integers(0, 7)),
        min_size=1,
        max_size=4,
    )
)
def test_partition_covers_window(specs):
    window = AnisoCube(2, (0, 0))
    intervals = [
        ancestor(AnisoCube(-1, (i, j)), k, A11) for k, i, j in specs
    ]
    partition = partition_J(intervals, window, -1, A11)
    assert sum(cube_volume(c, A11) for c in partition) == cube_volume(window, A11)
    assert len(set(partition)) == len(partition)
