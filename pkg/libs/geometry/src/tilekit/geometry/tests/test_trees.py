import numpy as np
import pytest

from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.cubes import AnisoCube, ancestor
from tilekit.geometry.tiles import Tile, center_in_semitile, tile_leq
from tilekit.geometry.trees import (
    Tree,
    TreeClass,
    classify_tree,
    maximal_two_tree,
    tree_from_top,
    tree_split,
)
from tilekit.utilities.testing import assert_call

A12 = AnisoExponent((1, 2))


def random_tree(rng: np.random.RandomState, size: int, alpha=A12) -> Tree:
    """
    A random tree under a top of scale 2: members take ancestors of the top's frequency
    cube at their own scale, so they are dominated by construction.
    """
    top = Tile(2, tuple(rng.randint(-2, 3, alpha.n)), tuple(rng.randint(-4, 5, alpha.n)))
    tiles = {top}
    while len(tiles) < size:
        k = int(rng.randint(-1, 3))
        space = AnisoCube(-1, tuple(
            (ell << (3 * a)) + int(rng.randint(0, 2 ** (3 * a)))
            for ell, a in zip(top.space_index, alpha)
        ))
        interval = ancestor(space, k, alpha)
        freq = ancestor(top.frequency, -k, alpha)
        tiles.add(Tile(k, interval.index, freq.index))
    return Tree(top, tiles, alpha)


def test_invalid_tree_rejected():
    top = Tile(0, (0, 0), (0, 0))
    stranger = Tile(0, (1, 0), (0, 0))
    assert_call(Tree, ValueError("is not dominated"), top, [top, stranger], A12)


def test_singleton_is_a_two_tree_for_every_r():
    tile = Tile(0, (0, 0), (0, 0))
    tree = Tree(tile, [tile], A12)
    for r in [(1, 0), (0, 1), (1, 1)]:
        assert classify_tree(tree, r) == TreeClass.TWO_TREE
        two, one = tree_split(tree, r)
        assert two.tiles == tree.tiles and len(one) == 0


def test_classification_matches_direct_membership():
    top = Tile(1, (0, 0), (0, 0))
    # omega_top = [0, 1/2) x [0, 1/4) with center (1/4, 1/8)
    low = Tile(0, (0, 0), (0, 0))
    assert tile_leq(low, top, A12)
    for r in [(1, 0), (0, 1), (1, 1)]:
        tree = Tree(top, [top, low], A12)
        inside = center_in_semitile(top, low, r, A12)
        expect = TreeClass.TWO_TREE if inside else TreeClass.ONE_TREE
        assert classify_tree(tree, r) == expect


def test_mixed_tree():
    # c(omega_top) = (3/4, 1/8): right half of the unit cube, left half one scale up
    top = Tile(1, (0, 0), (1, 0))
    r = (1, 0)
    candidates = [
        Tile(k, space, freq)
        for k in (-1, 0)
        for space in [(0, 0), (1, 1), (0, 3)]
        for freq in [(0, 0), (1, 0), (0, 1), (2, 1), (1, 3)]
    ]
    members = [p for p in candidates if tile_leq(p, top, A12)]
    inside = [p for p in members if center_in_semitile(top, p, r, A12)]
    outside = [p for p in members if not center_in_semitile(top, p, r, A12)]
    assert inside and outside
    assert classify_tree(Tree(top, [inside[0], outside[0]], A12), r) == TreeClass.MIXED


@pytest.mark.parametrize("seed", range(100))
def test_split_partitions_and_reclassifies(seed):
    rng = np.random.RandomState(seed)
    tree = random_tree(rng, 20 if seed < 5 else int(rng.randint(1, 12)))
    r = [(1, 0), (0, 1), (1, 1)][seed % 3]
    two, one = tree_split(tree, r)
    assert two.tiles | one.tiles == tree.tiles
    assert not two.tiles & one.tiles
    assert two.top == one.top == tree.top
    assert classify_tree(two, r) == TreeClass.TWO_TREE
    if len(one):
        assert classify_tree(one, r) == TreeClass.ONE_TREE


def test_tree_from_top_and_maximal_two_tree():
    rng = np.random.RandomState(5)
    tree = random_tree(rng, 15)
    strangers = [Tile(2, (9, 9), (0, 0)), Tile(-1, (0, 0), (40, 40))]
    pool = sorted(tree.tiles) + strangers
    assert tree_from_top(pool, tree.top, A12).tiles == tree.tiles
    two = maximal_two_tree(pool, tree.top, (1, 1), A12)
    assert two.tiles == tree_split(tree, (1, 1))[0].tiles
    assert two.interval_volume == 2.0 ** (2 * 3)
