import enum
import typing as t

import attr

from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.tiles import Tile, in_two_tree, interval_volume, tile_leq


class TreeClass(enum.Enum):
    ONE_TREE = "one_tree"
    TWO_TREE = "two_tree"
    MIXED = "mixed"


@attr.s(frozen=True)
class Tree:
    """
    A finite set of tiles dominated by an explicit top. The top is usually a member of
    the tiles, but trees built from mass witnesses are dominated by a top outside the
    collection, as the order only requires every member to lie below it.
    """

    top = attr.ib(validator=attr.validators.instance_of(Tile))
    tiles = attr.ib(converter=frozenset)
    alpha = attr.ib(converter=AnisoExponent)

    @tiles.validator
    def _check_domination(self, attribute, value):
        for tile in value:
            if not tile_leq(tile, self.top, self.alpha):
                raise ValueError(f"Tile {tile} is not dominated by the top {self.top}")

    @property
    def contains_top(self) -> bool:
        return self.top in self.tiles

    @property
    def interval_volume(self) -> float:
        """|I_T|"""
        return interval_volume(self.top, self.alpha)

    def sorted_tiles(self) -> t.List[Tile]:
        return sorted(self.tiles)

    def __len__(self):
        return len(self.tiles)


def _split_members(tree: Tree, r: t.Sequence[int]) -> t.Tuple[t.Set[Tile], t.Set[Tile]]:
    inside, outside = set(), set()
    for tile in tree.tiles:
        if in_two_tree(tile, tree.top, r, tree.alpha):
            inside.add(tile)
        else:
            outside.add(tile)
    return inside, outside


def classify_tree(tree: Tree, r: t.Sequence[int]) -> TreeClass:
    """
    two_tree when c(omega_T) lies in omega_{P(r)} for every member, one_tree when it
    lies in none of them. The top is neutral: it belongs to every 2-tree it heads and
    is ignored when deciding whether the rest of the tree is a 1-tree.
    """
    inside, outside = _split_members(tree, r)
    inside.discard(tree.top)
    if not outside:
        return TreeClass.TWO_TREE
    elif not inside:
        return TreeClass.ONE_TREE
    return TreeClass.MIXED


def tree_split(tree: Tree, r: t.Sequence[int]) -> t.Tuple[Tree, Tree]:
    """
    Splits a tree into its 2-tree part and its 1-tree part. Both parts keep the top of
    the original tree; the tiles are partitioned exactly, the top tile (if it is a
    member) going to the 2-tree part.
    """
    inside, outside = _split_members(tree, r)
    return Tree(tree.top, inside, tree.alpha), Tree(tree.top, outside, tree.alpha)


def tree_from_top(tiles: t.Iterable[Tile], top: Tile, alpha: AnisoExponent) -> Tree:
    """
    {P in tiles : P <= top}, which is always a tree with the given top.
    """
    return Tree(top, [p for p in tiles if tile_leq(p, top, alpha)], alpha)


def maximal_two_tree(
    tiles: t.Iterable[Tile], top: Tile, r: t.Sequence[int], alpha: AnisoExponent
) -> Tree:
    """
    T_Q = {P in tiles : P <= Q, c(omega_Q) in omega_{P(r)}} for the top Q.
    """
    return Tree(top, [p for p in tiles if in_two_tree(p, top, r, alpha)], alpha)
