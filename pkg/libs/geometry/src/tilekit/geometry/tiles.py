import math
import typing as t

import attr
import numpy as np

from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.cubes import (
    AnisoCube,
    cube_center,
    cube_contains,
    cubes_intersect,
)
from tilekit.geometry.rects import Rect
from tilekit.utilities.validators import Validators


@attr.s(frozen=True, order=True)
class Tile:
    """
    A tile P = I_P x omega_P with I_P = cube(k, space_index) and
    omega_P = cube(-k, freq_index), so that |I_P| |omega_P| = 1.

    The attrs ordering (k, space_index, freq_index) is the tie-breaking order used
    throughout the decomposition algorithms.
    """

    k = attr.ib(converter=lambda v: Validators.Integers.check_type(v, "k"))
    space_index = attr.ib(
        converter=lambda v: Validators.Sequences.integer_vector(v, "space_index")
    )
    freq_index = attr.ib(
        converter=lambda v: Validators.Sequences.integer_vector(v, "freq_index")
    )

    @freq_index.validator
    def _check_lengths(self, attribute, value):
        if len(value) != len(self.space_index):
            raise ValueError("Parameter freq_index must have the same length as space_index")

    @property
    def interval(self) -> AnisoCube:
        return AnisoCube(self.k, self.space_index)

    @property
    def frequency(self) -> AnisoCube:
        return AnisoCube(-self.k, self.freq_index)

    def to_record(self) -> list:
        return [self.k, list(self.space_index), list(self.freq_index)]

    @classmethod
    def from_record(cls, record) -> "Tile":
        k, space_index, freq_index = record
        return cls(k, space_index, freq_index)


def interval_volume(tile: Tile, alpha: AnisoExponent) -> float:
    return math.ldexp(1.0, tile.k * alpha.total)


def frequency_center(tile: Tile, alpha: AnisoExponent) -> np.ndarray:
    return cube_center(tile.frequency, alpha)


def semitile(tile: Tile, r: t.Sequence[int], alpha: AnisoExponent) -> Rect:
    """
    omega_{P(r)}: the half-open sub-rectangle of omega_P selected by the bits r.
    """
    r = Validators.Sequences.bit_vector(r, "r", alpha.n)
    lower = [
        math.ldexp(2 * nu + ri, -tile.k * a - 1)
        for nu, ri, a in zip(tile.freq_index, r, alpha)
    ]
    upper = [
        math.ldexp(2 * nu + ri + 1, -tile.k * a - 1)
        for nu, ri, a in zip(tile.freq_index, r, alpha)
    ]
    return Rect(lower, upper)


def _center_in_dyadic_interval(
    q: Tile, p: Tile, offsets: t.Sequence[int], width: int, alpha: AnisoExponent
) -> bool:
    """
    Whether c(omega_q) lies in prod [2 nu_p + o_i, 2 nu_p + o_i + width) 2 ** (-k_p alpha_i - 1),
    decided in exact integer arithmetic on a common dyadic exponent.
    """
    for nu_q, nu_p, offset, a in zip(q.freq_index, p.freq_index, offsets, alpha):
        exponent_q = -q.k * a - 1
        exponent_p = -p.k * a - 1
        common = min(exponent_q, exponent_p)
        center = (2 * nu_q + 1) << (exponent_q - common)
        lower = (2 * nu_p + offset) << (exponent_p - common)
        upper = (2 * nu_p + offset + width) << (exponent_p - common)
        if not (lower <= center < upper):
            return False
    return True


def center_in_frequency(q: Tile, p: Tile, alpha: AnisoExponent) -> bool:
    """c(omega_q) in omega_p."""
    return _center_in_dyadic_interval(q, p, [0] * alpha.n, 2, alpha)


def center_in_semitile(
    q: Tile, p: Tile, r: t.Sequence[int], alpha: AnisoExponent
) -> bool:
    """c(omega_q) in omega_{p(r)}, half-open."""
    return _center_in_dyadic_interval(q, p, r, 1, alpha)


def tile_leq(p: Tile, q: Tile, alpha: AnisoExponent) -> bool:
    """
    The tile order: p <= q iff I_p is inside I_q and c(omega_q) lies in omega_p.
    """
    return cube_contains(q.interval, p.interval, alpha) and center_in_frequency(
        q, p, alpha
    )


def tiles_intersect(p: Tile, q: Tile, alpha: AnisoExponent) -> bool:
    return cubes_intersect(p.interval, q.interval, alpha) and cubes_intersect(
        p.frequency, q.frequency, alpha
    )


def comparable_iff_intersect_check(p: Tile, q: Tile, alpha: AnisoExponent) -> bool:
    comparable = tile_leq(p, q, alpha) or tile_leq(q, p, alpha)
    return comparable == tiles_intersect(p, q, alpha)


def in_two_tree(p: Tile, top: Tile, r: t.Sequence[int], alpha: AnisoExponent) -> bool:
    """
    Whether p belongs to the 2-tree part of a tree with the given top. The top itself is
    always a member: its frequency center lies on the corner shared by all of its closed
    semitiles.
    """
    return p == top or (
        tile_leq(p, top, alpha) and center_in_semitile(top, p, r, alpha)
    )


@attr.s(frozen=True)
class TileArrays:
    """
    Column arrays of a tile list for vectorised relation matrices.
    """

    k = attr.ib(eq=False)
    space = attr.ib(eq=False)
    freq = attr.ib(eq=False)

    @classmethod
    def from_tiles(cls, tiles: t.Sequence[Tile], n: int) -> "TileArrays":
        if not tiles:
            empty = np.zeros((0, n), dtype=np.int64)
            return cls(np.zeros(0, dtype=np.int64), empty, empty.copy())
        return cls(
            np.array([p.k for p in tiles], dtype=np.int64),
            np.array([p.space_index for p in tiles], dtype=np.int64),
            np.array([p.freq_index for p in tiles], dtype=np.int64),
        )

    def __len__(self):
        return len(self.k)

    def rows(self, start: int, stop: int) -> "TileArrays":
        return TileArrays(
            self.k[start:stop], self.space[start:stop], self.freq[start:stop]
        )


def _relation_blocks(
    rows: TileArrays,
    cols: TileArrays,
    alpha: AnisoExponent,
    r: t.Optional[t.Sequence[int]],
    chunk: int,
) -> t.Iterator[t.Tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
    """
    Yields (start, leq, semi, freq_intersect) blocks for row tiles p against column
    tiles q where leq[i, j] = p_i <= q_j and semi[i, j] = c(omega_{q_j}) in omega_{p_i(r)}
    (only meaningful where k_p <= k_q).
    """
    a = alpha.as_array
    for start in range(0, max(len(rows), 1), chunk):
        block = rows.rows(start, start + chunk)
        if len(block) == 0:
            break
        dk = cols.k[None, :] - block.k[:, None]
        forward = dk >= 0
        shifts = np.where(forward, dk, 0)[:, :, None] * a[None, None, :]
        space_ancestor = np.right_shift(block.space[:, None, :], shifts)
        interval_inside = forward & np.all(space_ancestor == cols.space[None, :, :], axis=2)

        centers = 2 * cols.freq[None, :, :] + 1
        base = 2 * block.freq[:, None, :]
        frequency_inside = np.all(
            (np.left_shift(base, shifts) <= centers)
            & (centers < np.left_shift(base + 2, shifts)),
            axis=2,
        )
        leq = interval_inside & frequency_inside
        if r is not None:
            offset = np.asarray(r, dtype=np.int64)[None, None, :]
            semi = np.all(
                (np.left_shift(base + offset, shifts) <= centers)
                & (centers < np.left_shift(base + offset + 1, shifts)),
                axis=2,
            )
        else:
            semi = None
        # nested frequency cubes when k_p <= k_q: omega_q inside omega_p
        freq_intersect = forward & np.all(
            np.right_shift(cols.freq[None, :, :], shifts) == block.freq[:, None, :],
            axis=2,
        )
        yield start, leq, semi, freq_intersect


def leq_matrix(
    rows: t.Sequence[Tile],
    cols: t.Sequence[Tile],
    alpha: AnisoExponent,
    chunk: int = 256,
) -> np.ndarray:
    """
    Boolean matrix M[i, j] = rows[i] <= cols[j].
    """
    rows_a = TileArrays.from_tiles(rows, alpha.n)
    cols_a = TileArrays.from_tiles(cols, alpha.n)
    result = np.zeros((len(rows), len(cols)), dtype=bool)
    for start, leq, _, _ in _relation_blocks(rows_a, cols_a, alpha, None, chunk):
        result[start : start + len(leq)] = leq
    return result


def two_tree_matrix(
    tiles: t.Sequence[Tile],
    r: t.Sequence[int],
    alpha: AnisoExponent,
    chunk: int = 256,
) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    For one tile list returns (leq, in_two) where leq[i, j] = tiles[i] <= tiles[j] and
    in_two[i, j] says tiles[i] belongs to the maximal 2-tree with top tiles[j].
    """
    r = Validators.Sequences.bit_vector(r, "r", alpha.n)
    arrays = TileArrays.from_tiles(tiles, alpha.n)
    leq = np.zeros((len(tiles), len(tiles)), dtype=bool)
    in_two = np.zeros_like(leq)
    for start, block_leq, semi, _ in _relation_blocks(arrays, arrays, alpha, r, chunk):
        stop = start + len(block_leq)
        leq[start:stop] = block_leq
        in_two[start:stop] = block_leq & semi
    np.fill_diagonal(in_two, True)
    return leq, in_two


def intersect_matrix(
    tiles: t.Sequence[Tile], alpha: AnisoExponent, chunk: int = 256
) -> np.ndarray:
    """
    Boolean matrix of phase-space intersection of the realized rectangles I x omega.
    """
    arrays = TileArrays.from_tiles(tiles, alpha.n)
    forward = np.zeros((len(tiles), len(tiles)), dtype=bool)
    for start, _, _, freq_intersect in _relation_blocks(
        arrays, arrays, alpha, None, chunk
    ):
        block = arrays.rows(start, start + len(freq_intersect))
        dk = arrays.k[None, :] - block.k[:, None]
        shifts = np.where(dk >= 0, dk, 0)[:, :, None] * alpha.as_array[None, None, :]
        interval_inside = (dk >= 0) & np.all(
            np.right_shift(block.space[:, None, :], shifts) == arrays.space[None, :, :],
            axis=2,
        )
        forward[start : start + len(block)] = interval_inside & freq_intersect
    return forward | forward.T
