import itertools
import math
import typing as t

import attr
import numpy as np

from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.rects import Rect
from tilekit.utilities.validators import Validators


def _to_index(value) -> t.Tuple[int, ...]:
    return Validators.Sequences.integer_vector(value, "index")


@attr.s(frozen=True, order=True)
class AnisoCube:
    """
    The anisotropic dyadic cube [delta_{2^k} l, delta_{2^k} (l + 1)). Cubes are pure integer
    data, all containment logic is done by shifts so the nesting dichotomy holds exactly.
    """

    k = attr.ib(converter=lambda v: Validators.Integers.check_type(v, "k"))
    index = attr.ib(converter=_to_index)


def _check_dimension(cube: AnisoCube, alpha: AnisoExponent):
    if len(cube.index) != alpha.n:
        raise ValueError(
            f"Cube {cube} has dimension {len(cube.index)} but alpha has {alpha.n}"
        )


def cube_realize(cube: AnisoCube, alpha: AnisoExponent) -> Rect:
    _check_dimension(cube, alpha)
    lower = [math.ldexp(ell, cube.k * a) for ell, a in zip(cube.index, alpha)]
    upper = [math.ldexp(ell + 1, cube.k * a) for ell, a in zip(cube.index, alpha)]
    return Rect(lower, upper)


def cube_center(cube: AnisoCube, alpha: AnisoExponent) -> np.ndarray:
    _check_dimension(cube, alpha)
    return np.array(
        [math.ldexp(2 * ell + 1, cube.k * a - 1) for ell, a in zip(cube.index, alpha)]
    )


def cube_volume(cube: AnisoCube, alpha: AnisoExponent) -> float:
    return math.ldexp(1.0, cube.k * alpha.total)


def ancestor(cube: AnisoCube, k: int, alpha: AnisoExponent) -> AnisoCube:
    """
    The unique cube of scale k >= cube.k containing cube.
    """
    if k < cube.k:
        raise ValueError(f"Parameter k must be at least the cube scale {cube.k}")
    steps = k - cube.k
    return AnisoCube(k, tuple(ell >> (steps * a) for ell, a in zip(cube.index, alpha)))


def parent(cube: AnisoCube, alpha: AnisoExponent) -> AnisoCube:
    return ancestor(cube, cube.k + 1, alpha)


def children(cube: AnisoCube, alpha: AnisoExponent) -> t.List[AnisoCube]:
    """
    All 2 ** |alpha| cubes of scale k - 1 inside cube, in lexicographic order.
    """
    _check_dimension(cube, alpha)
    offsets = itertools.product(*[range(2 ** a) for a in alpha])
    return [
        AnisoCube(
            cube.k - 1,
            tuple((ell << a) + o for ell, a, o in zip(cube.index, alpha, offset)),
        )
        for offset in offsets
    ]


def cube_contains(outer: AnisoCube, inner: AnisoCube, alpha: AnisoExponent) -> bool:
    return inner.k <= outer.k and ancestor(inner, outer.k, alpha) == outer


def cubes_intersect(a: AnisoCube, b: AnisoCube, alpha: AnisoExponent) -> bool:
    return cube_contains(a, b, alpha) or cube_contains(b, a, alpha)


def enlarged(cube: AnisoCube, alpha: AnisoExponent) -> Rect:
    """
    Same center as the cube, side i stretched by the factor 2 ** (alpha_i + 1) - 1.
    """
    lengths = [
        (2 ** (a + 1) - 1) * math.ldexp(1.0, cube.k * a) for a in alpha
    ]
    return Rect.centered(cube_center(cube, alpha), lengths)


def scaled_cube(cube: AnisoCube, j: int, alpha: AnisoExponent) -> Rect:
    """
    The rectangle centered on the cube with half-lengths 2 ** ((k + j) alpha_i - 1).
    """
    j = Validators.Integers.non_negative(j, "j")
    lengths = [math.ldexp(1.0, (cube.k + j) * a) for a in alpha]
    return Rect.centered(cube_center(cube, alpha), lengths)


def partition_J(
    tile_intervals: t.Iterable[AnisoCube],
    window: AnisoCube,
    k_floor: int,
    alpha: AnisoExponent,
) -> t.List[AnisoCube]:
    """
    Maximal dyadic cubes J inside window, of scale at least k_floor, whose enlargement
    contains none of the tile intervals. Cubes reaching k_floor are kept even when their
    enlargement still contains an interval, so the output always partitions the window.

    Returns
    -------
    The partition sorted in cube order.
    """
    tile_intervals = sorted(set(tile_intervals))
    if tile_intervals and k_floor > min(c.k for c in tile_intervals):
        raise ValueError(
            "Parameter k_floor must not exceed the smallest tile interval scale"
        )
    if k_floor > window.k:
        raise ValueError("Parameter k_floor must not exceed the window scale")

    if tile_intervals:
        realized = [cube_realize(c, alpha) for c in tile_intervals]
        lowers = np.array([r.lower for r in realized])
        uppers = np.array([r.upper for r in realized])
    else:
        lowers = uppers = np.zeros((0, alpha.n))

    def blocked(cube: AnisoCube) -> bool:
        box = enlarged(cube, alpha)
        inside = (lowers >= np.asarray(box.lower)) & (uppers <= np.asarray(box.upper))
        return bool(np.any(np.all(inside, axis=1)))

    result = []
    stack = [window]
    while stack:
        cube = stack.pop()
        if cube.k == k_floor or not blocked(cube):
            result.append(cube)
        else:
            stack.extend(children(cube, alpha))
    return sorted(result)
