"""
The anisotropic maximal function on the periodic grid. Cubes are the dyadic cubes of
every scale from one cell to the window, translated by a third and two thirds of their
side along each axis; the exhaustive variant translates by every sample and is only
meant for tiny grids.
"""
import itertools
import typing as t

import attr
import numpy as np

from tilekit.fourier.grid import GridFunction, GridSpec
from tilekit.fourier.weights import periodic_rho
from tilekit.geometry.cubes import AnisoCube, cube_contains, cube_realize
from tilekit.utilities.validators import Validators


def _sides(grid: GridSpec, scale: int) -> t.Tuple[int, ...]:
    return tuple(2 ** ((scale - grid.k0) * a) for a in grid.alpha)


def block_average(
    values: np.ndarray, grid: GridSpec, scale: int, shifts: t.Sequence[int]
) -> np.ndarray:
    """
    Every sample replaced by the mean of values over the periodic dyadic cube of the
    given scale, translated by shifts samples, that contains it.
    """
    axes = tuple(range(grid.n))
    sides = _sides(grid, scale)
    out = np.roll(values, [-s for s in shifts], axis=axes)
    blocked = out.reshape(
        [v for size, side in zip(grid.shape, sides) for v in (size // side, side)]
    )
    means = blocked.mean(axis=tuple(2 * i + 1 for i in axes))
    for axis, side in enumerate(sides):
        means = np.repeat(means, side, axis=axis)
    return np.roll(means, list(shifts), axis=axes)


def _third_shifts(side: int) -> t.List[int]:
    return sorted({0, side // 3, (2 * side) // 3})


def _maximal(
    g: GridFunction, shift_choices: t.Callable[[int], t.Iterable[int]]
) -> GridFunction:
    grid = g.grid
    values = np.abs(g.to_physical().samples)
    out = np.zeros(grid.shape)
    for scale in range(grid.k0, grid.K + 1):
        choices = [shift_choices(side) for side in _sides(grid, scale)]
        for shifts in itertools.product(*choices):
            np.maximum(out, block_average(values, grid, scale, shifts), out=out)
    return GridFunction(grid, out)


def aniso_maximal(g: GridFunction) -> GridFunction:
    """
    sup over the translated dyadic cubes I containing y of |I|^{-1} int_I |g|.
    """
    return _maximal(g, _third_shifts)


def dyadic_maximal(g: GridFunction) -> GridFunction:
    return _maximal(g, lambda side: [0])


def exhaustive_maximal(g: GridFunction) -> GridFunction:
    """The sup over the dyadic cubes translated by every sample offset."""
    return _maximal(g, range)


def proxy_ratio(g: GridFunction) -> float:
    """
    The largest ratio of the exhaustive to the translated-dyadic maximal function, a
    measure of what the proxy misses.
    """
    proxy = aniso_maximal(g).samples.real
    exact = exhaustive_maximal(g).samples.real
    positive = proxy > 0
    if not np.any(positive):
        return 1.0
    return float(np.max(exact[positive] / proxy[positive]))


@attr.s(frozen=True)
class DominationCheck:
    """
    |g * w|(x) against ||w||_1 times the largest average of |g| over the cubes
    containing J.
    """

    convolution = attr.ib()
    weight_mass = attr.ib()
    largest_average = attr.ib()

    @property
    def bound(self) -> float:
        return self.weight_mass * self.largest_average

    def holds(self, slack: float = 1e-10) -> bool:
        return self.convolution <= self.bound + slack


def _sample_ranges(cube: AnisoCube, grid: GridSpec) -> t.List[range]:
    rect = cube_realize(cube, grid.alpha)
    return [
        range(int(round(lo / h)), int(round(up / h)))
        for lo, up, h in zip(rect.lower, rect.upper, grid.spacings)
    ]


def maximal_domination_check(
    g: GridFunction,
    levels: t.Sequence[t.Tuple[float, float]],
    x_index: t.Sequence[int],
    J: AnisoCube,
) -> DominationCheck:
    """
    For the radially decreasing step weight w = sum_j a_j 1_{rho <= lambda_j} and a dyadic
    cube J inside {rho(x - .) <= min lambda_j}, compares |g * w|(x) with ||w||_1 times the
    largest average of |g| over the rho-balls around x and the translated dyadic cubes
    that contain J.
    """
    grid = g.grid
    if not levels:
        raise ValueError("Parameter levels must not be empty")
    levels = [
        (
            Validators.Floats.greater_than_zero(radius, "radius"),
            Validators.Floats.non_negative(height, "height"),
        )
        for radius, height in levels
    ]
    if J.k < grid.k0 or not cube_contains(grid.window, J, grid.alpha):
        raise ValueError(f"Cube {J} is not a union of cells of the grid window")
    x_index = tuple(int(v) for v in x_index)
    x = np.array([i * h for i, h in zip(x_index, grid.spacings)])
    rho = periodic_rho(grid, x)
    ranges = _sample_ranges(J, grid)
    smallest = min(radius for radius, _ in levels)
    if np.any(rho[np.ix_(*ranges)] > smallest):
        raise ValueError(f"Cube {J} does not lie in the smallest level set around x")

    values = np.abs(g.to_physical().samples)
    weight = np.zeros(grid.shape)
    averages = []
    for radius, height in levels:
        ball = rho <= radius
        weight += height * ball
        averages.append(float(values[ball].mean()))
    convolution = abs(np.sum(g.to_physical().samples * weight)) * grid.cell_volume
    weight_mass = float(np.sum(weight) * grid.cell_volume)

    corner = [r.start for r in ranges]
    last = [r.stop - 1 for r in ranges]
    for scale in range(J.k, grid.K + 1):
        sides = _sides(grid, scale)
        choices = [_third_shifts(side) for side in sides]
        for shifts in itertools.product(*choices):
            containing = all(
                (lo - s) // side == (hi - s) // side
                for lo, hi, s, side in zip(corner, last, shifts, sides)
            )
            if containing:
                averages.append(
                    float(block_average(values, grid, scale, shifts)[tuple(corner)])
                )
    return DominationCheck(float(convolution), weight_mass, max(averages))
