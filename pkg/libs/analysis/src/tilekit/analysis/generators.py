"""
Seeded random scenarios. Every random component draws from its own RandomState seeded
with (seed, component) so that f, E and N can be regenerated independently of the tiles,
which is what lets scenario files store the tiles and the generator record only.
"""
import logging
import typing as t

import attr
import numpy as np
from frozendict import frozendict

from tilekit.analysis.operators import semitile_center_index
from tilekit.analysis.scenario import Scenario
from tilekit.fourier.bump import BumpSpec
from tilekit.fourier.catalogue import build_multiplier
from tilekit.fourier.grid import GridFunction, GridSpec, Representation
from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.tiles import Tile
from tilekit.utilities.freezing import freeze_recursively, unfreeze_recursively
from tilekit.utilities.validators import Validators

_logger = logging.getLogger(__name__)

TILES, FUNCTION, SET, LINEARIZER = range(4)


def _random_state(seed: int, component: int) -> np.random.RandomState:
    return np.random.RandomState([seed, component])


def _int(name: str):
    return lambda v: Validators.Integers.check_type(v, name)


@attr.s(frozen=True)
class GeneratorParams:
    """
    Parameters of a random scenario. Tile scales are drawn uniformly from
    [k_min, k_max], then positions uniformly among the admissible ones. E and N are
    constant on the dyadic cubes of scale block_scale, which defaults to k_min.
    """

    alpha = attr.ib(default=(1, 2), converter=AnisoExponent)
    K = attr.ib(default=4, converter=_int("K"))
    k0 = attr.ib(default=-2, converter=_int("k0"))
    k_min = attr.ib(default=-1, converter=_int("k_min"))
    k_max = attr.ib(default=0, converter=_int("k_max"))
    tile_count = attr.ib(
        default=50, converter=lambda v: Validators.Integers.non_negative(v, "tile_count")
    )
    seed = attr.ib(default=0, converter=lambda v: Validators.Integers.non_negative(v, "seed"))
    r = attr.ib(
        default=attr.Factory(lambda self: (1,) + (0,) * (self.alpha.n - 1), takes_self=True),
        converter=lambda v: Validators.Sequences.nonzero_bit_vector(v, "r"),
    )
    multiplier = attr.ib(default="constant", validator=attr.validators.instance_of(str))
    multiplier_params = attr.ib(default=frozendict(), converter=freeze_recursively)
    b0 = attr.ib(default=0.1, converter=lambda v: Validators.Floats.check_type(v, "b0"))
    b1 = attr.ib(default=0.09, converter=lambda v: Validators.Floats.check_type(v, "b1"))
    nu1 = attr.ib(
        default=attr.Factory(lambda self: self.alpha.total + 4.0 / 3.0, takes_self=True),
        converter=lambda v: Validators.Floats.check_type(v, "nu1"),
    )
    e_density = attr.ib(
        default=0.5,
        converter=lambda v: Validators.Floats.in_closed_interval(v, 0.0, 1.0, "e_density"),
    )
    block_scale = attr.ib(
        default=attr.Factory(lambda self: self.k_min, takes_self=True),
        converter=_int("block_scale"),
    )
    dilation = attr.ib(default=0, converter=_int("dilation"))

    @k_max.validator
    def _check_scales(self, attribute, value):
        if self.k_min > value:
            raise ValueError("Parameter k_min must not exceed k_max")

    @r.validator
    def _check_r(self, attribute, value):
        if len(value) != self.alpha.n:
            raise ValueError(f"Parameter r must have length {self.alpha.n}")

    @block_scale.validator
    def _check_block_scale(self, attribute, value):
        if not (self.k0 <= value <= self.K):
            raise ValueError("Parameter block_scale must lie between k0 and K")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.alpha, self.K, self.k0)

    @property
    def bump(self) -> BumpSpec:
        return BumpSpec(self.b0, self.b1)

    def to_record(self) -> t.Dict[str, t.Any]:
        record = attr.asdict(self, recurse=False)
        record["alpha"] = list(self.alpha)
        record["r"] = list(self.r)
        record["multiplier_params"] = unfreeze_recursively(self.multiplier_params)
        return record

    @classmethod
    def from_record(cls, record: t.Mapping[str, t.Any]) -> "GeneratorParams":
        fields = {f.name for f in attr.fields(cls)}
        unknown = set(record) - fields
        if unknown:
            raise ValueError(f"Unknown generator parameters {sorted(unknown)}")
        return cls(**record)


def _check_scales(params: GeneratorParams, grid: GridSpec) -> int:
    """Returns the number of admissible tiles over all scales."""
    total = 0
    for k in range(params.k_min, params.k_max + 1):
        grid.check_tile(Tile(k, (0,) * grid.n, (0,) * grid.n), params.b0)
        count = 1
        for positions in grid.admissible_space_indices(k) + grid.admissible_frequency_indices(k):
            count *= len(positions)
        total += count
    return total


def generate_tiles(params: GeneratorParams) -> t.List[Tile]:
    """
    tile_count distinct admissible tiles in the order they were drawn.
    """
    grid = params.grid
    available = _check_scales(params, grid)
    if params.tile_count > available:
        raise ValueError(
            f"Parameter tile_count must not exceed the {available} admissible tiles"
        )
    random_state = _random_state(params.seed, TILES)
    tiles = {}
    while len(tiles) < params.tile_count:
        k = int(random_state.randint(params.k_min, params.k_max + 1))
        space = tuple(
            int(positions[random_state.randint(len(positions))])
            for positions in grid.admissible_space_indices(k)
        )
        freq = tuple(
            int(positions[random_state.randint(len(positions))])
            for positions in grid.admissible_frequency_indices(k)
        )
        tiles.setdefault(Tile(k, space, freq), None)
    return list(tiles)


def generate_function(grid: GridSpec, seed: int) -> GridFunction:
    """f with i.i.d. complex Gaussian transform samples, normalized to ||f||_2 = 1."""
    random_state = _random_state(seed, FUNCTION)
    samples = random_state.standard_normal(grid.shape) + 1j * random_state.standard_normal(
        grid.shape
    )
    f = GridFunction(grid, samples, Representation.FREQUENCY)
    return f.scaled(1.0 / f.norm())


def expand_blocks(values: np.ndarray, grid: GridSpec, scale: int) -> np.ndarray:
    """
    Samples of the function equal to values[b] on the b-th dyadic cube of the given
    scale.
    """
    out = values
    for axis, a in enumerate(grid.alpha):
        out = np.repeat(out, 2 ** ((scale - grid.k0) * a), axis=axis)
    return out


def block_shape(grid: GridSpec, scale: int) -> t.Tuple[int, ...]:
    return tuple(2 ** ((grid.K - scale) * a) for a in grid.alpha)


def generate_set(grid: GridSpec, seed: int, scale: int, density: float) -> np.ndarray:
    """E as a random union of the dyadic cubes of the given scale."""
    random_state = _random_state(seed, SET)
    chosen = random_state.random_sample(block_shape(grid, scale)) < density
    return expand_blocks(chosen, grid, scale)


def generate_linearizer(
    grid: GridSpec,
    tiles: t.Sequence[Tile],
    r: t.Sequence[int],
    seed: int,
    scale: int,
) -> np.ndarray:
    """
    N constant on the dyadic cubes of the given scale. Each cube takes, with equal
    chance, the semitile center of a random tile or a uniform point of the frequency
    lattice.
    """
    random_state = _random_state(seed, LINEARIZER)
    shape = block_shape(grid, scale)
    count = int(np.prod(shape))
    values = np.empty((grid.n, count), dtype=np.int64)
    for i, size in enumerate(grid.shape):
        values[i] = random_state.randint(-(size // 2), size // 2, size=count)
    if tiles:
        centers = np.array([semitile_center_index(p, r, grid) for p in tiles])
        use_tile = random_state.random_sample(count) < 0.5
        picks = random_state.randint(len(tiles), size=count)
        values[:, use_tile] = centers[picks[use_tile]].T
    return np.stack(
        [expand_blocks(values[i].reshape(shape), grid, scale) for i in range(grid.n)]
    )


def generate_scenario(
    params: GeneratorParams, tiles: t.Optional[t.Sequence[Tile]] = None
) -> Scenario:
    """
    The scenario described by params. Explicit tiles replace the drawn ones; they are
    given at the final scales, that is after the recorded dilation.
    """
    base = attr.evolve(params, dilation=0)
    grid = base.grid
    if tiles is None:
        tiles = generate_tiles(base)
    else:
        tiles = [Tile(p.k - params.dilation, p.space_index, p.freq_index) for p in tiles]
    scenario = Scenario(
        grid=grid,
        tiles=tiles,
        r=base.r,
        multiplier=build_multiplier(base.multiplier, base.alpha, base.multiplier_params),
        f=generate_function(grid, base.seed),
        E=generate_set(grid, base.seed, base.block_scale, base.e_density),
        N=generate_linearizer(grid, tiles, base.r, base.seed, base.block_scale),
        bump=base.bump,
        nu1=base.nu1,
        generator=base.to_record(),
    )
    _logger.debug(
        f"Generated scenario with {len(tiles)} tiles on grid {grid.shape}, seed {base.seed}"
    )
    return scenario.dilated(params.dilation)
