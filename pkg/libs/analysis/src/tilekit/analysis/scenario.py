import functools
import math
import typing as t

import attr
import numpy as np
from frozendict import frozendict

from tilekit.fourier.bump import BumpSpec
from tilekit.fourier.grid import GridFunction, GridSpec
from tilekit.fourier.multipliers import MultiplierSpec
from tilekit.fourier.packets import WavePacket
from tilekit.fourier.symmetries import Dilate
from tilekit.geometry.tiles import Tile
from tilekit.utilities.freezing import freeze_recursively
from tilekit.utilities.validators import Validators

MAXIMUM_SCALE_SPREAD = 6


def _to_tiles(value) -> t.Tuple[Tile, ...]:
    tiles = tuple(value)
    for tile in tiles:
        if not isinstance(tile, Tile):
            raise ValueError(f"Parameter tiles must only contain tiles, got {tile!r}")
    if len(set(tiles)) != len(tiles):
        raise ValueError("Parameter tiles must not contain duplicates")
    return tiles


def _frozen_array(value, dtype) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


def _default_nu1(instance) -> float:
    return instance.grid.alpha.total + 4.0 / 3.0


def _default_k_cap(instance) -> int:
    if not instance.tiles:
        return instance.grid.K
    return min(instance.grid.K, max(p.k for p in instance.tiles) + 2)


@attr.s(frozen=True, eq=False)
class Scenario:
    """
    Everything the model operator is evaluated on: a grid, a finite tile set, the semitile
    bits r, a multiplier, the function f, the set E as a boolean mask and the linearizing
    map N given by frequency lattice indices with shape (n,) + grid.shape.

    ``generator`` is the record the scenario was generated from, if any. It is what the
    scenario files store in place of the arrays.
    """

    grid = attr.ib(validator=attr.validators.instance_of(GridSpec))
    tiles = attr.ib(converter=_to_tiles)
    r = attr.ib(converter=lambda v: Validators.Sequences.nonzero_bit_vector(v, "r"))
    multiplier = attr.ib(validator=attr.validators.instance_of(MultiplierSpec))
    f = attr.ib(validator=attr.validators.instance_of(GridFunction))
    E = attr.ib(converter=lambda v: _frozen_array(v, bool))
    N = attr.ib(converter=lambda v: _frozen_array(v, np.int64))
    bump = attr.ib(factory=BumpSpec, validator=attr.validators.instance_of(BumpSpec))
    nu1 = attr.ib(
        default=attr.Factory(_default_nu1, takes_self=True),
        converter=lambda v: Validators.Floats.check_type(v, "nu1"),
    )
    k_cap = attr.ib(
        default=attr.Factory(_default_k_cap, takes_self=True),
        converter=lambda v: Validators.Integers.check_type(v, "k_cap"),
    )
    generator = attr.ib(default=frozendict(), converter=freeze_recursively)

    @tiles.validator
    def _check_tiles(self, attribute, value):
        for tile in value:
            self.grid.check_tile(tile, self.bump.b0)

    @r.validator
    def _check_r(self, attribute, value):
        if len(value) != self.grid.n:
            raise ValueError(f"Parameter r must have length {self.grid.n}")

    @multiplier.validator
    def _check_multiplier(self, attribute, value):
        if value.alpha != self.grid.alpha:
            raise ValueError("Parameter multiplier must have the exponent of the grid")

    @f.validator
    def _check_f(self, attribute, value):
        if value.grid != self.grid:
            raise ValueError("Parameter f must live on the scenario grid")

    @E.validator
    def _check_E(self, attribute, value):
        if value.shape != self.grid.shape:
            raise ValueError(f"Parameter E must have the grid shape {self.grid.shape}")

    @N.validator
    def _check_N(self, attribute, value):
        if value.shape != (self.grid.n,) + self.grid.shape:
            raise ValueError(
                f"Parameter N must have shape {(self.grid.n,) + self.grid.shape}"
            )
        for i, size in enumerate(self.grid.shape):
            if np.any(value[i] < -(size // 2)) or np.any(value[i] >= size // 2):
                raise ValueError(
                    f"Parameter N must stay inside the frequency band on axis {i}"
                )

    @nu1.validator
    def _check_nu1(self, attribute, value):
        if not value > self.grid.alpha.total + 1:
            raise ValueError(
                f"Parameter nu1 must be greater than |alpha| + 1 = {self.grid.alpha.total + 1}"
            )

    @k_cap.validator
    def _check_k_cap(self, attribute, value):
        if value > self.grid.K:
            raise ValueError("Parameter k_cap must not exceed the window scale K")
        if self.tiles:
            if value < max(p.k for p in self.tiles):
                raise ValueError("Parameter k_cap must not be below the largest tile scale")
            if value - self.k_min > MAXIMUM_SCALE_SPREAD:
                raise ValueError(
                    f"Parameter k_cap must not exceed k_min by more than {MAXIMUM_SCALE_SPREAD}"
                )

    @property
    def alpha(self):
        return self.grid.alpha

    @property
    def k_min(self) -> t.Optional[int]:
        return min((p.k for p in self.tiles), default=None)

    @property
    def k_max(self) -> t.Optional[int]:
        return max((p.k for p in self.tiles), default=None)

    @property
    def E_volume(self) -> float:
        return float(np.count_nonzero(self.E)) * self.grid.cell_volume

    @functools.cached_property
    def positions(self) -> t.Dict[Tile, int]:
        return {tile: i for i, tile in enumerate(self.tiles)}

    @functools.cached_property
    def packets(self) -> t.Tuple[WavePacket, ...]:
        return tuple(WavePacket(tile, self.grid, self.bump) for tile in self.tiles)

    def packet(self, tile: Tile) -> WavePacket:
        position = self.positions.get(tile)
        if position is None:
            return WavePacket(tile, self.grid, self.bump)
        return self.packets[position]

    @functools.cached_property
    def f_hat(self) -> np.ndarray:
        return self.f.to_frequency().samples

    @functools.cached_property
    def coefficients(self) -> np.ndarray:
        """<f, phi_P> in tile order."""
        f_hat = self.f_hat
        values = np.array(
            [packet.coefficient(f_hat) for packet in self.packets], dtype=complex
        )
        values.setflags(write=False)
        return values

    def coefficient(self, tile: Tile) -> complex:
        position = self.positions.get(tile)
        if position is None:
            return self.packet(tile).coefficient(self.f_hat)
        return complex(self.coefficients[position])

    def evolve(self, **changes) -> "Scenario":
        """
        A copy with some fields replaced. The generator record is dropped unless passed
        explicitly, since the arrays no longer follow from it.
        """
        changes.setdefault("generator", frozendict())
        return attr.evolve(self, **changes)

    def with_tiles(self, tiles: t.Iterable[Tile]) -> "Scenario":
        """The same scenario restricted to other tiles; the mass truncation is kept."""
        return attr.evolve(self, tiles=tuple(tiles))

    def dilated(self, j: int) -> "Scenario":
        """
        The image under delta_{2^j}: grid exponents and tile scales shift by j, f is L2
        dilated and the masks keep their samples. Wave packet coefficients and masses are
        unchanged, the measure of E scales by 2^{j |alpha|}.
        """
        j = Validators.Integers.check_type(j, "j")
        if j == 0:
            return self
        generator = dict(self.generator)
        if generator:
            generator["dilation"] = generator.get("dilation", 0) + j
        return Scenario(
            grid=self.grid.dilated(j),
            tiles=[Tile(p.k + j, p.space_index, p.freq_index) for p in self.tiles],
            r=self.r,
            multiplier=self.multiplier,
            f=Dilate(math.ldexp(1.0, j)).apply(self.f),
            E=self.E,
            N=self.N,
            bump=self.bump,
            nu1=self.nu1,
            k_cap=self.k_cap + j,
            generator=generator,
        )

    def normalized(self) -> t.Tuple["Scenario", int]:
        """
        The scenario with ||f||_2 = 1 and |E| <= 1, reached by scaling f and dilating by
        the returned power of two. A zero f is left as it is.
        """
        volume = self.E_volume
        j = 0
        if volume > 1.0:
            j = -math.ceil(math.log2(volume) / self.alpha.total)
        result = self.dilated(j)
        norm = result.f.norm()
        if norm > 0:
            result = attr.evolve(result, f=result.f.scaled(1.0 / norm))
        return result, j
