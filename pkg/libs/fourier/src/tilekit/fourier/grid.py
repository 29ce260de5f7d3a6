import enum
import math
import typing as t

import attr
import numpy as np
from frozendict import frozendict

from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.cubes import AnisoCube, cube_contains
from tilekit.geometry.tiles import Tile
from tilekit.utilities.validators import Validators

# phi_hat_P has side b0 |omega_P| and must fit in the lower half omega_{P(0)}
MAX_PACKET_B0 = 0.5


class ResolutionError(ValueError):
    """
    A tile is too fine or too coarse for the sampling lattice of a grid.
    """


class OutOfWindowError(ValueError):
    """
    A tile lies outside the spatial window or the frequency band of a grid.
    """


def _check_k0(instance, attribute, value):
    if value > 0:
        raise ValueError("Parameter k0 must be non-positive")
    if value >= instance.K:
        raise ValueError("Parameter k0 must be smaller than K")


@attr.s(frozen=True)
class GridSpec:
    """
    The periodic sampling grid on the window prod [0, 2 ** (K alpha_i)) with spacing
    2 ** (k0 alpha_i), hence 2 ** ((K - k0) alpha_i) points per axis. The dual lattice
    is (1 / L_1) Z x ... x (1 / L_n) Z restricted to the Nyquist band, and all transforms
    use the kernel exp(2 pi i x . xi).
    """

    alpha = attr.ib(converter=AnisoExponent)
    K = attr.ib(converter=lambda v: Validators.Integers.check_type(v, "K"))
    k0 = attr.ib(
        converter=lambda v: Validators.Integers.check_type(v, "k0"), validator=_check_k0
    )

    @property
    def n(self) -> int:
        return self.alpha.n

    @property
    def shape(self) -> t.Tuple[int, ...]:
        return tuple(2 ** ((self.K - self.k0) * a) for a in self.alpha)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([math.ldexp(1.0, self.K * a) for a in self.alpha])

    @property
    def spacings(self) -> np.ndarray:
        return np.array([math.ldexp(1.0, self.k0 * a) for a in self.alpha])

    @property
    def cell_volume(self) -> float:
        return math.ldexp(1.0, self.k0 * self.alpha.total)

    @property
    def window_volume(self) -> float:
        return math.ldexp(1.0, self.K * self.alpha.total)

    @property
    def frequency_cell_volume(self) -> float:
        return 1.0 / self.window_volume

    @property
    def window(self) -> AnisoCube:
        return AnisoCube(self.K, (0,) * self.n)

    @property
    def spacing_scale(self) -> float:
        """rho of the spacing vector, the length scale of one cell."""
        return math.ldexp(1.0, self.k0)

    def axis_positions(self, axis: int) -> np.ndarray:
        return np.arange(self.shape[axis]) * self.spacings[axis]

    def axis_frequency_indices(self, axis: int) -> np.ndarray:
        """
        Integer lattice indices m of the frequencies m / L in numpy fft order.
        """
        size = self.shape[axis]
        return np.rint(np.fft.fftfreq(size, 1.0 / size)).astype(np.int64)

    def axis_frequencies(self, axis: int) -> np.ndarray:
        return self.axis_frequency_indices(axis) / self.lengths[axis]

    def positions(self) -> np.ndarray:
        """Sample positions stacked along a trailing axis."""
        return np.stack(
            np.meshgrid(*[self.axis_positions(i) for i in range(self.n)], indexing="ij"),
            axis=-1,
        )

    def frequencies(self) -> np.ndarray:
        return np.stack(
            np.meshgrid(
                *[self.axis_frequencies(i) for i in range(self.n)], indexing="ij"
            ),
            axis=-1,
        )

    def frequency_indices(self) -> np.ndarray:
        return np.stack(
            np.meshgrid(
                *[self.axis_frequency_indices(i) for i in range(self.n)], indexing="ij"
            ),
            axis=0,
        )

    def frequency_of(self, index: t.Sequence[int]) -> np.ndarray:
        return np.asarray(index, dtype=float) / self.lengths

    def refined(self) -> "GridSpec":
        """
        The grid whose window is one scale larger at the same spacing: a finer frequency
        lattice and more points.
        """
        return GridSpec(self.alpha, self.K + 1, self.k0)

    def dilated(self, j: int) -> "GridSpec":
        """
        The image of the grid under delta_{2^j}: window and spacing scale together.
        """
        return GridSpec(self.alpha, self.K + j, self.k0 + j)

    def tile_scale_range(self) -> t.Tuple[int, int]:
        """
        Scales k for which c(I_P) lies on the sample lattice and c(omega_{P(0)}) on the
        frequency lattice.
        """
        return self.k0 + 1, self.K - 2

    def check_tile(self, tile: Tile, b0: float) -> Tile:
        """
        Returns the tile if its wave packet is representable on this grid, else raises
        ResolutionError or OutOfWindowError.
        """
        if len(tile.space_index) != self.n:
            raise ValueError(f"Tile {tile} does not have dimension {self.n}")
        if b0 > MAX_PACKET_B0:
            raise ValueError(
                f"Parameter b0 must be at most {MAX_PACKET_B0} for wave packets, got {b0}"
            )
        k_low, k_high = self.tile_scale_range()
        if tile.k > self.K or not cube_contains(self.window, tile.interval, self.alpha):
            raise OutOfWindowError(f"Tile {tile} lies outside the grid window")
        if not (k_low <= tile.k <= k_high):
            raise ResolutionError(
                f"Tile {tile} has scale outside the resolvable range [{k_low}, {k_high}]"
            )
        for nu, a, size in zip(tile.freq_index, self.alpha, self.shape):
            cells = 2 ** ((self.K - tile.k) * a)
            if b0 * cells < 1:
                raise ResolutionError(
                    f"Tile {tile} has a bump support thinner than one frequency cell"
                )
            if nu * cells < -size // 2 or (nu + 1) * cells > size // 2:
                raise OutOfWindowError(
                    f"Tile {tile} has a frequency cube outside the Nyquist band"
                )
        return tile

    def admissible_frequency_indices(self, k: int) -> t.List[range]:
        """
        Per axis, the frequency indices nu of tiles of scale k inside the band.
        """
        ranges = []
        for a, size in zip(self.alpha, self.shape):
            cells = 2 ** ((self.K - k) * a)
            ranges.append(range(-(size // 2) // cells, (size // 2) // cells))
        return ranges

    def admissible_space_indices(self, k: int) -> t.List[range]:
        return [range(2 ** ((self.K - k) * a)) for a in self.alpha]


class Representation(enum.Enum):
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


def _frozen_samples(value) -> np.ndarray:
    samples = np.array(value, dtype=np.complex128)
    samples.setflags(write=False)
    return samples


@attr.s(frozen=True, eq=False)
class GridFunction:
    """
    Complex samples on a grid, either the physical values f(x_j) or the transform values
    f_hat(xi_m) = |cell| fftn(f). Metadata carries flags raised while building the function.
    """

    grid = attr.ib(validator=attr.validators.instance_of(GridSpec))
    samples = attr.ib(converter=_frozen_samples)
    representation = attr.ib(
        default=Representation.PHYSICAL,
        validator=attr.validators.instance_of(Representation),
    )
    metadata = attr.ib(default=frozendict(), converter=frozendict)

    @samples.validator
    def _check_shape(self, attribute, value):
        if value.shape != self.grid.shape:
            raise ValueError(
                f"Samples of shape {value.shape} do not match the grid shape {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: GridSpec, representation=Representation.PHYSICAL):
        return cls(grid, np.zeros(grid.shape), representation)

    def to_frequency(self) -> "GridFunction":
        if self.representation is Representation.FREQUENCY:
            return self
        return GridFunction(
            self.grid,
            self.grid.cell_volume * np.fft.fftn(self.samples),
            Representation.FREQUENCY,
            self.metadata,
        )

    def to_physical(self) -> "GridFunction":
        if self.representation is Representation.PHYSICAL:
            return self
        return GridFunction(
            self.grid,
            np.fft.ifftn(self.samples) / self.grid.cell_volume,
            Representation.PHYSICAL,
            self.metadata,
        )

    def norm(self) -> float:
        """L2 norm with respect to the measure of the current representation."""
        weight = (
            self.grid.cell_volume
            if self.representation is Representation.PHYSICAL
            else self.grid.frequency_cell_volume
        )
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * weight))

    def inner(self, other: "GridFunction") -> complex:
        """<self, other> = integral of self times conj(other)."""
        if self.grid != other.grid:
            raise ValueError("Cannot pair functions on different grids")
        left, right = self.to_frequency(), other.to_frequency()
        return complex(
            np.vdot(right.samples, left.samples) * self.grid.frequency_cell_volume
        )

    def scaled(self, factor: complex) -> "GridFunction":
        return GridFunction(self.grid, self.samples * factor, self.representation)

    def _combine(self, other: "GridFunction", sign: int) -> "GridFunction":
        if self.grid != other.grid:
            raise ValueError("Cannot combine functions on different grids")
        if self.representation is not other.representation:
            other = (
                other.to_physical()
                if self.representation is Representation.PHYSICAL
                else other.to_frequency()
            )
        return GridFunction(
            self.grid, self.samples + sign * other.samples, self.representation
        )

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self._combine(other, 1)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self._combine(other, -1)
