import functools
import logging
import typing as t

import attr
import numpy as np

from tilekit.fourier.bump import BumpSpec
from tilekit.fourier.grid import GridFunction, GridSpec, Representation
from tilekit.fourier.multipliers import eval_multiplier
from tilekit.geometry.tiles import Tile

_logger = logging.getLogger(__name__)


def _packet_axis_factor(
    tile: Tile, grid: GridSpec, bump: BumpSpec, axis: int
) -> np.ndarray:
    """
    One factor of phi_hat_P along a frequency axis, normalized to unit discrete L2 norm:
    phi_hat_1(2^{k a}(xi - c_omega)) exp(-2 pi i c_I (xi - c_omega)), with c_omega the
    center of omega_{P(0)} and c_I the center of I_P.
    """
    a = grid.alpha[axis]
    size = grid.shape[axis]
    shift = (grid.K - tile.k) * a
    nu = tile.freq_index[axis]
    ell = tile.space_index[axis]
    # c_omega L and c_I / h are integers for admissible tiles
    center = (4 * nu + 1) << (shift - 2)
    position = (2 * ell + 1) << ((tile.k - grid.k0) * a - 1)
    offset = grid.axis_frequency_indices(axis) - center
    amplitude = bump.profile(np.ldexp(offset.astype(float), -shift))
    residue = np.mod(position * offset, size)
    factor = amplitude * np.exp(-2j * np.pi * residue / size)
    norm = np.sqrt(np.sum(amplitude ** 2) / grid.lengths[axis])
    return factor / norm


@attr.s(frozen=True, eq=False)
class WavePacket:
    """
    phi_P = M_{c(omega_{P(0)})} T_{c(I_P)} D^2_{2^{k_P}} phi, stored as one frequency
    factor per axis together with the indices where that factor is nonzero.
    """

    tile = attr.ib(validator=attr.validators.instance_of(Tile))
    grid = attr.ib(validator=attr.validators.instance_of(GridSpec))
    bump = attr.ib(factory=BumpSpec)

    def __attrs_post_init__(self):
        self.grid.check_tile(self.tile, self.bump.b0)

    @functools.cached_property
    def factors(self) -> t.Tuple[np.ndarray, ...]:
        return tuple(
            _packet_axis_factor(self.tile, self.grid, self.bump, i)
            for i in range(self.grid.n)
        )

    @functools.cached_property
    def support(self) -> t.Tuple[np.ndarray, ...]:
        """Per axis, the frequency sample indices where phi_hat_P is nonzero."""
        return tuple(np.flatnonzero(factor) for factor in self.factors)

    @property
    def support_index(self):
        return np.ix_(*self.support)

    def local_samples(self) -> np.ndarray:
        """phi_hat_P on the support box."""
        out = self.factors[0][self.support[0]]
        for factor, support in zip(self.factors[1:], self.support[1:]):
            out = np.multiply.outer(out, factor[support])
        return out

    def frequency_samples(self) -> np.ndarray:
        out = np.zeros(self.grid.shape, dtype=complex)
        out[self.support_index] = self.local_samples()
        return out

    def to_grid_function(self) -> GridFunction:
        return GridFunction(self.grid, self.frequency_samples(), Representation.FREQUENCY)

    def coefficient(self, f_hat: np.ndarray) -> complex:
        """<f, phi_P> from the frequency samples of f."""
        local = f_hat[self.support_index]
        return complex(
            np.vdot(self.local_samples(), local) * self.grid.frequency_cell_volume
        )


def phi_P(tile: Tile, bump: BumpSpec, grid: GridSpec) -> GridFunction:
    return WavePacket(tile, grid, bump).to_grid_function()


def packet_coefficients(
    tiles: t.Sequence[Tile], f: GridFunction, bump: BumpSpec
) -> np.ndarray:
    """<f, phi_P> for every tile."""
    f_hat = f.to_frequency().samples
    return np.array(
        [WavePacket(tile, f.grid, bump).coefficient(f_hat) for tile in tiles],
        dtype=complex,
    )


def psi_local_samples(
    packet: WavePacket, N_index: t.Sequence[int], m
) -> t.Tuple[np.ndarray, bool]:
    """
    m(xi - N) phi_hat_P(xi) on the support box of the packet, and whether xi - N vanishes
    at a point of the support where phi_hat_P does not.
    """
    grid = packet.grid
    local = packet.local_samples()
    N_index = np.asarray(N_index, dtype=np.int64)
    axes = [
        (grid.axis_frequency_indices(i)[packet.support[i]] - N_index[i])
        / grid.lengths[i]
        for i in range(grid.n)
    ]
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    origin = np.all(points == 0, axis=-1)
    return eval_multiplier(m, points) * local, bool(np.any(origin & (local != 0)))


def psi_P_N(
    tile: Tile,
    N_index: t.Sequence[int],
    m,
    grid: GridSpec,
    bump: t.Optional[BumpSpec] = None,
) -> GridFunction:
    """
    psi^N_P with frequency samples m(xi - N) phi_hat_P(xi). The frequency point N is given
    by its lattice index. The metadata flag ``origin_on_support`` records that xi - N
    vanished on the support of phi_hat_P, where the multiplier takes the value 0.
    """
    packet = WavePacket(tile, grid, bump or BumpSpec())
    values, flagged = psi_local_samples(packet, N_index, m)
    out = np.zeros(grid.shape, dtype=complex)
    out[packet.support_index] = values
    if flagged:
        _logger.debug(f"Multiplier origin lies on the support of {tile} for N={N_index}")
    return GridFunction(
        grid, out, Representation.FREQUENCY, {"origin_on_support": flagged}
    )


def synthesize_at(
    local: np.ndarray,
    support: t.Sequence[np.ndarray],
    grid: GridSpec,
    points: t.Sequence[np.ndarray],
) -> np.ndarray:
    """
    Physical values at the given sample indices of the function whose transform equals
    local on the box support and vanishes elsewhere. Costs one product of the box size
    with the number of points instead of a full inverse transform.
    """
    letters = "abcdefghijklmnopqrstuvwxy"[: grid.n]
    factors = []
    for i, (positions, columns) in enumerate(zip(points, support)):
        size = grid.shape[i]
        indices = grid.axis_frequency_indices(i)[columns]
        residue = np.mod(np.multiply.outer(np.asarray(positions, dtype=np.int64), indices), size)
        factors.append(np.exp(2j * np.pi * residue / size))
    subscripts = ",".join(f"z{c}" for c in letters) + f",{letters}->z"
    return np.einsum(subscripts, *factors, local) / grid.window_volume


def packet_inner(p: WavePacket, q: WavePacket) -> complex:
    """
    <phi_P, phi_Q> as the product over axes of the one dimensional inner products of the
    frequency factors.
    """
    if p.grid != q.grid:
        raise ValueError("Wave packets must live on the same grid")
    value = 1.0 + 0j
    for a, b, length in zip(p.factors, q.factors, p.grid.lengths):
        value *= np.vdot(b, a) / length
    return complex(value)


def psi_inner(p: WavePacket, q: WavePacket, N_index: t.Sequence[int], m) -> complex:
    """<psi^N_P, psi^N_Q>, summed over the intersection of the two support boxes."""
    if p.grid != q.grid:
        raise ValueError("Wave packets must live on the same grid")
    picks_p, picks_q = [], []
    for sp, sq in zip(p.support, q.support):
        _, in_p, in_q = np.intersect1d(sp, sq, assume_unique=True, return_indices=True)
        if len(in_p) == 0:
            return 0j
        picks_p.append(in_p)
        picks_q.append(in_q)
    values_p, _ = psi_local_samples(p, N_index, m)
    values_q, _ = psi_local_samples(q, N_index, m)
    overlap = np.vdot(values_q[np.ix_(*picks_q)], values_p[np.ix_(*picks_p)])
    return complex(overlap * p.grid.frequency_cell_volume)
