import functools
import logging
import typing as t

import numpy as np

from tilekit.analysis.scenario import Scenario
from tilekit.fourier.grid import GridFunction, GridSpec, Representation
from tilekit.fourier.packets import psi_local_samples, synthesize_at
from tilekit.geometry.cubes import AnisoCube
from tilekit.geometry.rects import Rect
from tilekit.geometry.tiles import Tile
from tilekit.utilities.parallel import ordered_map

_logger = logging.getLogger(__name__)

LatticePoint = t.Tuple[int, ...]


def lattice_point(grid: GridSpec, value: t.Sequence[int]) -> LatticePoint:
    point = tuple(int(v) for v in value)
    if len(point) != grid.n:
        raise ValueError(f"Parameter N must have {grid.n} components")
    return point


def semitile_shifts(tile: Tile, grid: GridSpec) -> t.Tuple[int, ...]:
    """Per axis, log2 of the number of lattice points along a side of omega_P."""
    return tuple((grid.K - tile.k) * a for a in grid.alpha)


def semitile_center_index(tile: Tile, r: t.Sequence[int], grid: GridSpec) -> np.ndarray:
    """The frequency lattice index of the center of omega_{P(r)}."""
    out = []
    for nu, ri, shift in zip(tile.freq_index, r, semitile_shifts(tile, grid)):
        out.append((2 * nu + ri) * 2 ** (shift - 1) + 2 ** (shift - 2))
    return np.array(out, dtype=np.int64)


def in_semitile(
    N: np.ndarray, tile: Tile, r: t.Sequence[int], grid: GridSpec
) -> np.ndarray:
    """
    Half-open membership of the lattice points N (first axis indexes the components) in
    omega_{P(r)}, decided on the integers.
    """
    N = np.asarray(N, dtype=np.int64)
    inside = np.ones(N.shape[1:], dtype=bool)
    for i, (nu, ri, shift) in enumerate(zip(tile.freq_index, r, semitile_shifts(tile, grid))):
        inside &= np.right_shift(N[i], shift - 1) == 2 * nu + ri
    return inside


def frequency_cube_mask(N: np.ndarray, cube: AnisoCube, grid: GridSpec) -> np.ndarray:
    """Membership of the lattice points N in the frequency cube, decided on the integers."""
    N = np.asarray(N, dtype=np.int64)
    inside = np.ones(N.shape[1:], dtype=bool)
    for i, (nu, a) in enumerate(zip(cube.index, grid.alpha)):
        exponent = (cube.k + grid.K) * a
        if exponent >= 0:
            inside &= np.right_shift(N[i], exponent) == nu
        else:
            inside &= np.left_shift(N[i], -exponent) == nu
    return inside


def active_tiles(s: Scenario, N_const: t.Sequence[int]) -> t.List[int]:
    """Positions of the tiles whose semitile contains N_const."""
    point = np.asarray(lattice_point(s.grid, N_const), dtype=np.int64)
    return [
        i for i, tile in enumerate(s.tiles) if bool(in_semitile(point, tile, s.r, s.grid))
    ]


def _model_sum_hat(s: Scenario, N_const: LatticePoint) -> t.Optional[np.ndarray]:
    positions = active_tiles(s, N_const)
    if not positions:
        return None
    out = np.zeros(s.grid.shape, dtype=complex)
    for i in positions:
        coefficient = s.coefficients[i]
        if coefficient == 0:
            continue
        packet = s.packets[i]
        values, _ = psi_local_samples(packet, N_const, s.multiplier)
        out[packet.support_index] += coefficient * values
    return out


def model_sum(s: Scenario, N_const: t.Sequence[int]) -> GridFunction:
    """
    A_N f = sum over the tiles with N in omega_{P(r)} of <f, phi_P> psi^N_P, returned in
    the physical representation.
    """
    N_const = lattice_point(s.grid, N_const)
    out = _model_sum_hat(s, N_const)
    if out is None:
        return GridFunction.zeros(s.grid)
    return GridFunction(s.grid, out, Representation.FREQUENCY).to_physical()


def distinct_points(N: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    The distinct lattice points of a map N of shape (n, ...) as columns, and for every
    sample the column it takes.
    """
    flat = N.reshape(N.shape[0], -1)
    values, inverse = np.unique(flat, axis=1, return_inverse=True)
    return values, inverse.reshape(-1)


def linearized_apply(s: Scenario) -> GridFunction:
    """
    Tf(x) = A_{N(x)} f(x). Samples are grouped by their value of N, so every distinct
    value costs one inverse transform.
    """
    values, inverse = distinct_points(s.N)
    out = np.zeros(s.grid.size, dtype=complex)
    for column in range(values.shape[1]):
        point = tuple(int(v) for v in values[:, column])
        hat = _model_sum_hat(s, point)
        if hat is None:
            continue
        physical = np.fft.ifftn(hat).reshape(-1) / s.grid.cell_volume
        group = inverse == column
        out[group] = physical[group]
    _logger.debug(f"Applied the linearized operator over {values.shape[1]} values of N")
    return GridFunction(s.grid, out.reshape(s.grid.shape))


def default_candidates(s: Scenario, coarse: int = 8) -> t.List[LatticePoint]:
    """
    The centers of all semitiles omega_{P(r)} together with a uniform coarsening of the
    frequency lattice with at most ``coarse`` points per axis.
    """
    points = {tuple(int(v) for v in semitile_center_index(p, s.r, s.grid)) for p in s.tiles}
    axes = [
        range(-(size // 2), size // 2, max(1, size // coarse)) for size in s.grid.shape
    ]
    grids = np.meshgrid(*axes, indexing="ij")
    points.update(zip(*[g.reshape(-1).tolist() for g in grids]))
    return sorted(points)


def _absolute_model_sum(s: Scenario, N_const: LatticePoint) -> t.Optional[np.ndarray]:
    hat = _model_sum_hat(s, N_const)
    if hat is None:
        return None
    return np.abs(np.fft.ifftn(hat) / s.grid.cell_volume)


def carleson_sup(
    s: Scenario,
    candidates: t.Optional[t.Sequence[t.Sequence[int]]] = None,
    jobs: t.Optional[int] = 1,
) -> GridFunction:
    """
    max over the candidate points N of |A_N f|, pointwise. The default candidates are
    those of default_candidates.
    """
    if candidates is None:
        candidates = default_candidates(s)
    candidates = [lattice_point(s.grid, c) for c in candidates]
    if not candidates:
        raise ValueError("Parameter candidates must not be empty")
    out = np.zeros(s.grid.shape)
    for values in ordered_map(functools.partial(_absolute_model_sum, s), candidates, jobs):
        if values is not None:
            np.maximum(out, values, out=out)
    return GridFunction(s.grid, out)


def restricted_set(s: Scenario, omega: t.Union[AnisoCube, Rect]) -> np.ndarray:
    """E intersected with N^{-1}(omega), half-open in omega."""
    if isinstance(omega, AnisoCube):
        inside = frequency_cube_mask(s.N, omega, s.grid)
    elif isinstance(omega, Rect):
        xi = np.moveaxis(s.N, 0, -1) / s.grid.lengths
        inside = omega.contains_points(xi)
    else:
        raise ValueError(f"Parameter omega must be an AnisoCube or a Rect, got {omega!r}")
    return s.E & inside


def semitile_set(s: Scenario, tile: Tile) -> np.ndarray:
    """E_{P(r)} = E intersected with N^{-1}(omega_{P(r)})."""
    return s.E & in_semitile(s.N, tile, s.r, s.grid)


def tile_pairing(s: Scenario, tile: Tile) -> complex:
    """
    <1_{E_{P(r)}}, psi^{N(.)}_P>, the integral of conj(psi^{N(x)}_P(x)) over E_{P(r)}.
    The samples are grouped by their value of N and psi is synthesized only at them.
    """
    mask = semitile_set(s, tile)
    points = np.nonzero(mask)
    if len(points[0]) == 0:
        return 0j
    packet = s.packet(tile)
    values, inverse = distinct_points(s.N[(slice(None),) + points])
    total = 0j
    for column in range(values.shape[1]):
        group = inverse == column
        local, _ = psi_local_samples(packet, values[:, column], s.multiplier)
        psi = synthesize_at(local, packet.support, s.grid, [p[group] for p in points])
        total += np.sum(np.conj(psi))
    return complex(total * s.grid.cell_volume)


def tile_pairings(
    s: Scenario, tiles: t.Optional[t.Sequence[Tile]] = None
) -> np.ndarray:
    tiles = s.tiles if tiles is None else tiles
    return np.array([tile_pairing(s, tile) for tile in tiles], dtype=complex)


def dual_pairing(s: Scenario, tiles: t.Optional[t.Sequence[Tile]] = None) -> float:
    """
    sum over the tiles of |<f, phi_P>| |<1_{E_{P(r)}}, psi^{N(.)}_P>|, over all scenario
    tiles unless a subset is given.
    """
    tiles = s.tiles if tiles is None else list(tiles)
    total = 0.0
    for tile in tiles:
        coefficient = s.coefficient(tile)
        if coefficient == 0:
            continue
        total += abs(coefficient) * abs(tile_pairing(s, tile))
    return float(total)


def weak_l2_norm(g: GridFunction) -> float:
    """
    sup over levels l of l |{|g| >= l}|^{1/2}; the sup is attained at a sample value, so
    it is read off the samples sorted in decreasing order.
    """
    values = np.sort(np.abs(g.to_physical().samples).reshape(-1))[::-1]
    counts = np.arange(1, len(values) + 1)
    return float(np.max(values * np.sqrt(counts * g.grid.cell_volume)))
