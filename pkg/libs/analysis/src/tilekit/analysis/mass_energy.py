import logging
import math
import typing as t

import attr
import numpy as np

from tilekit.analysis.scenario import Scenario
from tilekit.fourier.weights import periodic_rho
from tilekit.geometry.anisotropy import aniso_norm
from tilekit.geometry.cubes import ancestor, cube_center
from tilekit.geometry.tiles import Tile, interval_volume, two_tree_matrix
from tilekit.geometry.trees import Tree

_logger = logging.getLogger(__name__)


@attr.s(frozen=True)
class MassResult:
    """
    value is the truncated sup over P' >= P of the integral of w_{P'} over E_{P'},
    attained at witness. For a collection, tile is the member attaining the max.
    last_increment is how much the scale k_cap added over the smaller scales.
    """

    value = attr.ib()
    witness = attr.ib()
    k_cap = attr.ib()
    last_increment = attr.ib(default=0.0)
    tile = attr.ib(default=None)


@attr.s(frozen=True)
class EnergyResult:
    value = attr.ib()
    witness_top = attr.ib(default=None)
    witness_tree = attr.ib(default=None)


class MassEvaluator:
    """
    Masses of single tiles for one scenario, cached by (tile, k_cap). The mass of a tile
    does not depend on the collection it sits in, so every collection mass of a
    decomposition is a max over this cache.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._cache: t.Dict[t.Tuple[Tile, int], MassResult] = {}
        self._cap: t.Optional[float] = None

    def resolve_cap(self, tile: t.Optional[Tile], k_cap: t.Optional[int]) -> int:
        s = self.scenario
        k_cap = s.k_cap if k_cap is None else int(k_cap)
        if k_cap > s.grid.K:
            raise ValueError("Parameter k_cap must not exceed the window scale K")
        if tile is not None and k_cap < tile.k:
            raise ValueError(f"Parameter k_cap must be at least the tile scale {tile.k}")
        return k_cap

    def _points_in_frequency(self, tile: Tile) -> t.Tuple[np.ndarray, ...]:
        s = self.scenario
        inside = s.E.copy()
        for i, (nu, a) in enumerate(zip(tile.freq_index, s.alpha)):
            inside &= np.right_shift(s.N[i], (s.grid.K - tile.k) * a) == nu
        return np.nonzero(inside)

    def _weights_at(self, points, k: int, center: np.ndarray) -> np.ndarray:
        s = self.scenario
        gaps = []
        for i, positions in enumerate(points):
            length = s.grid.lengths[i]
            gap = np.mod(positions * s.grid.spacings[i] - center[i], length)
            gaps.append(np.minimum(gap, length - gap))
        rho = aniso_norm(np.stack(gaps, axis=-1), s.alpha)
        return math.ldexp(1.0, -k * s.alpha.total) * (1.0 + np.ldexp(rho, -k)) ** (
            -s.nu1
        )

    def _compute(self, tile: Tile, k_cap: int) -> MassResult:
        s = self.scenario
        alpha = s.alpha
        points = self._points_in_frequency(tile)
        N = s.N[(slice(None),) + points]
        best_value, best_witness = 0.0, tile
        below = at_cap = 0.0
        for k in range(tile.k, k_cap + 1):
            interval = ancestor(tile.interval, k, alpha)
            dims = tuple(2 ** ((k - tile.k) * a) for a in alpha)
            if len(points[0]) == 0:
                continue
            weights = self._weights_at(points, k, cube_center(interval, alpha))
            local = [
                np.right_shift(N[i], (s.grid.K - k) * a) - (nu << ((k - tile.k) * a))
                for i, (nu, a) in enumerate(zip(tile.freq_index, alpha))
            ]
            flat = np.ravel_multi_index(local, dims)
            sums = np.bincount(flat, weights=weights, minlength=int(np.prod(dims)))
            sums *= s.grid.cell_volume
            position = int(np.argmax(sums))
            value = float(sums[position])
            if k < k_cap:
                below = max(below, value)
            else:
                at_cap = value
            if value > best_value:
                offsets = np.unravel_index(position, dims)
                freq = tuple(
                    (nu << ((k - tile.k) * a)) + int(o)
                    for nu, a, o in zip(tile.freq_index, alpha, offsets)
                )
                best_value, best_witness = value, Tile(k, interval.index, freq)
        increment = max(0.0, at_cap - below) if k_cap > tile.k else 0.0
        _logger.debug(f"Mass of {tile} up to scale {k_cap} is {best_value} at {best_witness}")
        return MassResult(best_value, best_witness, k_cap, increment, tile)

    def mass(self, tile: Tile, k_cap: t.Optional[int] = None) -> MassResult:
        k_cap = self.resolve_cap(tile, k_cap)
        key = (tile, k_cap)
        if key not in self._cache:
            self._cache[key] = self._compute(tile, k_cap)
        return self._cache[key]

    def collection(
        self, tiles: t.Iterable[Tile], k_cap: t.Optional[int] = None
    ) -> MassResult:
        best = None
        for tile in sorted(tiles):
            result = self.mass(tile, k_cap)
            if best is None or result.value > best.value:
                best = result
        if best is None:
            return MassResult(0.0, None, self.resolve_cap(None, k_cap))
        return best

    def cap(self) -> float:
        """
        The largest window integral of w_{P'} over the scales a witness can take, which
        bounds every mass.
        """
        if self._cap is None:
            s = self.scenario
            low = s.k_min if s.tiles else s.k_cap
            rho = periodic_rho(s.grid, np.zeros(s.grid.n))
            values = []
            for k in range(low, s.k_cap + 1):
                w = math.ldexp(1.0, -k * s.alpha.total) * (1.0 + np.ldexp(rho, -k)) ** (
                    -s.nu1
                )
                values.append(float(np.sum(w) * s.grid.cell_volume))
            self._cap = max(values)
        return self._cap


def mass_single(
    P: Tile,
    s: Scenario,
    k_cap: t.Optional[int] = None,
    evaluator: t.Optional[MassEvaluator] = None,
) -> MassResult:
    """
    M(P): the largest integral of w_{P'} over E_{P'} over the tiles P' >= P of scale
    k_P up to k_cap. At each scale I_{P'} is the ancestor of I_P and omega_{P'} ranges
    over the frequency cubes of that scale inside omega_P; ties go to the smaller tile.
    """
    evaluator = evaluator or MassEvaluator(s)
    return evaluator.mass(P, k_cap)


def mass_collection(
    tiles: t.Iterable[Tile],
    s: Scenario,
    k_cap: t.Optional[int] = None,
    evaluator: t.Optional[MassEvaluator] = None,
) -> MassResult:
    evaluator = evaluator or MassEvaluator(s)
    return evaluator.collection(tiles, k_cap)


def mass_cap(s: Scenario) -> float:
    return MassEvaluator(s).cap()


@attr.s(frozen=True)
class TwoTreeTable:
    """
    For sorted tiles: leq[i, j] = P_i <= P_j, in_two[i, j] = P_i is in the maximal
    2-tree with top P_j, and squares[i] = |<f, phi_{P_i}>|^2.
    """

    tiles = attr.ib(converter=tuple)
    leq = attr.ib(eq=False)
    in_two = attr.ib(eq=False)
    squares = attr.ib(eq=False)
    volumes = attr.ib(eq=False)

    @classmethod
    def build(cls, tiles: t.Iterable[Tile], s: Scenario) -> "TwoTreeTable":
        tiles = sorted(tiles)
        leq, in_two = two_tree_matrix(tiles, s.r, s.alpha)
        squares = np.array([abs(s.coefficient(p)) ** 2 for p in tiles], dtype=float)
        volumes = np.array([interval_volume(p, s.alpha) for p in tiles], dtype=float)
        return cls(tiles, leq, in_two, squares, volumes)

    def deltas(self, active: t.Optional[np.ndarray] = None) -> np.ndarray:
        """Delta(T_Q) for every top Q, counting only active members."""
        squares = self.squares if active is None else self.squares * active
        if len(self.tiles) == 0:
            return np.zeros(0)
        return np.sqrt((squares @ self.in_two) / self.volumes)

    def members(self, j: int, active: t.Optional[np.ndarray] = None) -> t.List[Tile]:
        column = self.in_two[:, j] if active is None else self.in_two[:, j] & active
        return [self.tiles[i] for i in np.flatnonzero(column)]


def energy(tiles: t.Iterable[Tile], s: Scenario) -> EnergyResult:
    """
    E(tiles): the largest Delta(T_Q) = (|I_Q|^{-1} sum_{P in T_Q} |<f, phi_P>|^2)^{1/2}
    over the maximal 2-trees T_Q with tops in the collection.
    """
    table = TwoTreeTable.build(tiles, s)
    if not table.tiles:
        return EnergyResult(0.0)
    deltas = table.deltas()
    j = int(np.argmax(deltas))
    top = table.tiles[j]
    return EnergyResult(float(deltas[j]), top, Tree(top, table.members(j), s.alpha))


def singleton_bound_violations(
    tiles: t.Iterable[Tile], s: Scenario, tolerance: float = 1e-12
) -> t.List[Tile]:
    """
    The tiles with |<f, phi_P>| > E(tiles) |I_P|^{1/2}, which must not exist.
    """
    tiles = list(tiles)
    value = energy(tiles, s).value
    return [
        p
        for p in tiles
        if abs(s.coefficient(p))
        > value * math.sqrt(interval_volume(p, s.alpha)) * (1 + tolerance) + tolerance
    ]
