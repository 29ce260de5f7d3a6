"""
The tree decomposition: the mass split with its covering certificate, the energy split,
the main loop over levels l and the checks of the tree estimate and the global sum.
"""
import enum
import functools
import logging
import math
import typing as t

import attr
import networkx as nx
import numpy as np
from frozendict import frozendict

from tilekit.analysis.mass_energy import MassEvaluator, TwoTreeTable, energy
from tilekit.analysis.operators import dual_pairing
from tilekit.analysis.scenario import Scenario
from tilekit.fourier.norms import multiplier_norm
from tilekit.fourier.weights import periodic_rho
from tilekit.geometry.cubes import cube_center, cube_realize, cubes_intersect, scaled_cube
from tilekit.geometry.tiles import (
    Tile,
    frequency_center,
    interval_volume,
    leq_matrix,
    semitile,
    tile_leq,
)
from tilekit.geometry.trees import Tree

_logger = logging.getLogger(__name__)


class DecompositionError(RuntimeError):
    """
    The main loop went below the level at which every nonzero mass and energy of the
    scenario must have been removed.
    """

    def __init__(self, message: str, diagnostics: t.Mapping[str, t.Any]):
        super().__init__(message)
        self.diagnostics = frozendict(diagnostics)


class TreeKind(enum.Enum):
    MASS = "mass"
    ENERGY = "energy"
    NULL = "null"


class TileOrderGraph:
    """
    The strict tile order on a finite set as a directed graph with an edge p -> q for
    every p < q. The maximal elements are its sinks.
    """

    def __init__(self, tiles: t.Iterable[Tile], alpha):
        self.tiles = sorted(set(tiles))
        self.alpha = alpha
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(self.tiles)
        leq = leq_matrix(self.tiles, self.tiles, alpha)
        np.fill_diagonal(leq, False)
        rows, cols = np.nonzero(leq)
        self.graph.add_edges_from(
            (self.tiles[i], self.tiles[j]) for i, j in zip(rows.tolist(), cols.tolist())
        )

    def __len__(self):
        return len(self.tiles)

    @functools.cached_property
    def maximal(self) -> t.List[Tile]:
        return sorted(node for node in self.graph.nodes if self.graph.out_degree(node) == 0)


def maximal_elements(tiles: t.Iterable[Tile], alpha) -> t.List[Tile]:
    return TileOrderGraph(tiles, alpha).maximal


def _group_under_tops(
    tiles: t.Iterable[Tile], tops: t.Sequence[Tile], alpha
) -> t.List[Tree]:
    """
    One tree per top; every tile goes to the first top in tile order that dominates it.
    """
    members: t.Dict[Tile, t.List[Tile]] = {top: [] for top in tops}
    for tile in sorted(tiles):
        top = next((q for q in tops if tile_leq(tile, q, alpha)), None)
        if top is None:
            raise ValueError(f"Tile {tile} is not dominated by any top")
        members[top].append(tile)
    return [Tree(top, members[top], alpha) for top in tops if members[top]]


@attr.s(frozen=True)
class VitaliCertificate:
    """
    For every tree top the annulus index j at which its restricted set carries the most
    weight, and per j the greedily selected tops with pairwise disjoint enlarged boxes.
    counting holds sum |I| over the tops of a group against 2^{(j+2)|alpha|} times the
    sum over the selected ones.
    """

    annuli = attr.ib(converter=frozendict)
    selected = attr.ib(converter=frozendict)
    unassociated = attr.ib(converter=tuple)
    counting = attr.ib(converter=frozendict)

    @property
    def holds(self) -> bool:
        return not self.unassociated and all(
            total <= bound for total, bound in self.counting.values()
        )


def annulus_index(top: Tile, s: Scenario) -> int:
    """
    The j maximizing 2^j times the integral of w_top over E_top intersected with the j-th
    dyadic annulus around I_top, where the 0-th annulus is {2^{-k} rho <= 1}. Empty
    restricted sets give 0.
    """
    alpha = s.alpha
    inside = s.E.copy()
    for i, (nu, a) in enumerate(zip(top.freq_index, alpha)):
        inside &= np.right_shift(s.N[i], (s.grid.K - top.k) * a) == nu
    if not np.any(inside):
        return 0
    scaled = np.ldexp(periodic_rho(s.grid, cube_center(top.interval, alpha)), -top.k)[inside]
    weights = math.ldexp(1.0, -top.k * alpha.total) * (1.0 + scaled) ** (-s.nu1)
    rings = np.where(scaled <= 1.0, 0, np.ceil(np.log2(np.maximum(scaled, 1.0))))
    rings = rings.astype(np.int64)
    sums = np.bincount(rings, weights=weights) * s.grid.cell_volume
    return int(np.argmax(sums * np.exp2(np.arange(len(sums)))))


def _boxes_meet(p: Tile, q: Tile, j: int, alpha) -> bool:
    return scaled_cube(p.interval, j, alpha).intersects(
        scaled_cube(q.interval, j, alpha)
    ) and cube_realize(p.frequency, alpha).intersects(cube_realize(q.frequency, alpha))


def vitali_certificate(tops: t.Sequence[Tile], s: Scenario) -> VitaliCertificate:
    alpha = s.alpha
    annuli = {top: annulus_index(top, s) for top in tops}
    selected, unassociated, counting = {}, [], {}
    for j in sorted(set(annuli.values())):
        group = sorted(
            (top for top in tops if annuli[top] == j),
            key=lambda p: (-p.k, p),
        )
        chosen = []
        for top in group:
            if not any(_boxes_meet(top, q, j, alpha) for q in chosen):
                chosen.append(top)
        for top in group:
            if top in chosen:
                continue
            partner = any(
                _boxes_meet(top, q, j, alpha) and q.k >= top.k for q in chosen
            )
            if not partner:
                unassociated.append(top)
        total = sum(interval_volume(p, alpha) for p in group)
        bound = math.ldexp(1.0, (j + 2) * alpha.total) * sum(
            interval_volume(p, alpha) for p in chosen
        )
        selected[j] = tuple(chosen)
        counting[j] = (total, bound)
    return VitaliCertificate(annuli, selected, unassociated, counting)


@attr.s(frozen=True)
class MassSplit:
    mu = attr.ib()
    light = attr.ib(converter=tuple)
    heavy = attr.ib(converter=tuple)
    trees = attr.ib(converter=tuple)
    certificate = attr.ib(default=None)

    @property
    def volume(self) -> float:
        """sum of |I_T| over the trees"""
        return float(sum(tree.interval_volume for tree in self.trees))

    @property
    def product(self) -> float:
        return self.mu * self.volume


def mass_split(
    tiles: t.Iterable[Tile],
    s: Scenario,
    evaluator: t.Optional[MassEvaluator] = None,
) -> MassSplit:
    """
    Splits off the heavy tiles, those with M(P) > M(tiles) / 4, and arranges them in
    trees whose tops are the maximal elements among their mass witnesses.
    """
    evaluator = evaluator or MassEvaluator(s)
    tiles = sorted(set(tiles))
    results = {p: evaluator.mass(p) for p in tiles}
    mu = max((r.value for r in results.values()), default=0.0)
    if mu == 0:
        return MassSplit(0.0, tiles, (), ())
    heavy = [p for p in tiles if results[p].value > mu / 4]
    light = [p for p in tiles if results[p].value <= mu / 4]
    tops = maximal_elements({results[p].witness for p in heavy}, s.alpha)
    trees = _group_under_tops(heavy, tops, s.alpha)
    certificate = vitali_certificate([tree.top for tree in trees], s)
    _logger.debug(
        f"Mass split of {len(tiles)} tiles at mass {mu}: {len(heavy)} heavy in {len(trees)} trees"
    )
    return MassSplit(mu, light, heavy, trees, certificate)


@attr.s(frozen=True)
class EnergySplit:
    """
    keys are the projections of the frequency centers of the selected tops on the first
    axis with r_i = 1, in selection order.
    """

    epsilon = attr.ib()
    low = attr.ib(converter=tuple)
    high = attr.ib(converter=tuple)
    trees = attr.ib(converter=tuple)
    two_trees = attr.ib(converter=tuple)
    keys = attr.ib(converter=tuple, default=())

    @property
    def volume(self) -> float:
        return float(sum(tree.interval_volume for tree in self.trees))

    @property
    def product(self) -> float:
        return self.epsilon ** 2 * self.volume


def energy_split(tiles: t.Iterable[Tile], s: Scenario) -> EnergySplit:
    """
    Repeatedly picks, among the maximal 2-trees of the stock with Delta >= E(tiles) / 2,
    the one whose top has the least frequency center along the first axis with r_i = 1,
    and removes the whole tree below that top from the stock.
    """
    table = TwoTreeTable.build(set(tiles), s)
    count = len(table.tiles)
    deltas = table.deltas()
    epsilon = float(np.max(deltas)) if count else 0.0
    if epsilon == 0:
        return EnergySplit(0.0, table.tiles, (), (), ())
    axis = s.r.index(1)
    keys = [float(frequency_center(p, s.alpha)[axis]) for p in table.tiles]
    active = np.ones(count, dtype=bool)
    trees, two_trees, chosen_keys = [], [], []
    while True:
        deltas = table.deltas(active)
        candidates = np.flatnonzero(active & (deltas >= epsilon / 2))
        if len(candidates) == 0:
            break
        j = min(candidates.tolist(), key=lambda i: (keys[i], i))
        top = table.tiles[j]
        two_trees.append(Tree(top, table.members(j, active), s.alpha))
        below = active & table.leq[:, j]
        trees.append(Tree(top, [table.tiles[i] for i in np.flatnonzero(below)], s.alpha))
        chosen_keys.append(keys[j])
        active &= ~below
    low = [table.tiles[i] for i in np.flatnonzero(active)]
    high = [table.tiles[i] for i in np.flatnonzero(~active)]
    _logger.debug(
        f"Energy split of {count} tiles at energy {epsilon}: {len(trees)} trees removed"
    )
    return EnergySplit(epsilon, low, high, trees, two_trees, chosen_keys)


def two_tree_disjointness_violations(
    split: EnergySplit, s: Scenario
) -> t.List[t.Tuple[Tile, Tile, Tile, Tile]]:
    """
    (top, other top, P, P') for selected 2-trees T and T' with P in T, P' in T' and
    omega_P inside omega_{P'(0)} but I_{P'} meeting I_T. The list must be empty.
    """
    alpha = s.alpha
    zero = (0,) * alpha.n
    violations = []
    for first in split.two_trees:
        for second in split.two_trees:
            if first is second:
                continue
            for p in first.sorted_tiles():
                omega = cube_realize(p.frequency, alpha)
                for q in second.sorted_tiles():
                    if semitile(q, zero, alpha).contains(omega) and cubes_intersect(
                        q.interval, first.top.interval, alpha
                    ):
                        violations.append((first.top, second.top, p, q))
    return violations


@attr.s(frozen=True)
class TypedTree:
    tree = attr.ib(validator=attr.validators.instance_of(Tree))
    kind = attr.ib(validator=attr.validators.instance_of(TreeKind))


@attr.s(frozen=True)
class Bucket:
    """
    The trees moved at level l, with the stock mass and energy they were split off at and
    the certificates of the splits.
    """

    ell = attr.ib()
    trees = attr.ib(converter=tuple)
    stock_mass = attr.ib(default=0.0)
    stock_energy = attr.ib(default=0.0)
    mass_product = attr.ib(default=0.0)
    energy_product = attr.ib(default=0.0)
    covering_holds = attr.ib(default=True)

    @property
    def tiles(self) -> t.FrozenSet[Tile]:
        return frozenset(p for typed in self.trees for p in typed.tree.tiles)

    def volume(self, kind: t.Optional[TreeKind] = None) -> float:
        return float(
            sum(
                typed.tree.interval_volume
                for typed in self.trees
                if kind is None or typed.kind is kind
            )
        )


@attr.s(frozen=True)
class DecompositionResult:
    buckets = attr.ib(converter=frozendict)
    residue = attr.ib(converter=tuple, default=())
    initial_ell = attr.ib(default=None)
    floor = attr.ib(default=None)

    def trees(self) -> t.Iterator[t.Tuple[int, TypedTree]]:
        for ell in sorted(self.buckets, reverse=True):
            for typed in self.buckets[ell].trees:
                yield ell, typed


def _initial_level(mu: float, epsilon: float) -> int:
    candidates = []
    if mu > 0:
        candidates.append(math.log2(mu) / 2)
    if epsilon > 0:
        candidates.append(math.log2(epsilon))
    return math.ceil(max(candidates))


def _floor_level(tiles: t.Sequence[Tile], s: Scenario, evaluator: MassEvaluator) -> int:
    """
    A level below which no nonzero mass or energy can survive: every nonzero collection
    mass is at least the least nonzero single mass, every nonzero energy at least the
    least nonzero |<f, phi_P>| |I_P|^{-1/2}.
    """
    values = []
    masses = [evaluator.mass(p).value for p in tiles]
    if any(m > 0 for m in masses):
        values.append(math.log2(min(m for m in masses if m > 0)) / 2)
    singles = [
        abs(s.coefficient(p)) / math.sqrt(interval_volume(p, s.alpha)) for p in tiles
    ]
    if any(e > 0 for e in singles):
        values.append(math.log2(min(e for e in singles if e > 0)))
    return math.floor(min(values)) - 2 if values else 0


def main_decompose(s: Scenario) -> DecompositionResult:
    """
    Starting from a level l with M <= 2^{2l} and E <= 2^l, moves at each level the heavy
    trees of a mass split if M(stock) > 2^{2(l-1)} and then the trees of an energy split
    if E(stock) > 2^{l-1}. Tiles whose stock has neither mass nor energy left are grouped
    under their maximal elements into null trees at the level where that happens.
    """
    tiles = sorted(s.tiles)
    if not tiles:
        return DecompositionResult({})
    evaluator = MassEvaluator(s)
    stock = list(tiles)
    mu = evaluator.collection(stock).value
    epsilon = energy(stock, s).value
    floor = _floor_level(tiles, s, evaluator)
    if mu == 0 and epsilon == 0:
        ell = 0
    else:
        ell = _initial_level(mu, epsilon)
    initial = ell
    buckets = {}
    while stock:
        if ell < floor:
            raise DecompositionError(
                f"Decomposition passed its floor level {floor} with {len(stock)} tiles left",
                {"floor": floor, "ell": ell, "mass": mu, "energy": epsilon, "stock": len(stock)},
            )
        mu = evaluator.collection(stock).value
        epsilon = energy(stock, s).value
        if mu == 0 and epsilon == 0:
            tops = maximal_elements(stock, s.alpha)
            trees = [
                TypedTree(tree, TreeKind.NULL)
                for tree in _group_under_tops(stock, tops, s.alpha)
            ]
            buckets[ell] = Bucket(ell, trees)
            stock = []
            break
        moved, mass_product, energy_product, covering = [], 0.0, 0.0, True
        stock_mass, stock_energy = mu, epsilon
        if mu > math.ldexp(1.0, 2 * (ell - 1)):
            split = mass_split(stock, s, evaluator)
            moved.extend(TypedTree(tree, TreeKind.MASS) for tree in split.trees)
            mass_product = split.product
            covering = split.certificate is None or split.certificate.holds
            stock = list(split.light)
        if stock and energy(stock, s).value > math.ldexp(1.0, ell - 1):
            split = energy_split(stock, s)
            moved.extend(TypedTree(tree, TreeKind.ENERGY) for tree in split.trees)
            energy_product = split.product
            stock = list(split.low)
        if moved:
            buckets[ell] = Bucket(
                ell,
                moved,
                stock_mass,
                stock_energy,
                mass_product,
                energy_product,
                covering,
            )
            _logger.debug(f"Level {ell}: moved {len(moved)} trees, {len(stock)} tiles left")
        ell -= 1
    _logger.info(f"Decomposed {len(tiles)} tiles into {len(buckets)} levels")
    return DecompositionResult(buckets, stock, initial, floor)


def verify_decomposition(
    result: DecompositionResult, s: Scenario, tolerance: float = 1e-12
) -> t.List[str]:
    """
    Re-checks a decomposition from scratch: the buckets partition the scenario tiles,
    each bucket is the disjoint union of its trees and M(P_l) <= 2^{2l}, E(P_l) <= 2^l.
    Returns the violations found.
    """
    problems = []
    evaluator = MassEvaluator(s)
    seen: t.Set[Tile] = set()
    for ell, bucket in sorted(result.buckets.items()):
        count = sum(len(typed.tree) for typed in bucket.trees)
        tiles = bucket.tiles
        if count != len(tiles):
            problems.append(f"Trees of level {ell} overlap")
        if seen & tiles:
            problems.append(f"Level {ell} shares tiles with another level")
        seen |= tiles
        mass = evaluator.collection(tiles).value
        if mass > math.ldexp(1.0, 2 * ell) * (1 + tolerance):
            problems.append(f"Level {ell} has mass {mass} above 2^(2l)")
        value = energy(tiles, s).value
        if value > math.ldexp(1.0, ell) * (1 + tolerance):
            problems.append(f"Level {ell} has energy {value} above 2^l")
    if result.residue:
        problems.append(f"{len(result.residue)} tiles were left in the residue")
    if seen != set(s.tiles):
        problems.append("The levels do not cover the scenario tiles")
    return problems


@attr.s(frozen=True)
class TreeEstimate:
    """
    lhs = sum over the tree of |<f, phi_P>| |<1_{E_{P(r)}}, psi_P>| against
    rhs = ||m|| |I_T| E(T) M(T). A 0/0 instance has ratio 0 and is flagged vacuous.
    """

    lhs = attr.ib()
    rhs = attr.ib()
    norm = attr.ib()
    volume = attr.ib()
    energy = attr.ib()
    mass = attr.ib()

    @property
    def vacuous(self) -> bool:
        return self.rhs == 0 and self.lhs == 0

    @property
    def ratio(self) -> float:
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs == 0 else math.inf


def default_nu0(alpha) -> int:
    return 3 * alpha.total + 2


def tree_estimate_check(
    T: Tree,
    s: Scenario,
    nu0: t.Optional[int] = None,
    evaluator: t.Optional[MassEvaluator] = None,
) -> TreeEstimate:
    evaluator = evaluator or MassEvaluator(s)
    nu0 = default_nu0(s.alpha) if nu0 is None else nu0
    tiles = T.sorted_tiles()
    lhs = dual_pairing(s, tiles)
    norm = multiplier_norm(s.multiplier, nu0)
    value = energy(tiles, s).value
    mass = evaluator.collection(tiles).value
    volume = T.interval_volume
    return TreeEstimate(lhs, norm * volume * value * mass, norm, volume, value, mass)


@attr.s(frozen=True)
class GlobalCheck:
    """
    total is the sum of the tree pairings over the decomposition of the normalized
    scenario; bound is ||m|| sum_l 2^l min(1, 2^{2l}) sum_{T in level l} |I_T|.
    """

    total = attr.ib()
    bound = attr.ib()
    norm = attr.ib()
    dilation = attr.ib(default=0)

    @property
    def ratio(self) -> float:
        if self.bound > 0:
            return self.total / self.bound
        return 0.0 if self.total == 0 else math.inf

    @property
    def normalized_total(self) -> float:
        """total / ||m||, the constant of the model sum bound at ||f|| = 1, |E| <= 1."""
        return self.total / self.norm if self.norm > 0 else 0.0


def global_sum_check(s: Scenario, nu0: t.Optional[int] = None) -> GlobalCheck:
    normalized, j = s.normalized()
    nu0 = default_nu0(s.alpha) if nu0 is None else nu0
    norm = multiplier_norm(normalized.multiplier, nu0)
    if not normalized.tiles:
        return GlobalCheck(0.0, 0.0, norm, j)
    result = main_decompose(normalized)
    total, bound = 0.0, 0.0
    for ell, bucket in result.buckets.items():
        for typed in bucket.trees:
            total += dual_pairing(normalized, typed.tree.sorted_tiles())
        bound += math.ldexp(1.0, ell) * min(1.0, math.ldexp(1.0, 2 * ell)) * bucket.volume()
    return GlobalCheck(total, norm * bound, norm, j)
