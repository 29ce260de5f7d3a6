import itertools
import math

import numpy as np
import pytest

from tilekit.analysis.generators import GeneratorParams, generate_scenario
from tilekit.analysis.mass_energy import (
    MassEvaluator,
    TwoTreeTable,
    energy,
    mass_cap,
    mass_collection,
    mass_single,
    singleton_bound_violations,
)
from tilekit.analysis.operators import restricted_set
from tilekit.fourier.weights import riemann_integral, weight_w
from tilekit.geometry.cubes import ancestor, children
from tilekit.geometry.tiles import Tile, in_two_tree, interval_volume, tile_leq
from tilekit.utilities.testing import assert_call, assert_equal

PARAMS = GeneratorParams(
    K=2, k0=-2, k_min=-1, k_max=0, tile_count=10, b0=0.4, b1=0.3, seed=2, e_density=0.7
)


@pytest.fixture(scope="module")
def scenario():
    return generate_scenario(PARAMS)


def brute_mass(s, tile, k_cap):
    """max over every P' >= P up to k_cap of the Riemann sum of w_{P'} over E_{P'}."""
    best = 0.0
    cubes = [tile.frequency]
    for k in range(tile.k, k_cap + 1):
        interval = ancestor(tile.interval, k, s.alpha)
        for cube in cubes:
            above = Tile(k, interval.index, cube.index)
            assert tile_leq(tile, above, s.alpha)
            w = weight_w(above, s.nu1, s.grid)
            best = max(best, riemann_integral(w, restricted_set(s, cube)).real)
        cubes = [child for cube in cubes for child in children(cube, s.alpha)]
    return best


def brute_energy(s, tiles):
    best = 0.0
    for top in tiles:
        members = [p for p in tiles if in_two_tree(p, top, s.r, s.alpha)]
        total = sum(abs(s.coefficient(p)) ** 2 for p in members)
        best = max(best, math.sqrt(total / interval_volume(top, s.alpha)))
    return best


class TestMass:
    def test_matches_brute_force(self, scenario):
        evaluator = MassEvaluator(scenario)
        for tile in scenario.tiles:
            result = evaluator.mass(tile)
            assert result.value == pytest.approx(brute_mass(scenario, tile, scenario.k_cap))
            assert result.k_cap == scenario.k_cap
            assert tile_leq(tile, result.witness, scenario.alpha)

    def test_witness_attains_the_value(self, scenario):
        tile = scenario.tiles[0]
        result = mass_single(tile, scenario)
        witness = result.witness
        w = weight_w(witness, scenario.nu1, scenario.grid)
        value = riemann_integral(w, restricted_set(scenario, witness.frequency)).real
        if result.value > 0:
            assert value == pytest.approx(result.value)
        else:
            assert witness == tile

    def test_monotone_in_the_cap(self, scenario):
        evaluator = MassEvaluator(scenario)
        for tile in scenario.tiles:
            values = [evaluator.mass(tile, k).value for k in range(tile.k, scenario.k_cap + 1)]
            assert all(a <= b for a, b in zip(values, values[1:]))
            last = evaluator.mass(tile, scenario.k_cap)
            assert last.last_increment >= 0

    def test_bounded_by_the_cap(self, scenario):
        cap = mass_cap(scenario)
        for tile in scenario.tiles:
            assert mass_single(tile, scenario).value <= cap * (1 + 1e-12)

    def test_empty_set_has_no_mass(self, scenario):
        empty = scenario.evolve(E=np.zeros(scenario.grid.shape, dtype=bool))
        for tile in empty.tiles:
            result = mass_single(tile, empty)
            assert result.value == 0.0
            assert result.witness == tile

    def test_collection_is_the_largest_member(self, scenario):
        result = mass_collection(scenario.tiles, scenario)
        singles = [mass_single(p, scenario).value for p in scenario.tiles]
        assert result.value == max(singles)
        assert result.tile in scenario.tiles

    def test_empty_collection(self, scenario):
        result = mass_collection([], scenario)
        assert (result.value, result.witness) == (0.0, None)

    def test_caps_are_checked(self, scenario):
        tile = max(scenario.tiles)
        assert_call(mass_single, ValueError("window scale"), tile, scenario, scenario.grid.K + 1)
        assert_call(mass_single, ValueError("tile scale"), tile, scenario, tile.k - 1)

    def test_invariant_under_dilation(self, scenario):
        dilated = scenario.dilated(1)
        for tile, moved in zip(scenario.tiles, dilated.tiles):
            assert mass_single(moved, dilated).value == pytest.approx(
                mass_single(tile, scenario).value
            )


class TestEnergy:
    def test_matches_brute_force(self, scenario):
        assert energy(scenario.tiles, scenario).value == pytest.approx(
            brute_energy(scenario, scenario.tiles)
        )

    def test_witness_tree(self, scenario):
        result = energy(scenario.tiles, scenario)
        tree = result.witness_tree
        assert tree.top == result.witness_top
        total = sum(abs(scenario.coefficient(p)) ** 2 for p in tree.tiles)
        assert math.sqrt(total / tree.interval_volume) == pytest.approx(result.value)

    def test_monotone_under_subsets(self, scenario):
        full = energy(scenario.tiles, scenario).value
        for size in range(1, 4):
            for subset in itertools.islice(itertools.combinations(scenario.tiles, size), 20):
                assert energy(subset, scenario).value <= full * (1 + 1e-12)

    def test_empty(self, scenario):
        result = energy([], scenario)
        assert (result.value, result.witness_top) == (0.0, None)

    def test_single_tiles_are_bounded(self, scenario):
        assert singleton_bound_violations(scenario.tiles, scenario) == []

    def test_table_deltas_follow_the_mask(self, scenario):
        table = TwoTreeTable.build(scenario.tiles, scenario)
        active = np.ones(len(table.tiles), dtype=bool)
        assert_equal(table.deltas(active), table.deltas())
        active[:] = False
        assert_equal(table.deltas(active), np.zeros(len(table.tiles)))
        assert table.members(0, active) == []
