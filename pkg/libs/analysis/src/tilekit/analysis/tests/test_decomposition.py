import math

import numpy as np
import pytest

from tilekit.analysis import decomposition
from tilekit.analysis.decomposition import (
    DecompositionError,
    TileOrderGraph,
    TreeKind,
    energy_split,
    global_sum_check,
    main_decompose,
    mass_split,
    maximal_elements,
    tree_estimate_check,
    two_tree_disjointness_violations,
    verify_decomposition,
    vitali_certificate,
)
from tilekit.analysis.generators import GeneratorParams, generate_scenario
from tilekit.analysis.mass_energy import MassEvaluator, energy
from tilekit.analysis.operators import dual_pairing
from tilekit.fourier.grid import GridFunction
from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.tiles import Tile, tile_leq

A12 = AnisoExponent((1, 2))


def small_scenario(seed, **changes):
    params = dict(K=2, k0=-2, k_min=-1, k_max=0, tile_count=12, b0=0.4, b1=0.3, seed=seed)
    params.update(changes)
    return generate_scenario(GeneratorParams(**params))


@pytest.fixture(scope="module", params=[0, 1])
def scenario(request):
    return small_scenario(request.param)


class TestMaximalElements:
    def test_chain_and_stranger(self):
        top = Tile(1, (0, 0), (0, 0))
        low = Tile(0, (0, 0), (0, 0))
        stranger = Tile(0, (1, 3), (1, 1))
        assert tile_leq(low, top, A12)
        assert maximal_elements([low, top, stranger], A12) == [stranger, top]

    def test_graph(self):
        top = Tile(1, (0, 0), (0, 0))
        low = Tile(0, (0, 0), (0, 0))
        graph = TileOrderGraph([low, top, low], A12)
        assert len(graph) == 2
        assert list(graph.graph.edges) == [(low, top)]

    def test_empty(self):
        assert maximal_elements([], A12) == []


class TestMassSplit:
    def test_partition(self, scenario):
        evaluator = MassEvaluator(scenario)
        split = mass_split(scenario.tiles, scenario, evaluator)
        assert set(split.light) | set(split.heavy) == set(scenario.tiles)
        assert not set(split.light) & set(split.heavy)
        for p in split.heavy:
            assert evaluator.mass(p).value > split.mu / 4
        for p in split.light:
            assert evaluator.mass(p).value <= split.mu / 4
        assert evaluator.collection(split.light).value <= split.mu / 4

    def test_trees(self, scenario):
        split = mass_split(scenario.tiles, scenario)
        members = [p for tree in split.trees for p in tree.tiles]
        assert sorted(members) == sorted(split.heavy)
        tops = [tree.top for tree in split.trees]
        assert maximal_elements(tops, scenario.alpha) == sorted(tops)
        assert split.product == pytest.approx(split.mu * split.volume)

    def test_covering_certificate(self, scenario):
        split = mass_split(scenario.tiles, scenario)
        assert split.certificate.holds
        assert set(split.certificate.annuli) == {tree.top for tree in split.trees}

    def test_certificate_without_tops(self, scenario):
        assert vitali_certificate([], scenario).holds

    def test_no_mass(self, scenario):
        empty = scenario.evolve(E=np.zeros(scenario.grid.shape, dtype=bool))
        split = mass_split(empty.tiles, empty)
        assert split.mu == 0 and split.trees == () and len(split.light) == len(empty.tiles)


class TestEnergySplit:
    def test_partition_and_residual_energy(self, scenario):
        split = energy_split(scenario.tiles, scenario)
        assert split.epsilon == pytest.approx(energy(scenario.tiles, scenario).value)
        assert set(split.low) | set(split.high) == set(scenario.tiles)
        assert energy(split.low, scenario).value < split.epsilon / 2
        members = [p for tree in split.trees for p in tree.tiles]
        assert sorted(members) == sorted(split.high)

    def test_two_trees_inside_trees(self, scenario):
        split = energy_split(scenario.tiles, scenario)
        assert len(split.two_trees) == len(split.trees) == len(split.keys)
        for two, tree in zip(split.two_trees, split.trees):
            assert two.top == tree.top
            assert two.tiles <= tree.tiles
            value = math.sqrt(
                sum(abs(scenario.coefficient(p)) ** 2 for p in two.tiles) / two.interval_volume
            )
            assert value >= split.epsilon / 2 * (1 - 1e-12)

    def test_strong_disjointness(self, scenario):
        split = energy_split(scenario.tiles, scenario)
        assert two_tree_disjointness_violations(split, scenario) == []

    def test_zero_function(self, scenario):
        zero = scenario.evolve(f=GridFunction.zeros(scenario.grid))
        split = energy_split(zero.tiles, zero)
        assert split.epsilon == 0 and split.trees == ()


class TestMainDecompose:
    def test_verifies(self, scenario):
        result = main_decompose(scenario)
        assert verify_decomposition(result, scenario) == []
        assert result.residue == ()
        assert all(ell >= result.floor for ell in result.buckets)
        assert max(result.buckets) <= result.initial_ell

    def test_levels_bound_mass_and_energy(self, scenario):
        result = main_decompose(scenario)
        evaluator = MassEvaluator(scenario)
        for ell, bucket in result.buckets.items():
            assert evaluator.collection(bucket.tiles).value <= math.ldexp(1.0, 2 * ell) * (
                1 + 1e-12
            )
            assert energy(bucket.tiles, scenario).value <= math.ldexp(1.0, ell) * (1 + 1e-12)
            assert bucket.covering_holds

    def test_zero_function_gives_mass_and_null_trees(self, scenario):
        zero = scenario.evolve(f=GridFunction.zeros(scenario.grid))
        result = main_decompose(zero)
        kinds = {typed.kind for _, typed in result.trees()}
        assert TreeKind.ENERGY not in kinds
        assert verify_decomposition(result, zero) == []

    def test_nothing_to_measure(self, scenario):
        nothing = scenario.evolve(
            f=GridFunction.zeros(scenario.grid), E=np.zeros(scenario.grid.shape, dtype=bool)
        )
        result = main_decompose(nothing)
        assert list(result.buckets) == [0]
        assert {typed.kind for _, typed in result.trees()} == {TreeKind.NULL}
        assert result.buckets[0].tiles == frozenset(nothing.tiles)

    def test_no_tiles(self, scenario):
        assert main_decompose(scenario.with_tiles([])).buckets == {}

    def test_floor_is_enforced(self, scenario, monkeypatch):
        monkeypatch.setattr(decomposition, "_floor_level", lambda *args: 100)
        with pytest.raises(DecompositionError) as error:
            main_decompose(scenario)
        assert error.value.diagnostics["floor"] == 100

    def test_broken_partition_is_reported(self, scenario):
        result = main_decompose(scenario)
        partial = scenario.with_tiles(scenario.tiles[:-1])
        problems = verify_decomposition(result, partial)
        assert any("do not cover" in p for p in problems)


class TestEstimates:
    def test_tree_estimates(self, scenario):
        result = main_decompose(scenario)
        evaluator = MassEvaluator(scenario)
        for _, typed in result.trees():
            estimate = tree_estimate_check(typed.tree, scenario, evaluator=evaluator)
            assert estimate.lhs >= 0
            assert estimate.rhs >= 0
            assert math.isfinite(estimate.ratio) or estimate.rhs == 0

    def test_vacuous_tree(self, scenario):
        empty = scenario.evolve(E=np.zeros(scenario.grid.shape, dtype=bool))
        result = main_decompose(empty)
        for _, typed in result.trees():
            estimate = tree_estimate_check(typed.tree, empty)
            assert estimate.lhs == 0
            assert estimate.ratio == 0.0

    def test_global_sum(self, scenario):
        check = global_sum_check(scenario)
        normalized, j = scenario.normalized()
        assert check.dilation == j
        assert check.total == pytest.approx(dual_pairing(normalized))
        assert check.bound >= 0
        assert check.normalized_total == pytest.approx(check.total / check.norm)

    def test_global_sum_without_tiles(self, scenario):
        check = global_sum_check(scenario.with_tiles([]))
        assert (check.total, check.bound, check.ratio) == (0.0, 0.0, 0.0)
