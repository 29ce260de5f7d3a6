import numpy as np
import pytest

from tilekit.fourier.grid import (
    GridFunction,
    GridSpec,
    OutOfWindowError,
    Representation,
    ResolutionError,
)
from tilekit.geometry.tiles import Tile
from tilekit.utilities.testing import assert_call, assert_equal

GRID = GridSpec((1, 2), 3, -1)


class TestGridSpec:
    def test_shape_and_lattice(self):
        assert GRID.shape == (16, 256)
        assert_equal(GRID.lengths, np.array([8.0, 64.0]))
        assert_equal(GRID.spacings, np.array([0.5, 0.25]))
        assert GRID.cell_volume == 0.125
        assert GRID.window_volume == 512.0

    @pytest.mark.parametrize(
        "alpha, K, k0, expect",
        [
            ((1, 2), 3, 1, ValueError("non-positive")),
            ((1, 2), 0, 0, ValueError("smaller than K")),
            ((2, 1), 3, 0, ValueError("first component")),
            ((1, 1), 2.0, 0, ValueError("K must be an int")),
        ],
    )
    def test_invalid(self, alpha, K, k0, expect):
        assert_call(GridSpec, expect, alpha, K, k0)

    def test_frequency_indices_in_fft_order(self):
        assert_equal(
            GRID.axis_frequency_indices(0), np.fft.fftfreq(16, 1 / 16).astype(np.int64)
        )
        assert GRID.axis_frequencies(1)[1] == 1 / 64

    def test_refined_and_dilated(self):
        assert GRID.refined() == GridSpec((1, 2), 4, -1)
        dilated = GRID.dilated(2)
        assert dilated.shape == GRID.shape
        assert_equal(dilated.lengths, GRID.lengths * np.array([4.0, 16.0]))

    @pytest.mark.parametrize(
        "tile, b0, expect",
        [
            (Tile(0, (3, 2), (0, 1)), 0.4, Tile(0, (3, 2), (0, 1))),
            (Tile(-1, (0, 0), (0, 0)), 0.4, ResolutionError),
            (Tile(2, (0, 0), (0, 0)), 0.4, ResolutionError),
            (Tile(0, (0, 0), (0, 0)), 0.1, ResolutionError),
            (Tile(0, (8, 0), (0, 0)), 0.4, OutOfWindowError),
            (Tile(0, (0, 0), (1, 0)), 0.4, OutOfWindowError),
            (Tile(0, (0, 0), (-1, -2)), 0.4, Tile(0, (0, 0), (-1, -2))),
            (Tile(0, (0, 0), (-2, 0)), 0.4, OutOfWindowError),
            (Tile(5, (0, 0), (0, 0)), 0.4, OutOfWindowError),
            (Tile(0, (3, 2), (0, 1)), 0.5, Tile(0, (3, 2), (0, 1))),
            (Tile(0, (3, 2), (0, 1)), 0.6, ValueError("at most 0.5")),
        ],
    )
    def test_check_tile(self, tile, b0, expect):
        assert_call(GRID.check_tile, expect, tile, b0)

    def test_admissible_indices_pass_the_check(self):
        k = 0
        freq = GRID.admissible_frequency_indices(k)
        space = GRID.admissible_space_indices(k)
        corner = (space[0][-1], space[1][-1])
        for nu in (freq[0][0], freq[0][-1]):
            for mu in (freq[1][0], freq[1][-1]):
                GRID.check_tile(Tile(k, corner, (nu, mu)), 0.4)


class TestGridFunction:
    def test_shape_mismatch(self):
        assert_call(GridFunction, ValueError("do not match"), GRID, np.zeros((3, 3)))

    def test_samples_are_read_only(self):
        f = GridFunction.zeros(GRID)
        with pytest.raises(ValueError):
            f.samples[0, 0] = 1.0

    def test_plancherel(self):
        random_state = np.random.RandomState(0)
        f = GridFunction(
            GRID,
            random_state.normal(size=GRID.shape) + 1j * random_state.normal(size=GRID.shape),
        )
        assert f.to_frequency().norm() == pytest.approx(f.norm(), rel=1e-10)

    def test_round_trip_keeps_representation_tags(self):
        f = GridFunction(GRID, np.ones(GRID.shape))
        spectrum = f.to_frequency()
        assert spectrum.representation is Representation.FREQUENCY
        assert spectrum.to_frequency() is spectrum
        # the constant 1 transforms to |window| at the origin
        assert spectrum.samples[0, 0] == pytest.approx(GRID.window_volume)
        assert_equal(spectrum.to_physical().samples, f.samples, atol=1e-12)

    def test_inner_and_arithmetic(self):
        random_state = np.random.RandomState(1)
        f = GridFunction(GRID, random_state.normal(size=GRID.shape))
        g = GridFunction(GRID, random_state.normal(size=GRID.shape))
        direct = np.sum(f.samples * np.conj(g.samples)) * GRID.cell_volume
        assert f.inner(g) == pytest.approx(direct, rel=1e-10)
        assert (f + g.to_frequency()).norm() == pytest.approx(
            GridFunction(GRID, f.samples + g.samples).norm(), rel=1e-10
        )
        assert (f - f).norm() == 0.0
        assert f.scaled(2.0).norm() == pytest.approx(2 * f.norm())

    def test_different_grids_do_not_pair(self):
        f = GridFunction.zeros(GRID)
        g = GridFunction.zeros(GRID.refined())
        assert_call(f.inner, ValueError("different grids"), g)
