import numpy as np
import pytest

from tilekit.fourier.bump import BumpSpec, build_base_bump
from tilekit.fourier.grid import GridSpec, Representation, ResolutionError
from tilekit.fourier.profiles import smooth_step, transition
from tilekit.utilities.testing import assert_call, assert_equal


class TestTransition:
    def test_plateaus_are_exact(self):
        assert_equal(transition(np.array([-3.0, -1.0, 1.0, 7.0])), np.array([0.0, 0.0, 1.0, 1.0]))

    def test_symmetric_about_zero(self):
        t = np.linspace(-0.99, 0.99, 41)
        assert_equal(transition(t) + transition(-t), np.ones_like(t), atol=1e-7)
        assert transition(0.0) == pytest.approx(0.5, abs=1e-7)

    def test_monotone(self):
        values = transition(np.linspace(-1, 1, 201))
        assert np.all(np.diff(values) >= -1e-12)

    @pytest.mark.parametrize(
        "inner, outer, expect",
        [(0.5, 0.25, ValueError("smaller than outer")), (-1.0, 1.0, ValueError("non-negative"))],
    )
    def test_smooth_step_invalid(self, inner, outer, expect):
        assert_call(smooth_step, expect, 0.0, inner, outer)

    def test_smooth_step_is_even(self):
        x = np.linspace(0, 3, 31)
        assert_equal(smooth_step(x, 1.0, 2.0), smooth_step(-x, 1.0, 2.0))


class TestBumpSpec:
    def test_default_widths(self):
        bump = BumpSpec()
        assert (bump.b0, bump.b1) == (0.1, 0.09)
        assert_equal(bump.profile(np.array([0.0, 0.045, -0.045, 0.05, 0.2])), np.array([1.0, 1.0, 1.0, 0.0, 0.0]))
        assert 0.0 < bump.profile(0.0475) < 1.0

    @pytest.mark.parametrize(
        "b0, b1, expect",
        [
            (0.1, 0.1, ValueError("b1 must lie strictly")),
            (1.0, 0.5, ValueError("b0 must lie strictly")),
            (0.3, 0.0, ValueError("b1 must lie strictly")),
            (0.3, 0.2, BumpSpec(0.3, 0.2)),
        ],
    )
    def test_validation(self, b0, b1, expect):
        assert_call(BumpSpec, expect, b0, b1)

    def test_values_in_unit_interval(self):
        points = np.random.RandomState(3).uniform(-0.1, 0.1, size=(500, 3))
        values = BumpSpec().evaluate(points)
        assert np.all((values >= 0) & (values <= 1))


class TestBuildBaseBump:
    GRID = GridSpec((1, 1), 5, -1)

    def test_center_and_plateau(self):
        bump = build_base_bump(0.1, 0.09, self.GRID, 0)
        assert bump.representation is Representation.FREQUENCY
        assert bump.samples[0, 0] == 1.0
        # lattice step 2 ** -5 puts |m| <= 1 on the plateau and |m| >= 2 off the support
        assert set(np.unique(bump.samples.real)) == {0.0, 1.0}
        assert np.count_nonzero(bump.samples) == 9

    def test_support(self):
        bump = build_base_bump(0.3, 0.2, GridSpec((1, 2), 3, -1), 0)
        freqs = bump.grid.frequencies()
        outside = np.any(np.abs(freqs) > 0.15, axis=-1)
        assert np.all(bump.samples[outside] == 0)

    def test_plancherel(self):
        bump = build_base_bump(0.3, 0.2, GridSpec((1, 2), 3, -1), 0)
        assert bump.to_physical().norm() == pytest.approx(bump.norm(), rel=1e-10)

    @pytest.mark.parametrize("k", [-1, 4, 3])
    def test_unresolvable(self, k):
        assert_call(build_base_bump, ResolutionError, 0.1, 0.09, self.GRID, k)
