import typing as t

import attr
import numpy as np

from tilekit.fourier.grid import GridFunction, GridSpec, Representation, ResolutionError
from tilekit.fourier.profiles import smooth_step
from tilekit.utilities.validators import Validators


@attr.s(frozen=True)
class BumpSpec:
    """
    The base bump phi: phi_hat is the tensor product of a one dimensional profile which
    equals 1 on [-b1/2, b1/2] and vanishes outside [-b0/2, b0/2].
    """

    b0 = attr.ib(
        default=0.1,
        converter=lambda v: Validators.Floats.in_open_interval(v, 0.0, 1.0, "b0"),
    )
    b1 = attr.ib(default=0.09, converter=lambda v: Validators.Floats.check_type(v, "b1"))

    @b1.validator
    def _check_b1(self, attribute, value):
        Validators.Floats.in_open_interval(value, 0.0, self.b0, "b1")

    def profile(self, u) -> np.ndarray:
        return smooth_step(u, self.b1 / 2.0, self.b0 / 2.0)

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        """phi_hat at points stacked along the trailing axis."""
        return np.prod(self.profile(np.asarray(xi, dtype=float)), axis=-1)

    def to_record(self) -> t.Dict[str, float]:
        return {"b0": self.b0, "b1": self.b1}


def check_bump_resolution(bump: BumpSpec, grid: GridSpec, k: int) -> None:
    k_low, k_high = grid.tile_scale_range()
    if not k_low <= k <= k_high:
        raise ResolutionError(
            f"Scale {k} lies outside the resolvable range [{k_low}, {k_high}]"
        )
    for a in grid.alpha:
        if bump.b0 * 2 ** ((grid.K - k) * a) < 1:
            raise ResolutionError(
                f"Bump support at scale {k} is thinner than one frequency cell"
            )


def bump_axis_profile(bump: BumpSpec, grid: GridSpec, k: int, axis: int, offset: int):
    """
    The profile phi_hat_1(2^{k alpha_i} (xi - offset / L_i)) along one frequency axis.
    The argument is exact: the lattice step 1 / L_i is 2 ** (-(K - k) alpha_i) after
    dilation.
    """
    shift = (grid.K - k) * grid.alpha[axis]
    m = grid.axis_frequency_indices(axis)
    return bump.profile(np.ldexp((m - offset).astype(float), -shift))


def build_base_bump(b0: float, b1: float, grid: GridSpec, k: int) -> GridFunction:
    """
    Frequency samples of phi_hat(delta_{2^k} xi) on the grid's frequency lattice.
    """
    bump = BumpSpec(b0, b1)
    check_bump_resolution(bump, grid, k)
    factors = [bump_axis_profile(bump, grid, k, i, 0) for i in range(grid.n)]
    samples = factors[0]
    for factor in factors[1:]:
        samples = np.multiply.outer(samples, factor)
    return GridFunction(grid, samples, Representation.FREQUENCY)
