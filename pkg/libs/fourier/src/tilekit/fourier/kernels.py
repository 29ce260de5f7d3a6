import logging

import numpy as np

from tilekit.fourier.grid import GridFunction, GridSpec, Representation
from tilekit.fourier.multipliers import MultiplierSpec, eval_multiplier
from tilekit.fourier.norms import MINIMUM_SPHERE_SAMPLES, multiplier_norm
from tilekit.fourier.weights import periodic_rho

_logger = logging.getLogger(__name__)


def multiplier_samples(m: MultiplierSpec, grid: GridSpec) -> np.ndarray:
    """m on the frequency lattice of the grid, with m(0) = 0."""
    return eval_multiplier(m, grid.frequencies())


def kernel(m: MultiplierSpec, grid: GridSpec) -> GridFunction:
    """The periodic kernel K with K_hat = m on the lattice, in physical samples."""
    spectrum = GridFunction(grid, multiplier_samples(m, grid), Representation.FREQUENCY)
    return spectrum.to_physical()


def kernel_decay_order(m: MultiplierSpec) -> int:
    return m.alpha.total // 2 + 1


def kernel_decay_constant(
    m: MultiplierSpec, grid: GridSpec, sphere_samples: int = MINIMUM_SPHERE_SAMPLES
) -> float:
    """
    max |K(x)| rho_per(x)^{|alpha|} / ||m||_{M^{floor(|alpha|/2)+1}} over the far field
    rho_per(x) >= 4 * 2^{k0}.
    """
    values = np.abs(kernel(m, grid).samples)
    rho = periodic_rho(grid, np.zeros(grid.n))
    far = rho >= 4 * grid.spacing_scale
    norm = multiplier_norm(m, kernel_decay_order(m), sphere_samples)
    if norm == 0 or not np.any(far):
        return 0.0
    constant = float(np.max(values[far] * rho[far] ** m.alpha.total)) / norm
    _logger.debug(f"Kernel decay constant of {m.name} on {grid} is {constant}")
    return constant
