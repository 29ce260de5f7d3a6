import math
import typing as t

import numpy as np

from tilekit.fourier.grid import GridFunction, GridSpec, Representation
from tilekit.geometry.anisotropy import aniso_norm
from tilekit.geometry.cubes import cube_center
from tilekit.geometry.tiles import Tile
from tilekit.utilities.validators import Validators


def periodic_offsets(grid: GridSpec, center: t.Sequence[float]) -> np.ndarray:
    """
    Per axis, the wrapped distance from each sample to center on the torus of the window,
    stacked along a trailing axis.
    """
    center = np.asarray(center, dtype=float)
    axes = []
    for i in range(grid.n):
        length = grid.lengths[i]
        gap = np.mod(grid.axis_positions(i) - center[i], length)
        axes.append(np.minimum(gap, length - gap))
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def periodic_rho(grid: GridSpec, center: t.Sequence[float]) -> np.ndarray:
    """rho_per(x - center), the least rho over lattice translates of the window."""
    return aniso_norm(periodic_offsets(grid, center), grid.alpha)


def base_weight(nu: float, grid: GridSpec, center=None) -> GridFunction:
    """w^nu(x) = (1 + rho_per(x - center)) ** (-nu)."""
    nu = Validators.Floats.greater_than_zero(nu, "nu")
    center = np.zeros(grid.n) if center is None else center
    samples = (1.0 + periodic_rho(grid, center)) ** (-nu)
    return GridFunction(grid, samples, Representation.PHYSICAL)


def weight_w(tile: Tile, nu: float, grid: GridSpec) -> GridFunction:
    """
    w^nu_P = T_{c(I_P)} D^1_{2^{k_P}} w^nu, so that w^nu_P(c(I_P)) = 2^{-k_P |alpha|}.
    """
    nu = Validators.Floats.greater_than_zero(nu, "nu")
    center = cube_center(tile.interval, grid.alpha)
    rho = periodic_rho(grid, center)
    samples = math.ldexp(1.0, -tile.k * grid.alpha.total) * (
        1.0 + np.ldexp(rho, -tile.k)
    ) ** (-nu)
    return GridFunction(grid, samples, Representation.PHYSICAL)


def weight_samples(tile: Tile, nu: float, grid: GridSpec) -> np.ndarray:
    return weight_w(tile, nu, grid).samples.real


def riemann_integral(f: GridFunction, mask: t.Optional[np.ndarray] = None) -> complex:
    samples = f.to_physical().samples
    if mask is not None:
        samples = samples * mask
    return complex(np.sum(samples) * f.grid.cell_volume)
