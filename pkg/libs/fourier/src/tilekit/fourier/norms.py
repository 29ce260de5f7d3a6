"""
Finite-difference estimates of the M^nu norm sup_{|beta| <= nu} sup_{rho(xi) = 1} |d^beta m(xi)|.
"""
import functools
import itertools
import logging
import math
import typing as t

import numpy as np
from scipy.special import comb

from tilekit.fourier.multipliers import (
    DegenerateMultiplierError,
    MultiplierSpec,
    eval_multiplier,
    sphere_projection,
)
from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.utilities.validators import Validators

_logger = logging.getLogger(__name__)

MINIMUM_SPHERE_SAMPLES = 16


def sphere_points(alpha: AnisoExponent, samples_per_axis: int) -> np.ndarray:
    """
    Quasi-uniform points on {rho = 1}, face by face: xi_i = +-1 on the face of axis i and
    the remaining coordinates on a uniform grid of [-1, 1].
    """
    samples_per_axis = Validators.Integers.at_least(
        samples_per_axis, MINIMUM_SPHERE_SAMPLES, "sphere_samples"
    )
    line = np.linspace(-1.0, 1.0, samples_per_axis)
    faces = []
    for axis in range(alpha.n):
        others = np.meshgrid(*([line] * (alpha.n - 1)), indexing="ij")
        others = [o.ravel() for o in others]
        for sign in (-1.0, 1.0):
            columns = list(others)
            columns.insert(axis, np.full(samples_per_axis ** (alpha.n - 1), sign))
            faces.append(np.stack(columns, axis=-1))
    return np.concatenate(faces, axis=0)


def multi_indices(n: int, order: int) -> t.List[t.Tuple[int, ...]]:
    """All beta with |beta| <= order, by increasing |beta|."""
    indices = [b for b in itertools.product(range(order + 1), repeat=n) if sum(b) <= order]
    return sorted(indices, key=lambda b: (sum(b), b))


def default_step(order: int) -> float:
    return max(1e-3, np.finfo(float).eps ** (1.0 / (order + 2)))


def _central_stencil(order: int) -> t.List[t.Tuple[float, float]]:
    """(offset, weight) pairs of the order-q central difference with unit step."""
    return [
        (order / 2.0 - j, (-1) ** j * comb(order, j, exact=True))
        for j in range(order + 1)
    ]


def _difference(
    m: MultiplierSpec, beta: t.Sequence[int], points: np.ndarray, step: float
) -> np.ndarray:
    total = np.zeros(points.shape[:-1], dtype=complex)
    stencils = [_central_stencil(b) for b in beta]
    for combination in itertools.product(*stencils):
        offset = np.array([o for o, _ in combination]) * step
        weight = math.prod(w for _, w in combination)
        total += weight * eval_multiplier(m, points + offset)
    return total / step ** sum(beta)


def derivative(
    m: MultiplierSpec,
    beta: t.Sequence[int],
    points: np.ndarray,
    step: t.Optional[float] = None,
) -> np.ndarray:
    """
    d^beta m at points stacked along the trailing axis: tensor central differences with
    one Richardson extrapolation (4 D(h / 2) - D(h)) / 3.
    """
    beta = Validators.Sequences.integer_vector(beta, "beta", m.alpha.n)
    points = np.asarray(points, dtype=float)
    if sum(beta) == 0:
        return np.asarray(eval_multiplier(m, points), dtype=complex)
    step = default_step(sum(beta)) if step is None else step
    coarse = _difference(m, beta, points, step)
    fine = _difference(m, beta, points, step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def _check_support(m: MultiplierSpec, points: np.ndarray):
    if m.support is None:
        return
    _, projected = sphere_projection(points, m.alpha)
    if not np.any(m.support(projected)):
        raise DegenerateMultiplierError(
            f"Multiplier {m.name} vanishes identically on the sampled unit sphere"
        )


@functools.lru_cache(maxsize=256)
def multiplier_norm(
    m: MultiplierSpec, nu: int, sphere_samples: int = MINIMUM_SPHERE_SAMPLES
) -> float:
    """
    Estimated ||m||_{M^nu}: the largest |d^beta m| over |beta| <= nu on the sampled unit
    sphere. Nondecreasing in nu and equal to the sampled sup |m| at nu = 0.
    """
    nu = Validators.Integers.non_negative(nu, "nu")
    if nu > m.smoothness:
        raise ValueError(
            f"Parameter nu must not exceed the declared smoothness {m.smoothness}"
        )
    points = sphere_points(m.alpha, sphere_samples)
    _check_support(m, points)
    value = 0.0
    for beta in multi_indices(m.alpha.n, nu):
        value = max(value, float(np.max(np.abs(derivative(m, beta, points)))))
    _logger.debug(f"Estimated M^{nu} norm of {m.name} {dict(m.params)} as {value}")
    return value
