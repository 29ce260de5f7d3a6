import functools
import math
import typing as t

import attr
import numpy as np
from frozendict import frozendict

from tilekit.geometry.anisotropy import AnisoExponent, aniso_norm
from tilekit.utilities.freezing import freeze_recursively, unfreeze_recursively
from tilekit.utilities.validators import Validators


class DegenerateMultiplierError(ValueError):
    """
    The support of a multiplier misses every sample point of the unit sphere.
    """


Profile = t.Callable[[np.ndarray], np.ndarray]
SupportPredicate = t.Callable[[np.ndarray], np.ndarray]


@attr.s(frozen=True)
class MultiplierSpec:
    """
    An anisotropically homogeneous symbol m(delta_lambda xi) = m(xi). It is given by its
    profile on the unit rho-sphere and an optional support predicate, both evaluated on
    points stacked along the trailing axis. Equality and digests only see the name, the
    exponent, the parameters and the declared smoothness; the callables must be picklable
    so that suites can ship multipliers to worker processes.
    """

    name = attr.ib(validator=attr.validators.instance_of(str))
    alpha = attr.ib(converter=AnisoExponent)
    profile = attr.ib(eq=False, repr=False)
    params = attr.ib(default=frozendict(), converter=freeze_recursively)
    support = attr.ib(default=None, eq=False, repr=False)
    smoothness = attr.ib(
        default=16,
        converter=lambda v: Validators.Integers.non_negative(v, "smoothness"),
    )

    def to_record(self) -> t.Dict[str, t.Any]:
        return {
            "name": self.name,
            "alpha": list(self.alpha),
            "params": unfreeze_recursively(self.params),
        }


def sphere_projection(xi: np.ndarray, alpha: AnisoExponent) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Returns (rho(xi), delta_{rho(xi)^{-1}} xi) for points stacked along the trailing axis;
    points at the origin are left in place.
    """
    rho = aniso_norm(xi, alpha)
    safe = np.where(rho > 0, rho, 1.0)
    projected = xi / safe[..., None] ** alpha.as_array
    return rho, projected


def eval_multiplier(m: MultiplierSpec, xi) -> t.Union[complex, np.ndarray]:
    """
    m(xi) = profile(delta_{rho(xi)^{-1}} xi) for xi != 0 and m(0) = 0. A single point
    gives a complex number, a stack of points an array.
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    points = xi[None, :] if single else xi
    if points.shape[-1] != m.alpha.n:
        raise ValueError(f"Parameter xi must have {m.alpha.n} components in its last axis")
    rho, projected = sphere_projection(points, m.alpha)
    values = np.zeros(points.shape[:-1], dtype=complex)
    active = rho > 0
    if m.support is not None:
        active &= m.support(projected)
    if np.any(active):
        values[active] = m.profile(projected[active])
    return complex(values[0]) if single else values


def _constant_profile(points: np.ndarray, value: complex) -> np.ndarray:
    return np.full(points.shape[:-1], value, dtype=complex)


def constant_multiplier(alpha, value: float = 1.0) -> MultiplierSpec:
    """m = value away from the origin."""
    value = Validators.Floats.check_type(value, "value")
    return MultiplierSpec(
        "constant",
        alpha,
        functools.partial(_constant_profile, value=value),
        {"value": value},
    )


def _smooth_profile(points: np.ndarray, alpha: t.Tuple[int, ...]) -> np.ndarray:
    order = 2 * math.lcm(*alpha)
    terms = [points[..., i] ** (order // a) for i, a in enumerate(alpha)]
    return terms[0] / np.sum(terms, axis=0)


def smooth_multiplier(alpha) -> MultiplierSpec:
    """
    xi_1^{2L} / sum_i xi_i^{2L / alpha_i} with L = lcm(alpha): real, even, smooth away from
    the origin and homogeneous of degree zero.
    """
    alpha = AnisoExponent(alpha)
    return MultiplierSpec(
        "smooth", alpha, functools.partial(_smooth_profile, alpha=tuple(alpha))
    )
