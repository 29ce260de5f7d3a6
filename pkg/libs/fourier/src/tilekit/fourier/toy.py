"""
The family of less oscillatory model multipliers on R^2 with alpha = (1, d):

    m_{d,delta}(xi, eta) = zeta^{d'/2} exp(i zeta^{-d' delta}) psi(zeta),
    zeta = eta^{1/d} / xi,  d' = d / (d - 1),

on the quadrant xi, eta > 0, its dyadic pieces in zeta and their rescalings.
"""
import enum
import functools
import typing as t

import attr
import numpy as np

from tilekit.fourier.multipliers import MultiplierSpec
from tilekit.fourier.profiles import smooth_step
from tilekit.utilities.validators import Validators


class ToyVariant(enum.Enum):
    FULL = "full"
    PIECE = "piece"
    RESCALED = "rescaled"


@attr.s(frozen=True)
class ToyMultiplierParams:
    d = attr.ib(converter=lambda v: Validators.Integers.at_least(v, 2, "d"))
    delta = attr.ib(
        default=0.0,
        converter=lambda v: Validators.Floats.in_closed_interval(v, 0.0, 1.0, "delta"),
    )
    j = attr.ib(default=0, converter=lambda v: Validators.Integers.non_positive(v, "j"))
    # psi equals one on [-plateau, plateau] and vanishes outside [-2, 2]
    plateau = attr.ib(
        default=1.5, converter=lambda v: Validators.Floats.check_type(v, "plateau")
    )

    @plateau.validator
    def _check_plateau(self, attribute, value):
        if not 1.0 <= value < 2.0:
            raise ValueError("Parameter plateau must lie in [1, 2)")

    @property
    def d_prime(self) -> float:
        return self.d / (self.d - 1)

    @property
    def alpha(self) -> t.Tuple[int, int]:
        return 1, self.d


def psi_cutoff(x, plateau: float = 1.5) -> np.ndarray:
    return smooth_step(x, plateau, 2.0)


def phi_piece(x, plateau: float = 1.5) -> np.ndarray:
    """phi(x) = psi(x) - psi(2x), supported in [plateau / 2, 2]."""
    x = np.asarray(x, dtype=float)
    return psi_cutoff(x, plateau) - psi_cutoff(2.0 * x, plateau)


def phi_j(x, j: int, plateau: float = 1.5) -> np.ndarray:
    return phi_piece(np.ldexp(np.asarray(x, dtype=float), -j), plateau)


def zeta(points: np.ndarray, d: int) -> np.ndarray:
    """eta^{1/d} / xi on the open quadrant; zero elsewhere."""
    xi, eta = points[..., 0], points[..., 1]
    inside = (xi > 0) & (eta > 0)
    out = np.zeros(points.shape[:-1])
    out[inside] = eta[inside] ** (1.0 / d) / xi[inside]
    return out


def _quadrant(points: np.ndarray) -> np.ndarray:
    return (points[..., 0] > 0) & (points[..., 1] > 0)


def _toy_profile(
    points: np.ndarray, d: int, delta: float, j: int, plateau: float, variant: str
) -> np.ndarray:
    z = zeta(points, d)
    d_prime = d / (d - 1)
    out = np.zeros(z.shape, dtype=complex)
    inside = z > 0
    z = z[inside]
    if variant == ToyVariant.FULL.value:
        cutoff = psi_cutoff(z, plateau)
        frequency = 1.0
    elif variant == ToyVariant.PIECE.value:
        cutoff = phi_j(z, j, plateau)
        frequency = 1.0
    else:
        cutoff = phi_piece(z, plateau)
        frequency = 2.0 ** (-j * d_prime * delta)
    live = cutoff != 0
    values = np.zeros(z.shape, dtype=complex)
    zl = z[live]
    values[live] = (
        zl ** (d_prime / 2.0)
        * np.exp(1j * frequency * zl ** (-d_prime * delta))
        * cutoff[live]
    )
    out[inside] = values
    return out


def toy_multiplier(
    params: ToyMultiplierParams, variant: t.Union[ToyVariant, str] = ToyVariant.FULL
) -> MultiplierSpec:
    """
    full:     zeta^{d'/2} exp(i zeta^{-d' delta}) psi(zeta)
    piece:    zeta^{d'/2} exp(i zeta^{-d' delta}) phi(2^{-j} zeta)
    rescaled: zeta^{d'/2} exp(i 2^{-j d' delta} zeta^{-d' delta}) phi(zeta)
    """
    variant = ToyVariant(variant)
    return MultiplierSpec(
        "toy",
        params.alpha,
        functools.partial(
            _toy_profile,
            d=params.d,
            delta=params.delta,
            j=params.j,
            plateau=params.plateau,
            variant=variant.value,
        ),
        {
            "d": params.d,
            "delta": params.delta,
            "j": params.j,
            "plateau": params.plateau,
            "variant": variant.value,
        },
        support=_quadrant,
    )


@attr.s(frozen=True)
class Summability:
    """
    Whether sum_{j <= 0} ||m_{d,delta,j}|| summed against the M^{nu0} growth converges:
    the terms behave like 2^{j d' (1/2 - delta nu0)}.
    """

    delta_threshold = attr.ib()
    exponent = attr.ib()
    partial_sum = attr.ib()
    summable = attr.ib()


def summability(params: ToyMultiplierParams, nu0: float, terms: int = 64) -> Summability:
    nu0 = Validators.Floats.greater_than_zero(nu0, "nu0")
    terms = Validators.Integers.greater_than_zero(terms, "terms")
    exponent = params.d_prime * (0.5 - params.delta * nu0)
    js = -np.arange(terms)
    partial = float(np.sum(np.exp2(js * exponent)))
    return Summability(1.0 / (2.0 * nu0), exponent, partial, exponent > 0)
