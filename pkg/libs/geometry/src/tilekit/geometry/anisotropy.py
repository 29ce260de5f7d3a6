import typing as t

import attr
import numpy as np

from tilekit.utilities.validators import Validators

ArrayLike = t.Union[t.Sequence[float], np.ndarray]


def _to_alpha(value) -> t.Tuple[int, ...]:
    if isinstance(value, AnisoExponent):
        return value.alpha
    return Validators.Sequences.integer_vector(value, "alpha")


@attr.s(frozen=True, repr=False)
class AnisoExponent:
    """
    The exponent vector alpha of the anisotropic dilations
    delta_lambda(x) = (lambda ** alpha_1 x_1, ..., lambda ** alpha_n x_n).
    Normalised so that alpha_1 = 1, every component is an integer >= 1.
    """

    alpha = attr.ib(converter=_to_alpha)

    @alpha.validator
    def _check_alpha(self, attribute, value):
        if len(value) == 0:
            raise ValueError("Parameter alpha must have at least one component")
        if value[0] != 1:
            raise ValueError("Parameter alpha must have first component equal to 1")
        if any(a < 1 for a in value):
            raise ValueError("Parameter alpha must have all components >= 1")

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def total(self) -> int:
        """|alpha|, the homogeneous dimension."""
        return sum(self.alpha)

    @property
    def max_component(self) -> int:
        return max(self.alpha)

    @property
    def as_array(self) -> np.ndarray:
        return np.array(self.alpha, dtype=np.int64)

    def __iter__(self):
        return iter(self.alpha)

    def __len__(self):
        return len(self.alpha)

    def __getitem__(self, item):
        return self.alpha[item]

    def __repr__(self):
        return f"AnisoExponent({self.alpha!r})"


def dilate(x: ArrayLike, lam: float, alpha: AnisoExponent) -> np.ndarray:
    """
    delta_lam applied along the last axis of x. Exact for powers of two.
    """
    lam = Validators.Floats.greater_than_zero(lam, "lam")
    x = np.asarray(x, dtype=float)
    return x * np.power(lam, alpha.as_array.astype(float))


def _root(values: np.ndarray, degree: int) -> np.ndarray:
    # sqrt and cbrt keep power of two homogeneity exact
    if degree == 1:
        return values
    elif degree == 2:
        return np.sqrt(values)
    elif degree == 3:
        return np.cbrt(values)
    return np.power(values, 1.0 / degree)


def aniso_norm(x: ArrayLike, alpha: AnisoExponent) -> np.ndarray:
    """
    rho(x) = max_i |x_i| ** (1 / alpha_i), reduced over the last axis.
    """
    x = np.abs(np.asarray(x, dtype=float))
    if x.shape[-1] != alpha.n:
        raise ValueError(
            f"Parameter x must have {alpha.n} components in its last axis"
        )
    roots = [_root(x[..., i], a) for i, a in enumerate(alpha)]
    return np.max(np.stack(roots, axis=-1), axis=-1)


def dist_alpha(a, b, alpha: AnisoExponent) -> float:
    """
    Anisotropic distance between two axis aligned rectangles, computed from the gaps
    between the closures on each axis.
    """
    lower_a, upper_a = np.asarray(a.lower), np.asarray(a.upper)
    lower_b, upper_b = np.asarray(b.lower), np.asarray(b.upper)
    gaps = np.maximum(0.0, np.maximum(lower_a - upper_b, lower_b - upper_a))
    return float(aniso_norm(gaps, alpha))
