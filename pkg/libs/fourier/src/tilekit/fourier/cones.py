"""
The cone function

    theta_r(xi) = int int chi(zeta) 1_{Q_r}(zeta - delta_{1/t} xi) dt / t dzeta,

with chi(zeta) = phi_hat(zeta - 1/4)^2 and Q_r = prod [r_i / 2, (r_i + 1) / 2). The
universal normalising constant is dropped: only ratios and positivity are used.
"""
import enum
import itertools
import logging
import typing as t

import attr
import numpy as np

from tilekit.fourier.bump import BumpSpec
from tilekit.geometry.anisotropy import AnisoExponent, dilate
from tilekit.utilities.validators import Validators

_logger = logging.getLogger(__name__)


class TIntegration(enum.Enum):
    EXACT = "exact"
    LOG_UNIFORM = "log_uniform"


@attr.s(frozen=True)
class QuadratureSpec:
    zeta_nodes = attr.ib(
        default=64, converter=lambda v: Validators.Integers.greater_than_zero(v, "zeta_nodes")
    )
    t_nodes = attr.ib(
        default=512, converter=lambda v: Validators.Integers.greater_than_zero(v, "t_nodes")
    )
    method = attr.ib(default=TIntegration.EXACT, converter=TIntegration)


def nonzero_bit_vectors(n: int) -> t.List[t.Tuple[int, ...]]:
    return [r for r in itertools.product((0, 1), repeat=n) if any(r)]


def _zeta_nodes(bump: BumpSpec, n: int, count: int) -> t.Tuple[np.ndarray, float]:
    """Midpoint nodes over the support of chi, and the weight of one cell."""
    width = bump.b0 / count
    line = 0.25 - bump.b0 / 2.0 + width * (np.arange(count) + 0.5)
    nodes = np.stack(np.meshgrid(*([line] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return nodes, width ** n


def _t_intervals(
    r: t.Sequence[int], xi: np.ndarray, zeta: np.ndarray, alpha: AnisoExponent
) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    For every zeta node, the interval (T_lo, T_hi) of t with zeta - delta_{1/t} xi in Q_r.
    Per axis the condition reads a < s xi_i <= b for s = t^{-alpha_i} > 0.
    """
    t_lo = np.zeros(zeta.shape[0])
    t_hi = np.full(zeta.shape[0], np.inf)
    with np.errstate(divide="ignore"):
        for i, a_i in enumerate(alpha):
            a = zeta[:, i] - (r[i] + 1) / 2.0
            b = zeta[:, i] - r[i] / 2.0
            x = xi[i]
            if x > 0:
                s_lo, s_hi = np.maximum(a / x, 0.0), b / x
            elif x < 0:
                s_lo, s_hi = np.maximum(b / x, 0.0), a / x
            else:
                inside = (a < 0) & (b >= 0)
                s_lo = np.where(inside, 0.0, np.inf)
                s_hi = np.where(inside, np.inf, 0.0)
            s_hi = np.maximum(s_hi, 0.0)
            # t = s^{-1 / alpha_i} reverses the order
            t_lo = np.maximum(t_lo, np.power(s_hi, -1.0 / a_i))
            t_hi = np.minimum(t_hi, np.power(s_lo, -1.0 / a_i))
    return t_lo, t_hi


def _log_lengths(t_lo: np.ndarray, t_hi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t_lo)
    live = t_hi > t_lo
    with np.errstate(divide="ignore"):
        out[live] = np.log(t_hi[live]) - np.log(t_lo[live])
    if np.any(np.isinf(out)):
        raise ValueError("The t-integral of the cone function diverges")
    return out


def _log_uniform_lengths(
    t_lo: np.ndarray, t_hi: np.ndarray, nodes: int
) -> np.ndarray:
    live = (t_hi > t_lo) & (t_lo > 0)
    if not np.any(live):
        return np.zeros_like(t_lo)
    lower = np.log(np.min(t_lo[live]))
    upper = np.log(np.max(t_hi[live]))
    if not np.isfinite(upper):
        raise ValueError("The t-integral of the cone function diverges")
    step = (upper - lower) / nodes
    u = lower + step * (np.arange(nodes) + 0.5)
    logs_lo = np.log(np.where(live, t_lo, 1.0))[:, None]
    logs_hi = np.log(np.where(live, t_hi, 1.0))[:, None]
    hits = (u[None, :] > logs_lo) & (u[None, :] < logs_hi) & live[:, None]
    return hits.sum(axis=1) * step


def theta_r(
    r: t.Sequence[int],
    xi,
    bump: BumpSpec,
    alpha: AnisoExponent,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """theta_r at a single nonzero point xi."""
    xi = np.asarray(xi, dtype=float)
    return float(theta_r_batch(r, xi[None, :], bump, alpha, quad)[0])


def theta_r_batch(
    r: t.Sequence[int],
    xis,
    bump: BumpSpec,
    alpha: AnisoExponent,
    quad: QuadratureSpec = QuadratureSpec(),
) -> np.ndarray:
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    alpha = AnisoExponent(alpha)
    n = alpha.n
    r = Validators.Sequences.nonzero_bit_vector(r, "r", n)
    if xis.shape[-1] != n:
        raise ValueError(f"Parameter xi must have {n} components")
    if np.any(np.all(xis == 0, axis=-1)):
        raise ValueError("Parameter xi must be nonzero")
    zeta, cell = _zeta_nodes(bump, n, quad.zeta_nodes)
    chi = bump.evaluate(zeta - 0.25) ** 2
    out = np.empty(xis.shape[0])
    for index, xi in enumerate(xis):
        t_lo, t_hi = _t_intervals(r, xi, zeta, alpha)
        if quad.method is TIntegration.EXACT:
            lengths = _log_lengths(t_lo, t_hi)
        else:
            lengths = _log_uniform_lengths(t_lo, t_hi, quad.t_nodes)
        out[index] = float(np.sum(chi * lengths) * cell)
    return out


def sample_cone(
    r: t.Sequence[int],
    bump: BumpSpec,
    alpha: AnisoExponent,
    samples: int,
    random_state: np.random.RandomState,
) -> np.ndarray:
    """
    Points delta_t(zeta - q) with zeta in [1/4 - b1/2, 1/4 + b1/2]^n, q in Q_r and
    t = 2^u for u uniform in [-2, 2].
    """
    n = alpha.n
    r = np.asarray(r, dtype=float)
    zeta = 0.25 + bump.b1 * (random_state.uniform(size=(samples, n)) - 0.5)
    q = (r + random_state.uniform(size=(samples, n))) / 2.0
    scale = np.exp2(random_state.uniform(-2.0, 2.0, size=samples))
    return np.stack([dilate(p, s, alpha) for p, s in zip(zeta - q, scale)])


@attr.s(frozen=True)
class PositivityScan:
    minimum: t.Mapping[t.Tuple[int, ...], float] = attr.ib()
    samples = attr.ib()

    @property
    def eps0(self) -> float:
        """Half the least sampled value over every r, the positivity margin."""
        return 0.5 * min(self.minimum.values())


def positivity_scan(
    bump: BumpSpec,
    alpha: AnisoExponent,
    samples: int = 50,
    seed: int = 0,
    quad: QuadratureSpec = QuadratureSpec(),
) -> PositivityScan:
    alpha = AnisoExponent(alpha)
    random_state = np.random.RandomState(seed)
    minimum = {}
    for r in nonzero_bit_vectors(alpha.n):
        points = sample_cone(r, bump, alpha, samples, random_state)
        minimum[r] = float(np.min(theta_r_batch(r, points, bump, alpha, quad)))
        _logger.debug(f"Least sampled theta_{r} on its cone is {minimum[r]}")
    return PositivityScan(minimum, samples)


def covering_points(
    alpha: AnisoExponent, eps0: float, samples: int, random_state: np.random.RandomState
) -> np.ndarray:
    """
    Points of {rho = 1} inside (-inf, eps0]^n: some xi_i = -1 and the other coordinates
    uniform in [-1, min(1, eps0)].
    """
    n = alpha.n
    upper = min(1.0, eps0)
    points = random_state.uniform(-1.0, upper, size=(samples, n))
    faces = random_state.randint(n, size=samples)
    points[np.arange(samples), faces] = -1.0
    return points


@attr.s(frozen=True)
class CoveringScan:
    eps0 = attr.ib()
    max_theta = attr.ib(repr=False)

    @property
    def margin(self) -> float:
        return float(np.min(self.max_theta)) - self.eps0

    @property
    def violations(self) -> int:
        return int(np.sum(self.max_theta <= self.eps0))


def covering_scan(
    bump: BumpSpec,
    alpha: AnisoExponent,
    eps0: float,
    samples: int = 200,
    seed: int = 0,
    quad: QuadratureSpec = QuadratureSpec(),
) -> CoveringScan:
    alpha = AnisoExponent(alpha)
    points = covering_points(alpha, eps0, samples, np.random.RandomState(seed))
    values = np.stack(
        [theta_r_batch(r, points, bump, alpha, quad) for r in nonzero_bit_vectors(alpha.n)]
    )
    return CoveringScan(eps0, values.max(axis=0))
