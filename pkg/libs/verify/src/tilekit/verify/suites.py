"""
Seeded verification suites. Each suite draws its cases from RandomState([seed, suite,
case]), evaluates them independently (in worker processes when jobs > 1) and summarizes
the case table into fitted constants and checks.
"""
import functools
import logging
import math
import time
import typing as t

import attr
import numpy as np
import pandas as pd
from frozendict import frozendict

from tilekit.analysis.maximal import maximal_domination_check
from tilekit.analysis.operators import in_semitile
from tilekit.fourier.bump import BumpSpec
from tilekit.fourier.catalogue import build_multiplier
from tilekit.fourier.cones import (
    QuadratureSpec,
    covering_scan,
    nonzero_bit_vectors,
    positivity_scan,
    theta_r,
)
from tilekit.fourier.grid import GridFunction, GridSpec
from tilekit.fourier.kernels import kernel_decay_constant
from tilekit.fourier.multipliers import MultiplierSpec
from tilekit.fourier.norms import MINIMUM_SPHERE_SAMPLES, multiplier_norm
from tilekit.fourier.packets import WavePacket, packet_inner, psi_inner, psi_P_N
from tilekit.fourier.weights import weight_samples
from tilekit.geometry.anisotropy import AnisoExponent, aniso_norm, dilate
from tilekit.geometry.cubes import AnisoCube, cube_center
from tilekit.geometry.tiles import Tile, interval_volume
from tilekit.utilities.freezing import freeze_recursively, unfreeze_recursively
from tilekit.utilities.parallel import ordered_map
from tilekit.utilities.validators import Validators
from tilekit.verify.reports import Check, Report, case_record, failed_record

_logger = logging.getLogger(__name__)

ORTHOGONALITY, DECAY, CONE, MAXIMAL = "orthogonality", "decay", "cone", "maximal"

DEFAULT_CASES = frozendict({ORTHOGONALITY: 1000, DECAY: 50, CONE: 50, MAXIMAL: 50})

# attempts at drawing a frequency point outside the semitiles of a case
_MAX_DRAWS = 64


def _optional_count(value):
    return None if value is None else Validators.Integers.greater_than_zero(value, "cases")


@attr.s(frozen=True)
class SuiteSpec:
    """
    The batch a suite runs over: the grid, the range of tile scales, the bump and the
    multiplier. cases defaults per suite.
    """

    alpha = attr.ib(default=(1, 2), converter=AnisoExponent)
    K = attr.ib(default=4, converter=lambda v: Validators.Integers.check_type(v, "K"))
    k0 = attr.ib(default=-2, converter=lambda v: Validators.Integers.check_type(v, "k0"))
    k_min = attr.ib(default=-1, converter=lambda v: Validators.Integers.check_type(v, "k_min"))
    k_max = attr.ib(default=0, converter=lambda v: Validators.Integers.check_type(v, "k_max"))
    cases = attr.ib(default=None, converter=_optional_count)
    seed = attr.ib(default=0, converter=lambda v: Validators.Integers.non_negative(v, "seed"))
    b0 = attr.ib(default=0.1, converter=lambda v: Validators.Floats.check_type(v, "b0"))
    b1 = attr.ib(default=0.09, converter=lambda v: Validators.Floats.check_type(v, "b1"))
    multiplier = attr.ib(default="smooth", validator=attr.validators.instance_of(str))
    multiplier_params = attr.ib(default=frozendict(), converter=freeze_recursively)
    sphere_samples = attr.ib(
        default=MINIMUM_SPHERE_SAMPLES,
        converter=lambda v: Validators.Integers.greater_than_zero(v, "sphere_samples"),
    )
    positivity_samples = attr.ib(
        default=50,
        converter=lambda v: Validators.Integers.greater_than_zero(v, "positivity_samples"),
    )
    covering_samples = attr.ib(
        default=200,
        converter=lambda v: Validators.Integers.greater_than_zero(v, "covering_samples"),
    )

    def __attrs_post_init__(self):
        if self.k_min > self.k_max:
            raise ValueError("Parameter k_min must not exceed k_max")
        for k in range(self.k_min, self.k_max + 1):
            self.grid.check_tile(Tile(k, (0,) * self.alpha.n, (0,) * self.alpha.n), self.b0)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.alpha, self.K, self.k0)

    @property
    def bump(self) -> BumpSpec:
        return BumpSpec(self.b0, self.b1)

    def case_count(self, suite: str) -> int:
        return DEFAULT_CASES[suite] if self.cases is None else self.cases

    def to_record(self) -> t.Dict[str, t.Any]:
        record = attr.asdict(self, recurse=False)
        record["alpha"] = list(self.alpha)
        record["multiplier_params"] = unfreeze_recursively(self.multiplier_params)
        return record


@functools.lru_cache(maxsize=16)
def suite_multiplier(spec: SuiteSpec) -> MultiplierSpec:
    """One multiplier object per spec and process, so norm estimates are cached."""
    return build_multiplier(spec.multiplier, spec.alpha, spec.multiplier_params)


def _case_state(spec: SuiteSpec, suite: str, case: int) -> np.random.RandomState:
    return np.random.RandomState([spec.seed, sorted(SUITES).index(suite), case])


def random_tile(spec: SuiteSpec, random_state: np.random.RandomState) -> Tile:
    grid = spec.grid
    k = int(random_state.randint(spec.k_min, spec.k_max + 1))
    space = [int(random_state.choice(r)) for r in grid.admissible_space_indices(k)]
    freq = [int(random_state.choice(r)) for r in grid.admissible_frequency_indices(k)]
    return Tile(k, space, freq)


def random_point_outside(
    grid: GridSpec, tiles: t.Sequence[Tile], random_state: np.random.RandomState
) -> t.Tuple[int, ...]:
    """A uniform frequency lattice point outside omega_{P(0)} for every given tile."""
    zero = (0,) * grid.n
    for _ in range(_MAX_DRAWS):
        N = np.array([random_state.randint(-(s // 2), s // 2) for s in grid.shape])
        if not any(bool(in_semitile(N[:, None], p, zero, grid)[0]) for p in tiles):
            return tuple(int(v) for v in N)
    raise RuntimeError(f"Could not draw a frequency point outside the semitiles of {tiles}")


def refined_point(grid: GridSpec, N: t.Sequence[int]) -> t.Tuple[int, ...]:
    """The lattice index of the same frequency on grid.refined()."""
    return tuple(int(v) << a for v, a in zip(N, grid.alpha))


def interaction_profile(p: Tile, q: Tile, grid: GridSpec, nu: float) -> float:
    """
    (|I_Q| / |I_P|)^{1/2} (1 + 2^{-k_P} rho_per(c(I_P) - c(I_Q)))^{-nu} for k_P >= k_Q,
    with the distance taken on the torus of the window.
    """
    alpha = grid.alpha
    gap = np.abs(cube_center(p.interval, alpha) - cube_center(q.interval, alpha))
    gap = np.minimum(gap, grid.lengths - gap)
    rho = float(aniso_norm(gap, alpha))
    ratio = interval_volume(q, alpha) / interval_volume(p, alpha)
    return math.sqrt(ratio) * (1.0 + math.ldexp(rho, -p.k)) ** (-nu)


def relative_change(before: float, after: float) -> float:
    if before == 0:
        return 0.0 if after == 0 else math.inf
    return abs(after / before - 1.0)


def _largest(frame: pd.DataFrame, column: str) -> float:
    values = frame[column].dropna() if column in frame.columns else pd.Series(dtype=float)
    return float(values.max()) if len(values) else 0.0


def _completed(frame: pd.DataFrame) -> pd.DataFrame:
    return frame[frame["error"].isna()]


def _orthogonality_case(spec: SuiteSpec, tolerances, case: int):
    random_state = _case_state(spec, ORTHOGONALITY, case)
    p, q = random_tile(spec, random_state), random_tile(spec, random_state)
    if q.k > p.k:
        p, q = q, p
    grid, bump = spec.grid, spec.bump
    nu = spec.alpha.total + 1
    a, b = WavePacket(p, grid, bump), WavePacket(q, grid, bump)
    inner = abs(packet_inner(a, b))
    disjoint = any(
        np.intersect1d(sa, sb).size == 0 for sa, sb in zip(a.support, b.support)
    )
    inputs = (spec.to_record(), ORTHOGONALITY, p, q)
    if disjoint:
        # both packets have unit norm
        return case_record(
            case, inputs, inner, 1.0, tolerances["zero"], disjoint=True, k_p=p.k, k_q=q.k
        )
    fine = grid.refined()
    inner_fine = abs(packet_inner(WavePacket(p, fine, bump), WavePacket(q, fine, bump)))
    ratio_fine = inner_fine / interaction_profile(p, q, fine, nu)

    m = suite_multiplier(spec)
    N = random_point_outside(grid, [p, q], random_state)
    profile = interaction_profile(p, q, grid, nu)
    norm = multiplier_norm(m, nu, spec.sphere_samples)
    psi_ratio = abs(psi_inner(a, b, N, m)) / (norm ** 2 * profile) if norm > 0 else 0.0
    return case_record(
        case,
        inputs,
        inner,
        profile,
        disjoint=False,
        k_p=p.k,
        k_q=q.k,
        ratio_refined=ratio_fine,
        psi_ratio=psi_ratio,
    )


def _orthogonality_summary(spec: SuiteSpec, tolerances, frame: pd.DataFrame):
    done = _completed(frame)
    if "disjoint" in done.columns:
        overlapping = done[~done["disjoint"].astype(bool)]
    else:
        overlapping = done
    constant = _largest(overlapping, "ratio")
    refined = _largest(overlapping, "ratio_refined")
    constants = {
        "almost_orthogonality": constant,
        "almost_orthogonality_refined": refined,
        "psi_interaction": _largest(overlapping, "psi_ratio"),
        "nu": spec.alpha.total + 1,
        "disjoint_cases": int(len(done) - len(overlapping)),
    }
    checks = {
        "refinement": Check(relative_change(constant, refined), tolerances["refinement"])
    }
    return constants, checks


def _decay_case(spec: SuiteSpec, tolerances, case: int):
    random_state = _case_state(spec, DECAY, case)
    p = random_tile(spec, random_state)
    grid, bump = spec.grid, spec.bump
    m = suite_multiplier(spec)
    nu = spec.alpha.total + 1
    N = random_point_outside(grid, [p], random_state)
    norm = multiplier_norm(m, nu, spec.sphere_samples)
    root = math.sqrt(interval_volume(p, spec.alpha))

    def measured(on: GridSpec, point) -> float:
        values = np.abs(psi_P_N(p, point, m, on, bump).to_physical().samples)
        return float(np.max(values / weight_samples(p, nu, on))) / root

    fine = grid.refined()
    inputs = (spec.to_record(), DECAY, p, N)
    refined_ratio = measured(fine, refined_point(grid, N)) / norm if norm > 0 else 0.0
    return case_record(
        case, inputs, measured(grid, N), norm, k=p.k, ratio_refined=refined_ratio
    )


def _decay_summary(spec: SuiteSpec, tolerances, frame: pd.DataFrame):
    done = _completed(frame)
    constant = _largest(done, "ratio")
    refined = _largest(done, "ratio_refined")
    m = suite_multiplier(spec)
    kernel = kernel_decay_constant(m, spec.grid, spec.sphere_samples)
    kernel_refined = kernel_decay_constant(m, spec.grid.refined(), spec.sphere_samples)
    constants = {
        "packet_decay": constant,
        "packet_decay_refined": refined,
        "kernel_decay": kernel,
        "kernel_decay_refined": kernel_refined,
        "nu": spec.alpha.total + 1,
    }
    checks = {
        "refinement": Check(relative_change(constant, refined), tolerances["refinement"]),
        "kernel_refinement": Check(
            relative_change(kernel, kernel_refined), tolerances["refinement"]
        ),
    }
    return constants, checks


def _cone_case(spec: SuiteSpec, tolerances, case: int):
    random_state = _case_state(spec, CONE, case)
    vectors = nonzero_bit_vectors(spec.alpha.n)
    r = vectors[random_state.randint(len(vectors))]
    xi = random_state.standard_normal(spec.alpha.n)
    lam = float(np.exp2(random_state.uniform(-2.0, 2.0)))
    value = theta_r(r, xi, spec.bump, spec.alpha)
    moved = theta_r(r, dilate(xi, lam, spec.alpha), spec.bump, spec.alpha)
    inputs = (spec.to_record(), CONE, r, xi, lam)
    return case_record(
        case,
        inputs,
        abs(moved - value),
        abs(value),
        tolerances["homogeneity"],
        r=list(r),
        scale=lam,
        theta=value,
    )


def _cone_summary(spec: SuiteSpec, tolerances, frame: pd.DataFrame):
    quad = QuadratureSpec()
    positivity = positivity_scan(
        spec.bump, spec.alpha, spec.positivity_samples, spec.seed, quad
    )
    eps0 = positivity.eps0
    covering = covering_scan(
        spec.bump, spec.alpha, eps0, spec.covering_samples, spec.seed, quad
    )
    constants = {
        "eps0": eps0,
        "least_theta": {"".join(map(str, r)): v for r, v in positivity.minimum.items()},
        "covering_margin": covering.margin,
        "homogeneity_residual": _largest(_completed(frame), "ratio"),
    }
    checks = {
        "positivity": Check(-eps0, 0.0, strict=True),
        "covering": Check(covering.violations, 0),
    }
    return constants, checks


def _maximal_case(spec: SuiteSpec, tolerances, case: int):
    random_state = _case_state(spec, MAXIMAL, case)
    grid = spec.grid
    g = GridFunction(grid, random_state.standard_normal(grid.shape))
    x = [int(random_state.randint(size)) for size in grid.shape]
    scale = int(random_state.randint(grid.k0, grid.K))
    J = AnisoCube(scale, [v >> ((scale - grid.k0) * a) for v, a in zip(x, grid.alpha)])
    # every sample of J lies within rho distance 2^scale of x
    count = int(random_state.randint(1, 5))
    exponents = np.sort(random_state.uniform(0.0, grid.K - scale, size=count))
    levels = [
        (math.ldexp(float(np.exp2(e)), scale), float(random_state.uniform(0.1, 1.0)))
        for e in exponents
    ]
    check = maximal_domination_check(g, levels, x, J)
    inputs = (spec.to_record(), MAXIMAL, x, J, levels)
    return case_record(
        case,
        inputs,
        check.convolution,
        check.bound + tolerances["slack"],
        1.0,
        scale=scale,
        levels=count,
    )


def _maximal_summary(spec: SuiteSpec, tolerances, frame: pd.DataFrame):
    return {"largest_ratio": _largest(_completed(frame), "ratio")}, {}


@attr.s(frozen=True)
class Suite:
    name = attr.ib()
    case = attr.ib()
    summary = attr.ib()
    tolerances = attr.ib(converter=frozendict)


SUITES: t.Dict[str, Suite] = {
    suite.name: suite
    for suite in (
        Suite(
            ORTHOGONALITY,
            _orthogonality_case,
            _orthogonality_summary,
            {"zero": 1e-10, "refinement": 0.5},
        ),
        Suite(DECAY, _decay_case, _decay_summary, {"refinement": 0.5}),
        Suite(CONE, _cone_case, _cone_summary, {"homogeneity": 1e-4}),
        Suite(MAXIMAL, _maximal_case, _maximal_summary, {"slack": 1e-10}),
    )
}


def _get_suite(name: str) -> Suite:
    try:
        return SUITES[name]
    except KeyError:
        raise ValueError(f"Unknown suite {name!r}, expected one of {sorted(SUITES)}")


def suite_tolerances(
    name: str, overrides: t.Optional[t.Mapping[str, float]] = None
) -> frozendict:
    """The default tolerances of the suite updated with overrides for names it declares."""
    defaults = _get_suite(name).tolerances
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise ValueError(
            f"Unknown tolerances {sorted(unknown)} for suite {name}, "
            f"expected some of {sorted(defaults)}"
        )
    return frozendict(
        {
            key: Validators.Floats.non_negative(float(overrides.get(key, value)), key)
            for key, value in defaults.items()
        }
    )


def _run_case(name: str, spec: SuiteSpec, tolerances, case: int) -> t.Dict[str, t.Any]:
    try:
        return SUITES[name].case(spec, tolerances, case)
    except Exception as e:
        _logger.warning(f"Case {case} of suite {name} failed: {e}")
        return failed_record(case, (spec.to_record(), name, case), e)


def run_suite(
    name: str,
    spec: t.Optional[SuiteSpec] = None,
    tolerances: t.Optional[t.Mapping[str, float]] = None,
    jobs: t.Optional[int] = 1,
) -> Report:
    """
    Runs every case of the named suite and summarizes them. A case that raises is
    recorded as failed and the suite carries on.
    """
    suite = _get_suite(name)
    spec = spec or SuiteSpec()
    tolerances = suite_tolerances(name, tolerances)
    # configuration errors surface here rather than in every case
    suite_multiplier(spec)
    start = time.perf_counter()
    records = ordered_map(
        functools.partial(_run_case, name, spec, tolerances),
        range(spec.case_count(name)),
        jobs,
    )
    frame = pd.DataFrame.from_records(records)
    constants, checks = suite.summary(spec, tolerances, frame)
    report = Report(
        suite=name,
        cases=frame,
        checks=checks,
        constants=constants,
        tolerances=tolerances,
        parameters=spec.to_record(),
        runtime=time.perf_counter() - start,
    )
    _logger.info(
        f"Suite {name} ran {len(frame)} cases in {report.runtime:.1f}s, "
        f"passed: {report.passed}"
    )
    return report
