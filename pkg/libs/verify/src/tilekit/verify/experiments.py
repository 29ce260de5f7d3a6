"""
Experiments track the constants of the estimates over growing batches. The estimates
only claim constants independent of the batch, so an experiment passes when the log-log
slope of the largest observed value against the batch size stays below a tolerance.
"""
import functools
import logging
import time
import typing as t

import attr
import numpy as np
import pandas as pd
from frozendict import frozendict

from tilekit.analysis.decomposition import (
    default_nu0,
    energy_split,
    global_sum_check,
    main_decompose,
    mass_split,
    tree_estimate_check,
    verify_decomposition,
)
from tilekit.analysis.generators import GeneratorParams, generate_scenario
from tilekit.analysis.mass_energy import MassEvaluator, energy
from tilekit.analysis.operators import carleson_sup, weak_l2_norm
from tilekit.fourier.grid import GridSpec, OutOfWindowError, ResolutionError
from tilekit.fourier.norms import MINIMUM_SPHERE_SAMPLES, multiplier_norm
from tilekit.fourier.toy import ToyMultiplierParams, ToyVariant, summability, toy_multiplier
from tilekit.geometry.anisotropy import AnisoExponent
from tilekit.geometry.tiles import Tile
from tilekit.utilities.parallel import ordered_map
from tilekit.utilities.validators import Validators
from tilekit.verify.reports import Check, Report, case_record, failed_record

_logger = logging.getLogger(__name__)

MASS, ENERGY, TREE, GLOBAL = "mass", "energy", "tree", "global"
LEMMAS = (MASS, ENERGY, TREE, GLOBAL)

SLOPE_TOLERANCES = frozendict({"slope": 0.1})
RESCALED_TOLERANCES = frozendict({"relative": 0.1, "control": 0.05})


def _sizes(value) -> t.Tuple[int, ...]:
    sizes = tuple(Validators.Integers.greater_than_zero(v, "sizes") for v in value)
    if not sizes:
        raise ValueError("Parameter sizes must not be empty")
    return tuple(sorted(set(sizes)))


def _grids(value) -> t.Tuple[t.Tuple[int, int], ...]:
    grids = tuple((int(K), int(k0)) for K, k0 in value)
    if not grids:
        raise ValueError("Parameter grids must not be empty")
    return grids


@attr.s(frozen=True)
class ExperimentSpec:
    """
    Scenarios are drawn from generator with tile_count set to each size and seeds
    generator.seed, ..., generator.seed + seeds - 1. grids holds the (K, k0) pairs of
    the weak type experiment.
    """

    generator = attr.ib(
        factory=GeneratorParams, validator=attr.validators.instance_of(GeneratorParams)
    )
    sizes = attr.ib(default=(25, 50, 100, 200), converter=_sizes)
    seeds = attr.ib(
        default=20, converter=lambda v: Validators.Integers.greater_than_zero(v, "seeds")
    )
    grids = attr.ib(default=((3, -2), (4, -2)), converter=_grids)
    nu0 = attr.ib(default=None)
    exploratory = attr.ib(default=False, converter=bool)

    @nu0.validator
    def _check_nu0(self, attribute, value):
        if value is None:
            return
        Validators.Integers.check_type(value, "nu0")
        alpha = self.generator.alpha
        least = alpha.total + 1 if self.exploratory else default_nu0(alpha)
        if value < least:
            raise ValueError(
                f"Parameter nu0 must be at least {least}"
                + ("" if self.exploratory else ", or set exploratory for smaller values")
            )

    @property
    def resolved_nu0(self) -> int:
        return default_nu0(self.generator.alpha) if self.nu0 is None else self.nu0

    @property
    def data_only(self) -> bool:
        """Below the proven smoothness the numbers are reported without a verdict."""
        return self.resolved_nu0 < default_nu0(self.generator.alpha)

    def to_record(self) -> t.Dict[str, t.Any]:
        return {
            "generator": self.generator.to_record(),
            "sizes": list(self.sizes),
            "seeds": self.seeds,
            "grids": [list(g) for g in self.grids],
            "nu0": self.resolved_nu0,
            "exploratory": self.exploratory,
        }


def fit_slope(sizes: t.Sequence[float], values: t.Sequence[float]) -> float:
    """
    Least squares slope of log(value) against log(size) over the positive values; 0 when
    fewer than two sizes have one.
    """
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    positive = values > 0
    if np.count_nonzero(positive) < 2 or len(set(sizes[positive])) < 2:
        return 0.0
    return float(np.polyfit(np.log(sizes[positive]), np.log(values[positive]), 1)[0])


def _slope_check(frame: pd.DataFrame, by: str, tolerances) -> t.Tuple[t.Dict, Check]:
    """The largest ratio per value of the column by, and the slope check over them."""
    done = frame[frame["error"].isna()]
    if len(done):
        largest = done.groupby(by)["ratio"].max().sort_index()
    else:
        largest = pd.Series(dtype=float)
    slope = fit_slope(largest.index.to_numpy(), largest.to_numpy())
    return {str(int(k)): float(v) for k, v in largest.items()}, Check(slope, tolerances["slope"])


def _tolerances(defaults, overrides) -> frozendict:
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise ValueError(
            f"Unknown tolerances {sorted(unknown)}, expected some of {sorted(defaults)}"
        )
    return frozendict(
        {
            key: Validators.Floats.non_negative(float(overrides.get(key, value)), key)
            for key, value in defaults.items()
        }
    )


def _constant_case(lemma: str, spec: ExperimentSpec, item) -> t.Dict[str, t.Any]:
    case, size, seed = item
    params = attr.evolve(spec.generator, tile_count=size, seed=seed)
    inputs = (lemma, params.to_record(), spec.resolved_nu0)
    try:
        s = generate_scenario(params)
        if lemma == MASS:
            evaluator = MassEvaluator(s)
            split = mass_split(s.tiles, s, evaluator)
            verified = evaluator.collection(split.light).value <= split.mu / 4
            value = split.product
            extra = {"mu": split.mu, "trees": len(split.trees)}
        elif lemma == ENERGY:
            split = energy_split(s.tiles, s)
            verified = energy(split.low, s).value <= split.epsilon / 2
            value = split.product
            extra = {"epsilon": split.epsilon, "trees": len(split.trees)}
        elif lemma == TREE:
            result = main_decompose(s)
            verified = not verify_decomposition(result, s)
            evaluator = MassEvaluator(s)
            ratios = [
                tree_estimate_check(typed.tree, s, spec.resolved_nu0, evaluator).ratio
                for _, typed in result.trees()
            ]
            value, extra = max(ratios, default=0.0), {"trees": len(ratios)}
        else:
            check = global_sum_check(s, spec.resolved_nu0)
            verified = True
            value = check.normalized_total
            extra = {"bound_ratio": check.ratio, "dilation": check.dilation}
    except Exception as e:
        _logger.warning(f"Case {case} of the {lemma} experiment failed: {e}")
        return dict(failed_record(case, inputs, e), size=size, seed=seed)
    return case_record(
        case, inputs, value, 1.0, size=size, seed=seed, verified=verified, **extra
    )


def constants_experiment(
    lemma: str,
    spec: t.Optional[ExperimentSpec] = None,
    tolerances: t.Optional[t.Mapping[str, float]] = None,
    jobs: t.Optional[int] = 1,
) -> Report:
    """
    The largest value per tile count of
      mass:   mu sum |I_T| over the trees of a mass split,
      energy: epsilon^2 sum |I_T| over the trees of an energy split,
      tree:   the tree estimate ratio over the trees of the decomposition,
      global: the decomposed model sum over ||m|| of the normalized scenario.
    Every case also re-verifies the guarantee of the step it ran.
    """
    if lemma not in LEMMAS:
        raise ValueError(f"Unknown lemma {lemma!r}, expected one of {list(LEMMAS)}")
    spec = spec or ExperimentSpec()
    tolerances = _tolerances(SLOPE_TOLERANCES, tolerances)
    items = [
        (case, size, spec.generator.seed + offset)
        for case, (size, offset) in enumerate(
            (size, offset) for size in spec.sizes for offset in range(spec.seeds)
        )
    ]
    start = time.perf_counter()
    frame = pd.DataFrame.from_records(
        ordered_map(functools.partial(_constant_case, lemma, spec), items, jobs)
    )
    largest, slope = _slope_check(frame, "size", tolerances)
    if "verified" in frame.columns:
        unverified = int((~frame["verified"].fillna(False).astype(bool)).sum())
    else:
        unverified = len(frame)
    report = Report(
        suite=f"constants-{lemma}",
        cases=frame,
        checks={"slope": slope, "verified": Check(unverified, 0)},
        constants={"largest_by_size": largest, "slope": slope.value},
        tolerances=tolerances,
        parameters=spec.to_record(),
        data_only=spec.data_only and lemma in (TREE, GLOBAL),
        runtime=time.perf_counter() - start,
    )
    _logger.info(f"The {lemma} experiment has slope {slope.value}, passed: {report.passed}")
    return report


def _scales_on(grid: GridSpec, params: GeneratorParams) -> t.Tuple[int, int]:
    """The part of [k_min, k_max] whose tiles are admissible on the grid."""
    admissible = []
    for k in range(params.k_min, params.k_max + 1):
        try:
            grid.check_tile(Tile(k, (0,) * grid.n, (0,) * grid.n), params.b0)
        except (ResolutionError, OutOfWindowError):
            continue
        admissible.append(k)
    if not admissible:
        raise ValueError(f"No tile scale in [{params.k_min}, {params.k_max}] fits {grid}")
    return min(admissible), max(admissible)


def _weak_type_case(spec: ExperimentSpec, item) -> t.Dict[str, t.Any]:
    case, (K, k0), size, seed = item
    base = spec.generator
    inputs = ("weak-type", base.to_record(), K, k0, size, seed, spec.resolved_nu0)
    try:
        grid = GridSpec(base.alpha, K, k0)
        k_min, k_max = _scales_on(grid, base)
        params = attr.evolve(
            base,
            K=K,
            k0=k0,
            k_min=k_min,
            k_max=k_max,
            block_scale=k_min,
            tile_count=size,
            seed=seed,
        )
        s = generate_scenario(params)
        norm = multiplier_norm(s.multiplier, spec.resolved_nu0)
        measured = weak_l2_norm(carleson_sup(s)) if s.tiles else 0.0
    except Exception as e:
        _logger.warning(f"Case {case} of the weak type experiment failed: {e}")
        return dict(failed_record(case, inputs, e), grid_size=0, size=size, seed=seed)
    return case_record(
        case,
        inputs,
        measured,
        norm * s.f.norm(),
        grid_size=grid.size,
        size=size,
        seed=seed,
        K=K,
        k0=k0,
    )


def weak_type_experiment(
    spec: t.Optional[ExperimentSpec] = None,
    tolerances: t.Optional[t.Mapping[str, float]] = None,
    jobs: t.Optional[int] = 1,
) -> Report:
    """
    ||sup_N |A_N f| ||_{2,inf} / (||m||_{M^nu0} ||f||_2) over seeded scenarios on each
    grid and tile count; the slopes against the grid size and the tile count are checked
    separately.
    """
    spec = spec or ExperimentSpec()
    tolerances = _tolerances(SLOPE_TOLERANCES, tolerances)
    items = []
    for grid in spec.grids:
        for size in spec.sizes:
            for offset in range(spec.seeds):
                items.append((len(items), grid, size, spec.generator.seed + offset))
    start = time.perf_counter()
    frame = pd.DataFrame.from_records(
        ordered_map(functools.partial(_weak_type_case, spec), items, jobs)
    )
    by_grid, grid_slope = _slope_check(frame, "grid_size", tolerances)
    by_size, size_slope = _slope_check(frame, "size", tolerances)
    report = Report(
        suite="weak-type",
        cases=frame,
        checks={"grid_slope": grid_slope, "tile_slope": size_slope},
        constants={
            "largest_by_grid_size": by_grid,
            "largest_by_tile_count": by_size,
            "nu0": spec.resolved_nu0,
        },
        tolerances=tolerances,
        parameters=spec.to_record(),
        data_only=spec.data_only,
        runtime=time.perf_counter() - start,
    )
    _logger.info(f"Weak type experiment finished, passed: {report.passed}")
    return report


def _rescaled_norm(d: int, delta: float, sphere_samples: int, item) -> float:
    j, nu = item
    m = toy_multiplier(ToyMultiplierParams(d, delta, j), ToyVariant.RESCALED)
    return multiplier_norm(m, nu, sphere_samples)


def rescaled_norm_experiment(
    d: int,
    delta: float,
    j_range: t.Sequence[int] = tuple(range(0, -7, -1)),
    nus: t.Sequence[int] = (0, 1, 2),
    nu0: t.Optional[int] = None,
    tolerances: t.Optional[t.Mapping[str, float]] = None,
    sphere_samples: int = MINIMUM_SPHERE_SAMPLES,
    jobs: t.Optional[int] = 1,
) -> Report:
    """
    Fits log2 ||m~_{d,delta,j}||_{M^nu} against -j for each nu and compares the slope with
    d' delta nu. Also reports the summability of the pieces against the M^{nu0} growth
    and the threshold delta_0 = 1 / (2 nu0).
    """
    base = ToyMultiplierParams(d, delta)
    js = sorted({Validators.Integers.non_positive(j, "j") for j in j_range}, reverse=True)
    if len(js) < 2:
        raise ValueError("Parameter j_range must hold at least two scales")
    nus = tuple(Validators.Integers.non_negative(nu, "nu") for nu in nus)
    nu0 = default_nu0(AnisoExponent(base.alpha)) if nu0 is None else nu0
    tolerances = _tolerances(RESCALED_TOLERANCES, tolerances)
    items = [(j, nu) for nu in nus for j in js]
    start = time.perf_counter()
    norms = ordered_map(
        functools.partial(_rescaled_norm, d, delta, sphere_samples), items, jobs
    )
    records = [
        case_record(case, ("rescaled", d, delta, j, nu), norm, 1.0, j=j, nu=nu)
        for case, ((j, nu), norm) in enumerate(zip(items, norms))
    ]
    frame = pd.DataFrame.from_records(records)
    exponents, expected, checks = {}, {}, {}
    for nu in nus:
        rows = frame[frame["nu"] == nu]
        scales = -rows["j"].to_numpy(float)
        slope = float(np.polyfit(scales, np.log2(rows["measured"].to_numpy()), 1)[0])
        target = base.d_prime * delta * nu
        exponents[str(nu)], expected[str(nu)] = slope, target
        if target > 0:
            checks[f"exponent_nu{nu}"] = Check(
                abs(slope - target), tolerances["relative"] * target
            )
        else:
            checks[f"exponent_nu{nu}"] = Check(abs(slope), tolerances["control"])
    series = summability(base, nu0)
    report = Report(
        suite="rescaled-norm",
        cases=frame,
        checks=checks,
        constants={
            "exponents": exponents,
            "expected": expected,
            "nu0": nu0,
            "delta_threshold": series.delta_threshold,
            "summability_exponent": series.exponent,
            "partial_sum": series.partial_sum,
            "summable": series.summable,
        },
        tolerances=tolerances,
        parameters={"d": d, "delta": delta, "j_range": js, "nus": list(nus)},
        runtime=time.perf_counter() - start,
    )
    _logger.info(f"Rescaled norm exponents {exponents} against {expected}")
    return report
