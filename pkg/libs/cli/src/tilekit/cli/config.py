"""
The run configuration of the command line. Values come from three layers, each
overriding the one before: the defaults below, a JSON config file and the flags.
"""
import json
import pathlib
import typing as t

import attr
from frozendict import frozendict

from tilekit.analysis.generators import GeneratorParams
from tilekit.fourier.catalogue import build_multiplier
from tilekit.utilities.freezing import freeze_recursively, unfreeze_recursively
from tilekit.utilities.parallel import resolve_jobs
from tilekit.utilities.validators import Validators
from tilekit.verify.experiments import (
    LEMMAS,
    RESCALED_TOLERANCES,
    SLOPE_TOLERANCES,
    ExperimentSpec,
)
from tilekit.verify.suites import SUITES, SuiteSpec

COMMANDS = ("gen", "decompose", "verify", "experiment", "theta", "show-config")
WEAK_TYPE, RESCALED_NORM = "weak-type", "rescaled-norm"
EXPERIMENTS = LEMMAS + (WEAK_TYPE, RESCALED_NORM)

DEFAULT_TOY = frozendict({"d": 2, "delta": 0.1})


def known_tolerances() -> t.FrozenSet[str]:
    names = set(SLOPE_TOLERANCES) | set(RESCALED_TOLERANCES)
    for suite in SUITES.values():
        names.update(suite.tolerances)
    return frozenset(names)


def _names(allowed: t.Sequence[str], name: str):
    def convert(value) -> t.Tuple[str, ...]:
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        names = tuple(dict.fromkeys(str(v).strip() for v in value))
        if not names:
            raise ValueError(f"Parameter {name} must not be empty")
        unknown = [v for v in names if v not in allowed]
        if unknown:
            raise ValueError(f"Unknown {name} {unknown}, expected some of {list(allowed)}")
        return names

    return convert


def _tolerances(value) -> frozendict:
    value = dict(value or {})
    unknown = set(value) - known_tolerances()
    if unknown:
        raise ValueError(
            f"Unknown tolerances {sorted(unknown)}, expected some of {sorted(known_tolerances())}"
        )
    return frozendict(
        {k: Validators.Floats.non_negative(float(v), k) for k, v in sorted(value.items())}
    )


def _generator(value) -> GeneratorParams:
    if isinstance(value, GeneratorParams):
        return value
    return GeneratorParams.from_record(dict(value))


def _optional_path(value) -> t.Optional[str]:
    return None if value is None else str(value)


def _optional_point(value) -> t.Optional[t.Tuple[float, ...]]:
    if value is None:
        return None
    return tuple(Validators.Floats.check_type(float(v), "point") for v in value)


@attr.s(frozen=True)
class RunConfig:
    """
    generator describes the scenarios of gen and decompose as well as the grid, bump and
    multiplier of the suites and experiments. scenario and certificate name input files,
    out the directory everything is written to.
    """

    command = attr.ib(default="show-config", validator=attr.validators.in_(COMMANDS))
    generator = attr.ib(factory=GeneratorParams, converter=_generator)
    scenario = attr.ib(default=None, converter=_optional_path)
    certificate = attr.ib(default=None, converter=_optional_path)
    out = attr.ib(default="tilekit-out", converter=str)
    suites = attr.ib(default=tuple(SUITES), converter=_names(tuple(SUITES), "suites"))
    cases = attr.ib(default=None)
    experiments = attr.ib(default=LEMMAS, converter=_names(EXPERIMENTS, "experiments"))
    sizes = attr.ib(default=(25, 50, 100, 200), converter=freeze_recursively)
    seeds = attr.ib(default=20)
    grids = attr.ib(default=((3, -2), (4, -2)), converter=freeze_recursively)
    nu0 = attr.ib(default=None)
    exploratory = attr.ib(default=False, converter=bool)
    j_min = attr.ib(
        default=-6, converter=lambda v: Validators.Integers.non_positive(v, "j_min")
    )
    tolerances = attr.ib(factory=frozendict, converter=_tolerances)
    point = attr.ib(default=None, converter=_optional_point)
    jobs = attr.ib(default=None)

    def __attrs_post_init__(self):
        g = self.generator
        if not g.nu1 > g.alpha.total + 1:
            raise ValueError(
                f"Parameter nu1 must be greater than |alpha| + 1 = {g.alpha.total + 1}"
            )
        build_multiplier(g.multiplier, g.alpha, g.multiplier_params)
        if self.jobs is not None:
            Validators.Integers.greater_than_zero(self.jobs, "jobs")
        if self.point is not None and len(self.point) != g.alpha.n:
            raise ValueError(f"Parameter point must have {g.alpha.n} components")
        # the batch specs validate the remaining fields
        self.suite_spec()
        self.experiment_spec()

    def suite_spec(self) -> SuiteSpec:
        g = self.generator
        return SuiteSpec(
            alpha=g.alpha,
            K=g.K,
            k0=g.k0,
            k_min=g.k_min,
            k_max=g.k_max,
            cases=self.cases,
            seed=g.seed,
            b0=g.b0,
            b1=g.b1,
            multiplier=g.multiplier,
            multiplier_params=g.multiplier_params,
        )

    def experiment_spec(self) -> ExperimentSpec:
        return ExperimentSpec(
            generator=self.generator,
            sizes=self.sizes,
            seeds=self.seeds,
            grids=self.grids,
            nu0=self.nu0,
            exploratory=self.exploratory,
        )

    def toy_parameters(self) -> t.Tuple[int, float]:
        """(d, delta) of the rescaled norm experiment, taken from a toy multiplier if set."""
        params = dict(DEFAULT_TOY)
        if self.generator.multiplier == "toy":
            params.update(self.generator.multiplier_params)
        return params["d"], params["delta"]

    def tolerances_for(self, defaults: t.Mapping[str, float]) -> t.Dict[str, float]:
        return {k: v for k, v in self.tolerances.items() if k in defaults}

    @property
    def resolved_jobs(self) -> int:
        return resolve_jobs(self.jobs)

    def to_record(self) -> t.Dict[str, t.Any]:
        record = attr.asdict(self, recurse=False)
        record["generator"] = self.generator.to_record()
        for key in ("suites", "experiments", "sizes", "grids", "point"):
            record[key] = unfreeze_recursively(record[key])
        record["tolerances"] = dict(self.tolerances)
        return record


def merge_records(*layers: t.Mapping[str, t.Any]) -> t.Dict[str, t.Any]:
    """Later layers win; nested mappings are merged key by key."""
    merged: t.Dict[str, t.Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if isinstance(value, t.Mapping) and isinstance(merged.get(key), t.Mapping):
                merged[key] = merge_records(merged[key], value)
            elif isinstance(value, t.Mapping):
                merged[key] = merge_records(value)
            else:
                merged[key] = value
    return merged


def read_config_file(path: t.Union[str, pathlib.Path]) -> t.Dict[str, t.Any]:
    path = pathlib.Path(path)
    try:
        record = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValueError(f"Config file {path} does not exist")
    except json.JSONDecodeError as e:
        raise ValueError(f"Config file {path} is not valid JSON: {e}")
    if not isinstance(record, dict):
        raise ValueError(f"Config file {path} must hold a JSON object")
    if "command" in record:
        raise ValueError("The command is chosen on the command line, not in the config file")
    return record


def load_config(
    command: str,
    config_file: t.Optional[t.Union[str, pathlib.Path]] = None,
    overrides: t.Optional[t.Mapping[str, t.Any]] = None,
) -> RunConfig:
    layers = [read_config_file(config_file)] if config_file is not None else []
    record = merge_records(*layers, overrides or {}, {"command": command})
    fields = {f.name for f in attr.fields(RunConfig)}
    unknown = set(record) - fields
    if unknown:
        raise ValueError(f"Unknown configuration keys {sorted(unknown)}")
    return RunConfig(**record)
