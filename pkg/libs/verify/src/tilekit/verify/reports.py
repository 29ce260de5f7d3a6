"""
Reports hold one row per verified case and a handful of named checks on fitted
constants. Whether a report passes is re-derivable from what it stores: a case passes
when it raised nothing and its ratio is at most its limit, a check when its value is at
most its limit.
"""
import json
import logging
import math
import pathlib
import typing as t

import attr
import numpy as np
import pandas as pd
from frozendict import frozendict

from tilekit.utilities.freezing import freeze_recursively, unfreeze_recursively
from tilekit.utilities.hashing import digest

REPORT_SCHEMA = "tilekit.report/1"
CASE_COLUMNS = ("case", "digest", "measured", "bound", "ratio", "limit", "error")
FLOAT_FORMAT = "%.16e"

_logger = logging.getLogger(__name__)


def safe_ratio(measured: float, bound: float) -> float:
    """measured / bound with 0 / 0 = 0 and x / 0 = inf for x > 0."""
    if bound == 0:
        return 0.0 if measured == 0 else math.inf
    return measured / bound


def case_record(
    case: int,
    inputs: t.Any,
    measured: float,
    bound: float,
    limit: float = math.inf,
    **extra,
) -> t.Dict[str, t.Any]:
    return {
        "case": case,
        "digest": digest(inputs),
        "measured": float(measured),
        "bound": float(bound),
        "ratio": safe_ratio(float(measured), float(bound)),
        "limit": float(limit),
        "error": None,
        **{key: _plain(value) for key, value in extra.items()},
    }


def failed_record(case: int, inputs: t.Any, error: BaseException) -> t.Dict[str, t.Any]:
    return {
        "case": case,
        "digest": digest(inputs),
        "measured": math.nan,
        "bound": math.nan,
        "ratio": math.nan,
        "limit": math.nan,
        "error": f"{type(error).__name__}: {error}",
    }


@attr.s(frozen=True)
class Check:
    """value <= limit, or value < limit when strict."""

    value = attr.ib(converter=float)
    limit = attr.ib(converter=float)
    strict = attr.ib(default=False, converter=bool)

    @property
    def holds(self) -> bool:
        # nan never holds
        if self.strict:
            return bool(self.value < self.limit)
        return bool(self.value <= self.limit)


def _to_checks(value) -> frozendict:
    return frozendict(
        (name, check if isinstance(check, Check) else Check(**check))
        for name, check in dict(value).items()
    )


def _to_cases(value) -> pd.DataFrame:
    if isinstance(value, pd.DataFrame):
        frame = value.copy()
    else:
        frame = pd.DataFrame.from_records(list(value))
    for column in CASE_COLUMNS:
        if column not in frame.columns:
            frame[column] = pd.Series(dtype=object if column == "error" else float)
    for column in ("measured", "bound", "ratio", "limit"):
        frame[column] = pd.to_numeric(frame[column]).astype(float)
    extra = [c for c in frame.columns if c not in CASE_COLUMNS]
    return frame[list(CASE_COLUMNS) + extra].reset_index(drop=True)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    return value


@attr.s(frozen=True, eq=False)
class Report:
    """
    The outcome of a suite or experiment. The runtime is informative only and is left out
    of the digest and of equality.
    """

    suite = attr.ib(validator=attr.validators.instance_of(str))
    cases = attr.ib(converter=_to_cases, repr=False)
    checks = attr.ib(factory=frozendict, converter=_to_checks)
    constants = attr.ib(factory=frozendict, converter=freeze_recursively)
    tolerances = attr.ib(factory=frozendict, converter=freeze_recursively)
    parameters = attr.ib(factory=frozendict, converter=freeze_recursively)
    data_only = attr.ib(default=False, converter=bool)
    runtime = attr.ib(default=0.0, converter=float)

    def case_passed(self) -> pd.Series:
        errors = self.cases["error"].isna()
        return errors & (self.cases["ratio"] <= self.cases["limit"])

    @property
    def failures(self) -> t.List[str]:
        out = [
            f"case {case}" for case in self.cases.loc[~self.case_passed(), "case"].tolist()
        ]
        out.extend(f"check {name}" for name, check in self.checks.items() if not check.holds)
        return out

    @property
    def passed(self) -> t.Optional[bool]:
        """None for data only reports, which make no claim."""
        if self.data_only:
            return None
        return not self.failures

    def to_record(self, with_runtime: bool = True) -> t.Dict[str, t.Any]:
        record = {
            "schema": REPORT_SCHEMA,
            "suite": self.suite,
            "passed": self.passed,
            "data_only": self.data_only,
            "tolerances": unfreeze_recursively(self.tolerances),
            "parameters": unfreeze_recursively(self.parameters),
            "constants": unfreeze_recursively(self.constants),
            "checks": {name: attr.asdict(check) for name, check in self.checks.items()},
            "cases": [
                {key: _json_value(value) for key, value in row.items()}
                for row in self.cases.to_dict(orient="records")
            ],
        }
        if with_runtime:
            record["runtime"] = self.runtime
        return record

    @classmethod
    def from_record(cls, record: t.Mapping[str, t.Any]) -> "Report":
        if record.get("schema") != REPORT_SCHEMA:
            raise ValueError(
                f"Expected a report with schema {REPORT_SCHEMA}, got {record.get('schema')!r}"
            )
        return cls(
            suite=record["suite"],
            cases=record["cases"],
            checks=record["checks"],
            constants=record["constants"],
            tolerances=record["tolerances"],
            parameters=record["parameters"],
            data_only=record["data_only"],
            runtime=record.get("runtime", 0.0),
        )

    def digest(self) -> str:
        return digest(self.to_record(with_runtime=False))

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2)

    def to_csv(self) -> str:
        return self.cases.to_csv(index=False, float_format=FLOAT_FORMAT)

    def write(
        self, directory: t.Union[str, pathlib.Path]
    ) -> t.Tuple[pathlib.Path, pathlib.Path]:
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        json_path = directory / f"{self.suite}.json"
        csv_path = directory / f"{self.suite}.csv"
        json_path.write_text(self.to_json())
        csv_path.write_text(self.to_csv())
        _logger.info(f"Wrote report {self.suite} to {json_path} and {csv_path}")
        return json_path, csv_path


def _json_value(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def read_report(path: t.Union[str, pathlib.Path]) -> Report:
    return Report.from_record(json.loads(pathlib.Path(path).read_text()))
