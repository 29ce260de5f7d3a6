"""
File formats of the command line.

Scenario files store the grid, the tiles, the semitile bits and the multiplier in plain
JSON, together with the generator record that f, E and N are regenerated from. The arrays
themselves are never written. Certificates store a decomposition as its levels and trees,
with a CSV table of one row per tree.
"""
import json
import logging
import math
import pathlib
import typing as t

import pandas as pd

from tilekit.analysis.decomposition import (
    Bucket,
    DecompositionResult,
    TreeKind,
    TypedTree,
    default_nu0,
    tree_estimate_check,
)
from tilekit.analysis.generators import GeneratorParams, generate_scenario
from tilekit.analysis.mass_energy import MassEvaluator
from tilekit.analysis.scenario import Scenario
from tilekit.geometry.tiles import Tile
from tilekit.geometry.trees import Tree
from tilekit.utilities.hashing import digest
from tilekit.verify.reports import FLOAT_FORMAT

_logger = logging.getLogger(__name__)

SCENARIO_SCHEMA = "tilekit.scenario/1"
CERTIFICATE_SCHEMA = "tilekit.certificate/1"
CERTIFICATE_COLUMNS = (
    "ell",
    "tree",
    "top",
    "volume",
    "kind",
    "mass",
    "energy",
    "lhs",
    "rhs",
)

PathLike = t.Union[str, pathlib.Path]


def _check_schema(record: t.Mapping[str, t.Any], schema: str, what: str):
    if not isinstance(record, t.Mapping) or record.get("schema") != schema:
        found = record.get("schema") if isinstance(record, t.Mapping) else None
        raise ValueError(f"Expected a {what} with schema {schema}, got {found!r}")


def _read_json(path: PathLike, what: str) -> t.Any:
    path = pathlib.Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ValueError(f"The {what} file {path} does not exist")
    except json.JSONDecodeError as e:
        raise ValueError(f"The {what} file {path} is not valid JSON: {e}")


def _float(value: float) -> t.Optional[float]:
    return None if math.isnan(value) else float(value)


def scenario_digest(s: Scenario) -> str:
    return digest(
        (
            list(s.alpha),
            s.grid.K,
            s.grid.k0,
            sorted(s.tiles),
            s.r,
            s.multiplier.to_record(),
            dict(s.generator),
        )
    )


def scenario_to_record(s: Scenario) -> t.Dict[str, t.Any]:
    if not s.generator:
        raise ValueError("Only generated scenarios can be stored, f, E and N are not written")
    return {
        "schema": SCENARIO_SCHEMA,
        "grid": {"alpha": list(s.alpha), "K": s.grid.K, "k0": s.grid.k0},
        "tiles": [p.to_record() for p in s.tiles],
        "r": list(s.r),
        "multiplier": s.multiplier.to_record(),
        "generator": GeneratorParams.from_record(s.generator).to_record(),
        "digest": scenario_digest(s),
    }


def scenario_from_record(record: t.Mapping[str, t.Any]) -> Scenario:
    """
    Regenerates the scenario and checks it against everything the file states about it.
    """
    _check_schema(record, SCENARIO_SCHEMA, "scenario")
    params = GeneratorParams.from_record(record["generator"])
    tiles = [Tile.from_record(p) for p in record["tiles"]]
    s = generate_scenario(params, tiles)
    grid = record["grid"]
    if [list(s.alpha), s.grid.K, s.grid.k0] != [list(grid["alpha"]), grid["K"], grid["k0"]]:
        raise ValueError("The scenario grid does not match its generator")
    if list(s.r) != list(record["r"]):
        raise ValueError("The scenario bits r do not match its generator")
    if s.multiplier.to_record() != record["multiplier"]:
        raise ValueError("The scenario multiplier does not match its generator")
    if "digest" in record and record["digest"] != scenario_digest(s):
        raise ValueError("The scenario digest does not match its contents")
    return s


def write_scenario(s: Scenario, path: PathLike) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(scenario_to_record(s), indent=2))
    _logger.info(f"Wrote scenario with {len(s.tiles)} tiles to {path}")
    return path


def read_scenario(path: PathLike) -> Scenario:
    return scenario_from_record(_read_json(path, "scenario"))


def certificate_rows(
    result: DecompositionResult, s: Scenario, nu0: t.Optional[int] = None
) -> pd.DataFrame:
    """One row per tree with its level, top, |I_T|, kind and the tree estimate terms."""
    evaluator = MassEvaluator(s)
    nu0 = default_nu0(s.alpha) if nu0 is None else nu0
    rows = []
    for tree_id, (ell, typed) in enumerate(result.trees()):
        estimate = tree_estimate_check(typed.tree, s, nu0, evaluator)
        rows.append(
            {
                "ell": ell,
                "tree": tree_id,
                "top": json.dumps(typed.tree.top.to_record()),
                "volume": typed.tree.interval_volume,
                "kind": typed.kind.value,
                "mass": estimate.mass,
                "energy": estimate.energy,
                "lhs": estimate.lhs,
                "rhs": estimate.rhs,
            }
        )
    return pd.DataFrame.from_records(rows, columns=list(CERTIFICATE_COLUMNS))


def certificate_to_record(result: DecompositionResult, s: Scenario) -> t.Dict[str, t.Any]:
    buckets = []
    tree_id = 0
    for ell in sorted(result.buckets, reverse=True):
        bucket = result.buckets[ell]
        trees = []
        for typed in bucket.trees:
            trees.append(
                {
                    "id": tree_id,
                    "kind": typed.kind.value,
                    "top": typed.tree.top.to_record(),
                    "tiles": [p.to_record() for p in typed.tree.sorted_tiles()],
                }
            )
            tree_id += 1
        buckets.append(
            {
                "ell": ell,
                "stock_mass": _float(bucket.stock_mass),
                "stock_energy": _float(bucket.stock_energy),
                "mass_product": _float(bucket.mass_product),
                "energy_product": _float(bucket.energy_product),
                "covering_holds": bool(bucket.covering_holds),
                "trees": trees,
            }
        )
    return {
        "schema": CERTIFICATE_SCHEMA,
        "scenario": scenario_digest(s),
        "initial_ell": result.initial_ell,
        "floor": result.floor,
        "buckets": buckets,
        "residue": [p.to_record() for p in result.residue],
    }


def certificate_from_record(
    record: t.Mapping[str, t.Any], s: Scenario
) -> DecompositionResult:
    _check_schema(record, CERTIFICATE_SCHEMA, "certificate")
    if record["scenario"] != scenario_digest(s):
        raise ValueError("The certificate was written for another scenario")
    buckets = {}
    for entry in record["buckets"]:
        trees = [
            TypedTree(
                Tree(
                    Tile.from_record(tree["top"]),
                    [Tile.from_record(p) for p in tree["tiles"]],
                    s.alpha,
                ),
                TreeKind(tree["kind"]),
            )
            for tree in entry["trees"]
        ]
        buckets[entry["ell"]] = Bucket(
            entry["ell"],
            trees,
            entry["stock_mass"],
            entry["stock_energy"],
            entry["mass_product"],
            entry["energy_product"],
            entry["covering_holds"],
        )
    return DecompositionResult(
        buckets,
        [Tile.from_record(p) for p in record["residue"]],
        record["initial_ell"],
        record["floor"],
    )


def write_certificate(
    result: DecompositionResult,
    s: Scenario,
    directory: PathLike,
    nu0: t.Optional[int] = None,
) -> t.Tuple[pathlib.Path, pathlib.Path]:
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / "certificate.json"
    csv_path = directory / "certificate.csv"
    json_path.write_text(json.dumps(certificate_to_record(result, s), indent=2))
    certificate_rows(result, s, nu0).to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
    _logger.info(f"Wrote certificate to {json_path} and {csv_path}")
    return json_path, csv_path


def read_certificate(path: PathLike, s: Scenario) -> DecompositionResult:
    return certificate_from_record(_read_json(path, "certificate"), s)
