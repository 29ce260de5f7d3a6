"""
The tilekit command line.

    tilekit gen          write a generated scenario file
    tilekit decompose    decompose a scenario and write its certificate
    tilekit verify       run verification suites, or re-check a certificate
    tilekit experiment   run constant tracking experiments
    tilekit theta        evaluate the cone function or scan its positivity
    tilekit show-config  print the effective configuration

Exit codes: 0 when everything passed, 1 when a suite, experiment or check failed and 2
for usage and configuration errors.
"""
import argparse
import json
import logging
import pathlib
import sys
import typing as t

from tilekit.analysis.decomposition import (
    DecompositionError,
    main_decompose,
    verify_decomposition,
)
from tilekit.analysis.generators import generate_scenario
from tilekit.analysis.scenario import Scenario
from tilekit.cli.config import RESCALED_NORM, WEAK_TYPE, RunConfig, load_config
from tilekit.cli.io import read_certificate, read_scenario, write_certificate, write_scenario
from tilekit.fourier.cones import covering_scan, nonzero_bit_vectors, positivity_scan, theta_r
from tilekit.verify.experiments import (
    RESCALED_TOLERANCES,
    SLOPE_TOLERANCES,
    constants_experiment,
    rescaled_norm_experiment,
    weak_type_experiment,
)
from tilekit.verify.reports import Report
from tilekit.verify.suites import run_suite, suite_tolerances

_logger = logging.getLogger(__name__)

EXIT_PASSED, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    """A command line that names something unknown or cannot be parsed."""


def _integers(text: str) -> t.List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated ints, got {text!r}")


def _floats(text: str) -> t.List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _grids(text: str) -> t.List[t.List[int]]:
    """K:k0 pairs, comma separated."""
    try:
        return [[int(v) for v in pair.split(":")] for pair in text.split(",") if pair]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K:k0 pairs, got {text!r}")


def _assignment(text: str) -> t.Tuple[str, t.Any]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), json.loads(value)
    except json.JSONDecodeError:
        return name.strip(), value


def _common_arguments() -> argparse.ArgumentParser:
    # every default is None so that unset flags leave the config file alone
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="JSON config file, overridden by the flags")
    parser.add_argument("--seed", type=int, help="Seed of the generated scenario")
    parser.add_argument("--alpha", type=_integers, help="Anisotropy exponent, e.g. 1,2")
    parser.add_argument("--K", type=int, dest="K", help="Window scale of the grid")
    parser.add_argument("--k0", type=int, help="Finest scale of the grid")
    parser.add_argument("--k-min", type=int, dest="k_min", help="Least tile scale")
    parser.add_argument("--k-max", type=int, dest="k_max", help="Largest tile scale")
    parser.add_argument("--tiles", type=int, dest="tile_count", help="Number of tiles")
    parser.add_argument("--r", type=_integers, help="Semitile bits, e.g. 1,0")
    parser.add_argument("--multiplier", help="Builtin multiplier: constant, smooth or toy")
    parser.add_argument(
        "--multiplier-param",
        type=_assignment,
        action="append",
        dest="multiplier_params",
        metavar="NAME=VALUE",
        help="Multiplier parameter, e.g. d=2 or delta=0.1; repeatable",
    )
    parser.add_argument("--scenario", help="Scenario file to use instead of generating one")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--jobs", type=int, help="Worker processes, default TILEKIT_JOBS")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="tilekit", description="Anisotropic time-frequency analysis at desk scale"
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    commands.add_parser("gen", parents=[common], help="Write a generated scenario file")
    commands.add_parser("decompose", parents=[common], help="Decompose a scenario")
    verify = commands.add_parser("verify", parents=[common], help="Run verification suites")
    verify.add_argument("--suites", help="Comma separated suites")
    verify.add_argument("--cases", type=int, help="Cases per suite")
    verify.add_argument("--certificate", help="Certificate to re-check against --scenario")
    experiment = commands.add_parser(
        "experiment", parents=[common], help="Run constant tracking experiments"
    )
    experiment.add_argument("--experiments", help="Comma separated experiments")
    experiment.add_argument("--sizes", type=_integers, help="Tile counts, e.g. 25,50")
    experiment.add_argument("--seeds", type=int, help="Seeds per tile count")
    experiment.add_argument("--grids", type=_grids, help="K:k0 pairs of the weak type runs")
    experiment.add_argument("--nu0", type=int, help="Smoothness of the multiplier norm")
    experiment.add_argument(
        "--exploratory",
        action="store_const",
        const=True,
        help="Allow nu0 below 3|alpha| + 2; reports carry no verdict",
    )
    experiment.add_argument("--j-min", type=int, dest="j_min", help="Least rescaled piece")
    theta = commands.add_parser("theta", parents=[common], help="Evaluate the cone function")
    theta.add_argument("--point", type=_floats, help="Evaluate at this point instead of scanning")
    commands.add_parser("show-config", parents=[common], help="Print the configuration")
    for sub in (verify, experiment):
        sub.add_argument(
            "--tol",
            type=_assignment,
            action="append",
            dest="tolerances",
            metavar="NAME=VALUE",
            help="Tolerance override; repeatable",
        )
    return parser


_GENERATOR_FLAGS = ("seed", "alpha", "K", "k0", "k_min", "k_max", "tile_count", "r")
_RUN_FLAGS = (
    "scenario",
    "out",
    "jobs",
    "suites",
    "cases",
    "certificate",
    "experiments",
    "sizes",
    "seeds",
    "grids",
    "nu0",
    "exploratory",
    "j_min",
    "point",
)


def overrides_from_args(args: argparse.Namespace) -> t.Dict[str, t.Any]:
    values = vars(args)
    generator = {k: values[k] for k in _GENERATOR_FLAGS if values.get(k) is not None}
    if values.get("multiplier") is not None:
        generator["multiplier"] = values["multiplier"]
    if values.get("multiplier_params"):
        generator["multiplier_params"] = dict(values["multiplier_params"])
    overrides = {k: values[k] for k in _RUN_FLAGS if values.get(k) is not None}
    if generator:
        overrides["generator"] = generator
    if values.get("tolerances"):
        overrides["tolerances"] = dict(values["tolerances"])
    return overrides


def _scenario(config: RunConfig) -> Scenario:
    if config.scenario is not None:
        return read_scenario(config.scenario)
    return generate_scenario(config.generator)


def _finish(reports: t.Sequence[Report], out: pathlib.Path) -> int:
    failed = False
    for report in reports:
        report.write(out)
        verdict = {True: "passed", False: "FAILED", None: "data only"}[report.passed]
        print(f"{report.suite}: {verdict}")
        if report.passed is False:
            failed = True
            for failure in report.failures:
                print(f"  {failure}")
    return EXIT_FAILED if failed else EXIT_PASSED


def cmd_gen(config: RunConfig) -> int:
    s = generate_scenario(config.generator)
    path = write_scenario(s, pathlib.Path(config.out) / "scenario.json")
    print(path)
    return EXIT_PASSED


def cmd_decompose(config: RunConfig) -> int:
    s = _scenario(config)
    try:
        result = main_decompose(s)
    except DecompositionError as e:
        _logger.error(f"{e}: {dict(e.diagnostics)}")
        return EXIT_FAILED
    nu0 = config.experiment_spec().resolved_nu0
    json_path, csv_path = write_certificate(result, s, config.out, nu0)
    problems = verify_decomposition(result, s)
    for problem in problems:
        print(problem)
    print(f"{sum(1 for _ in result.trees())} trees on {len(result.buckets)} levels")
    print(json_path)
    print(csv_path)
    return EXIT_FAILED if problems else EXIT_PASSED


def _recheck_certificate(config: RunConfig) -> int:
    if config.scenario is None:
        raise UsageError("Re-checking a certificate needs its --scenario")
    s = read_scenario(config.scenario)
    problems = verify_decomposition(read_certificate(config.certificate, s), s)
    for problem in problems:
        print(problem)
    print("certificate: " + ("FAILED" if problems else "passed"))
    return EXIT_FAILED if problems else EXIT_PASSED


def cmd_verify(config: RunConfig) -> int:
    if config.certificate is not None:
        return _recheck_certificate(config)
    spec = config.suite_spec()
    jobs = config.resolved_jobs
    reports = []
    for name in config.suites:
        tolerances = config.tolerances_for(suite_tolerances(name))
        reports.append(run_suite(name, spec, tolerances, jobs))
    return _finish(reports, pathlib.Path(config.out))


def cmd_experiment(config: RunConfig) -> int:
    spec = config.experiment_spec()
    jobs = config.resolved_jobs
    reports = []
    for name in config.experiments:
        if name == WEAK_TYPE:
            tolerances = config.tolerances_for(SLOPE_TOLERANCES)
            reports.append(weak_type_experiment(spec, tolerances, jobs))
        elif name == RESCALED_NORM:
            d, delta = config.toy_parameters()
            reports.append(
                rescaled_norm_experiment(
                    d,
                    delta,
                    j_range=range(0, config.j_min - 1, -1),
                    nu0=config.nu0,
                    tolerances=config.tolerances_for(RESCALED_TOLERANCES),
                    jobs=jobs,
                )
            )
        else:
            tolerances = config.tolerances_for(SLOPE_TOLERANCES)
            reports.append(constants_experiment(name, spec, tolerances, jobs))
    return _finish(reports, pathlib.Path(config.out))


def cmd_theta(config: RunConfig) -> int:
    g = config.generator
    if config.point is not None:
        values = {
            "".join(map(str, r)): theta_r(r, config.point, g.bump, g.alpha)
            for r in nonzero_bit_vectors(g.alpha.n)
        }
        print(json.dumps({"point": list(config.point), "theta": values}, indent=2))
        return EXIT_PASSED
    positivity = positivity_scan(g.bump, g.alpha, seed=g.seed)
    covering = covering_scan(g.bump, g.alpha, positivity.eps0, seed=g.seed)
    summary = {
        "eps0": positivity.eps0,
        "least_theta": {"".join(map(str, r)): v for r, v in positivity.minimum.items()},
        "covering_margin": covering.margin,
        "covering_violations": covering.violations,
    }
    print(json.dumps(summary, indent=2))
    passed = positivity.eps0 > 0 and covering.violations == 0
    return EXIT_PASSED if passed else EXIT_FAILED


def cmd_show_config(config: RunConfig) -> int:
    print(json.dumps(config.to_record(), indent=2))
    return EXIT_PASSED


COMMAND_HANDLERS: t.Dict[str, t.Callable[[RunConfig], int]] = {
    "gen": cmd_gen,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "theta": cmd_theta,
    "show-config": cmd_show_config,
}


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        config = load_config(args.command, args.config, overrides_from_args(args))
    except (ValueError, TypeError) as e:
        print(f"tilekit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMAND_HANDLERS[config.command](config)
    except ValueError as e:
        print(f"tilekit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
