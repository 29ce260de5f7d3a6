import json

import pandas as pd
import pytest

from tilekit.cli.main import (
    EXIT_FAILED,
    EXIT_PASSED,
    EXIT_USAGE,
    build_parser,
    main,
    overrides_from_args,
)
from tilekit.utilities.parallel import JOBS_ENVIRONMENT_VARIABLE
from tilekit.verify.reports import read_report

SMALL_GENERATOR = dict(K=2, k0=-2, k_min=-1, k_max=0, b0=0.4, b1=0.3)


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"generator": SMALL_GENERATOR, "jobs": 1}))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


class TestArguments:
    def test_overrides(self):
        args = build_parser().parse_args(
            [
                "verify",
                "--seed",
                "4",
                "--alpha",
                "1,3",
                "--suites",
                "decay",
                "--tol",
                "refinement=0.25",
                "--multiplier",
                "toy",
                "--multiplier-param",
                "d=3",
            ]
        )
        assert overrides_from_args(args) == {
            "suites": "decay",
            "tolerances": {"refinement": 0.25},
            "generator": {
                "seed": 4,
                "alpha": [1, 3],
                "multiplier": "toy",
                "multiplier_params": {"d": 3},
            },
        }

    def test_unset_flags_are_not_overrides(self):
        assert overrides_from_args(build_parser().parse_args(["gen"])) == {}

    @pytest.mark.parametrize(
        "argv",
        [
            ["plot"],
            [],
            ["gen", "--alpha", "one"],
            ["verify", "--tol", "refinement"],
            ["gen", "--tol", "slope=1"],
        ],
    )
    def test_usage_errors_exit_with_two(self, argv):
        with pytest.raises(SystemExit) as error:
            main(argv)
        assert error.value.code == EXIT_USAGE


class TestShowConfig:
    def test_precedence(self, capsys, config):
        code, output = run(capsys, "show-config", "--config", config, "--seed", 5)
        assert code == EXIT_PASSED
        record = json.loads(output.out)
        assert record["command"] == "show-config"
        assert record["generator"]["seed"] == 5
        assert record["generator"]["K"] == 2
        assert record["out"] == "tilekit-out"

    def test_invalid_configuration(self, capsys, config):
        code, output = run(capsys, "show-config", "--config", config, "--k-min", 1)
        assert code == EXIT_USAGE
        assert "k_min" in output.err


class TestGenAndDecompose:
    def test_gen(self, capsys, config, tmp_path):
        out = tmp_path / "out"
        argv = ["gen", "--config", config, "--out", out, "--seed", 7, "--tiles", 5]
        assert run(capsys, *argv)[0] == EXIT_PASSED
        first = (out / "scenario.json").read_text()
        assert len(json.loads(first)["tiles"]) == 5
        assert run(capsys, *argv)[0] == EXIT_PASSED
        assert (out / "scenario.json").read_text() == first

    def test_gen_without_tiles(self, capsys, config, tmp_path):
        code, _ = run(capsys, "gen", "--config", config, "--out", tmp_path, "--tiles", 0)
        assert code == EXIT_PASSED
        assert json.loads((tmp_path / "scenario.json").read_text())["tiles"] == []

    def test_gen_rejects_bad_scales(self, capsys, config, tmp_path):
        argv = ["gen", "--config", config, "--out", tmp_path, "--k-min", 0, "--k-max", -1]
        assert run(capsys, *argv)[0] == EXIT_USAGE

    def test_decompose_and_recheck(self, capsys, config, tmp_path):
        run(capsys, "gen", "--config", config, "--out", tmp_path, "--tiles", 8)
        scenario = tmp_path / "scenario.json"
        code, output = run(
            capsys, "decompose", "--config", config, "--scenario", scenario, "--out", tmp_path
        )
        assert code == EXIT_PASSED
        rows = pd.read_csv(tmp_path / "certificate.csv")
        certificate = json.loads((tmp_path / "certificate.json").read_text())
        assert len(rows) == sum(len(b["trees"]) for b in certificate["buckets"])
        assert f"{len(rows)} trees" in output.out
        code, output = run(
            capsys,
            "verify",
            "--config",
            config,
            "--scenario",
            scenario,
            "--certificate",
            tmp_path / "certificate.json",
        )
        assert code == EXIT_PASSED
        assert "certificate: passed" in output.out

    def test_decompose_empty_scenario(self, capsys, config, tmp_path):
        code, _ = run(capsys, "decompose", "--config", config, "--tiles", 0, "--out", tmp_path)
        assert code == EXIT_PASSED
        assert len(pd.read_csv(tmp_path / "certificate.csv")) == 0

    def test_certificate_needs_its_scenario(self, capsys, config, tmp_path):
        code, output = run(
            capsys, "verify", "--config", config, "--certificate", tmp_path / "c.json"
        )
        assert code == EXIT_USAGE
        assert "--scenario" in output.err

    def test_missing_scenario(self, capsys, config, tmp_path):
        code, _ = run(capsys, "decompose", "--config", config, "--scenario", tmp_path / "x.json")
        assert code == EXIT_USAGE


class TestVerify:
    def test_suite_passes(self, capsys, config, tmp_path):
        code, output = run(
            capsys,
            "verify",
            "--config",
            config,
            "--suites",
            "maximal",
            "--cases",
            3,
            "--out",
            tmp_path,
        )
        assert code == EXIT_PASSED
        assert "maximal: passed" in output.out
        assert read_report(tmp_path / "maximal.json").passed is True
        assert (tmp_path / "maximal.csv").exists()

    def test_impossible_tolerance_fails(self, capsys, config, tmp_path):
        argv = ["verify", "--config", config, "--suites", "decay", "--cases", 2, "--multiplier", "smooth"]
        code, output = run(capsys, *argv, "--tol", "refinement=0", "--out", tmp_path)
        assert code == EXIT_FAILED
        assert "decay: FAILED" in output.out
        assert read_report(tmp_path / "decay.json").passed is False

    @pytest.mark.parametrize(
        "extra",
        [
            ["--suites", "vitali"],
            ["--suites", ""],
            ["--tol", "nothing=1"],
            ["--tol", "zero=-1"],
        ],
    )
    def test_bad_selection(self, capsys, config, tmp_path, extra):
        code, _ = run(capsys, "verify", "--config", config, "--out", tmp_path, *extra)
        assert code == EXIT_USAGE

    def test_bad_jobs_environment(self, capsys, monkeypatch, tmp_path):
        monkeypatch.setenv(JOBS_ENVIRONMENT_VARIABLE, "many")
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"generator": SMALL_GENERATOR}))
        argv = ["verify", "--config", path, "--suites", "maximal", "--cases", 1]
        code, output = run(capsys, *argv, "--out", tmp_path)
        assert code == EXIT_USAGE
        assert JOBS_ENVIRONMENT_VARIABLE in output.err


class TestExperiment:
    def test_mass_experiment(self, capsys, config, tmp_path):
        argv = ["experiment", "--config", config, "--experiments", "mass"]
        code, output = run(capsys, *argv, "--sizes", "4", "--seeds", 1, "--out", tmp_path)
        assert code == EXIT_PASSED
        assert "constants-mass: passed" in output.out
        assert (tmp_path / "constants-mass.json").exists()

    def test_rescaled_norm_without_oscillation(self, capsys, config, tmp_path):
        code, output = run(
            capsys,
            "experiment",
            "--config",
            config,
            "--experiments",
            "rescaled-norm",
            "--multiplier",
            "toy",
            "--multiplier-param",
            "d=2",
            "--multiplier-param",
            "delta=0",
            "--j-min",
            -2,
            "--out",
            tmp_path,
        )
        assert code == EXIT_PASSED
        report = read_report(tmp_path / "rescaled-norm.json")
        assert list(report.parameters["j_range"]) == [0, -1, -2]

    def test_exploratory_runs_are_data_only(self, capsys, config, tmp_path):
        argv = ["experiment", "--config", config, "--experiments", "global", "--nu0", 4]
        code, output = run(
            capsys, *argv, "--exploratory", "--sizes", "4", "--seeds", 1, "--out", tmp_path
        )
        assert code == EXIT_PASSED
        assert "constants-global: data only" in output.out

    def test_small_nu0_needs_exploratory(self, capsys, config, tmp_path):
        argv = ["experiment", "--config", config, "--nu0", 4, "--out", tmp_path]
        assert run(capsys, *argv)[0] == EXIT_USAGE


class TestTheta:
    def test_point(self, capsys):
        code, output = run(capsys, "theta", "--point=-0.3,0.2")
        assert code == EXIT_PASSED
        values = json.loads(output.out)["theta"]
        assert set(values) == {"01", "10", "11"}
        assert all(v >= 0 for v in values.values())

    def test_point_needs_every_component(self, capsys):
        assert run(capsys, "theta", "--point", "0.3")[0] == EXIT_USAGE

    def test_zero_point(self, capsys):
        assert run(capsys, "theta", "--point", "0,0")[0] == EXIT_USAGE

    def test_scan(self, capsys):
        code, output = run(capsys, "theta")
        summary = json.loads(output.out)
        assert summary["eps0"] > 0
        assert code == (EXIT_PASSED if summary["covering_violations"] == 0 else EXIT_FAILED)
