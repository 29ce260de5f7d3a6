import json

import pytest

from tilekit.cli.config import (
    RunConfig,
    known_tolerances,
    load_config,
    merge_records,
    read_config_file,
)
from tilekit.utilities.parallel import JOBS_ENVIRONMENT_VARIABLE
from tilekit.utilities.testing import assert_call

SMALL_GENERATOR = dict(K=2, k0=-2, k_min=-1, k_max=0, b0=0.4, b1=0.3)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps({"generator": dict(SMALL_GENERATOR, seed=3, tile_count=7), "cases": 5})
    )
    return path


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.suites == ("orthogonality", "decay", "cone", "maximal")
        assert config.experiments == ("mass", "energy", "tree", "global")
        assert config.suite_spec().grid.shape == (64, 4096)
        assert config.experiment_spec().resolved_nu0 == 11

    def test_record_is_plain_json(self):
        record = RunConfig(tolerances={"slope": 0.2}).to_record()
        assert json.loads(json.dumps(record)) == record
        assert record["generator"]["alpha"] == [1, 2]
        assert record["tolerances"] == {"slope": 0.2}
        assert record["grids"] == [[3, -2], [4, -2]]

    def test_names_from_text(self):
        config = RunConfig(suites="decay,maximal,decay", experiments="weak-type")
        assert config.suites == ("decay", "maximal")
        assert config.experiments == ("weak-type",)

    @pytest.mark.parametrize(
        "fields, expect",
        [
            (dict(command="plot"), ValueError),
            (dict(suites=""), ValueError("must not be empty")),
            (dict(suites=["decay", "vitali"]), ValueError("Unknown suites")),
            (dict(experiments=["mass", "weak"]), ValueError("Unknown experiments")),
            (dict(tolerances={"nothing": 1.0}), ValueError("Unknown tolerances")),
            (dict(tolerances={"slope": -1.0}), ValueError("slope")),
            (dict(generator={"nu1": 4.0}), ValueError("nu1")),
            (dict(generator={"r": [0, 0]}), ValueError("zero vector")),
            (dict(generator={"k_min": 1, "k_max": 0}), ValueError("k_min")),
            (dict(generator={"multiplier": "wavy"}), ValueError("Unknown multiplier")),
            (
                dict(generator={"multiplier": "toy", "multiplier_params": {"d": 3}}),
                ValueError("Toy multipliers need alpha"),
            ),
            (dict(generator={"b0": 0.01}), ValueError),
            (dict(jobs=0), ValueError("jobs")),
            (dict(point=[1.0, 0.0, 0.0]), ValueError("point")),
            (dict(nu0=5), ValueError("exploratory")),
            (dict(sizes=[]), ValueError("sizes")),
            (dict(cases=0), ValueError("cases")),
            (dict(j_min=1), ValueError("j_min")),
        ],
    )
    def test_invalid(self, fields, expect):
        assert_call(RunConfig, expect, **fields)

    def test_tolerances_for(self):
        config = RunConfig(tolerances={"slope": 0.2, "zero": 0.0, "relative": 0.3})
        assert config.tolerances_for({"zero": 1e-10, "refinement": 0.5}) == {"zero": 0.0}
        assert "homogeneity" in known_tolerances()

    @pytest.mark.parametrize(
        "generator, expect",
        [
            ({}, (2, 0.1)),
            ({"multiplier": "smooth"}, (2, 0.1)),
            (
                {"alpha": [1, 3], "multiplier": "toy", "multiplier_params": {"d": 3, "delta": 0.2}},
                (3, 0.2),
            ),
        ],
    )
    def test_toy_parameters(self, generator, expect):
        assert RunConfig(generator=generator).toy_parameters() == expect

    def test_jobs(self, monkeypatch):
        monkeypatch.setenv(JOBS_ENVIRONMENT_VARIABLE, "3")
        assert RunConfig().resolved_jobs == 3
        assert RunConfig(jobs=2).resolved_jobs == 2


class TestLayers:
    def test_merge_records(self):
        merged = merge_records(
            {"out": "a", "generator": {"seed": 1, "K": 3}},
            {"generator": {"seed": 2}},
            {"out": "b"},
        )
        assert merged == {"out": "b", "generator": {"seed": 2, "K": 3}}

    def test_flags_override_the_file(self, config_file):
        config = load_config("verify", config_file, {"generator": {"seed": 9}})
        assert config.command == "verify"
        assert config.generator.seed == 9
        assert config.generator.tile_count == 7
        assert config.generator.K == 2
        assert config.cases == 5

    def test_defaults_without_a_file(self):
        assert load_config("gen") == RunConfig(command="gen")

    def test_unknown_keys(self):
        assert_call(load_config, ValueError("Unknown configuration keys"), "gen", None, {"x": 1})

    @pytest.mark.parametrize(
        "text, expect",
        [
            ("{", ValueError("not valid JSON")),
            ("[1, 2]", ValueError("JSON object")),
            ('{"command": "gen"}', ValueError("command line")),
        ],
    )
    def test_bad_files(self, tmp_path, text, expect):
        path = tmp_path / "config.json"
        path.write_text(text)
        assert_call(read_config_file, expect, path)

    def test_missing_file(self, tmp_path):
        assert_call(read_config_file, ValueError("does not exist"), tmp_path / "none.json")
