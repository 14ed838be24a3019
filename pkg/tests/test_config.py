import textwrap

import pytest

from python_hardyverify.config import RunConfig, get_allowed_formats
from python_hardyverify.errors import ValidationError

EXAMPLE = textwrap.dedent(
    """\
    command: verify
    target: thm21
    parameters:
      manifold: hyperbolic
      N: 3
      lambda: 0.0
      j: 0
      modes: [1]
      support: [1.0, 3.0]
      seed: 1
    quadrature:
      rel_tol: 1.0e-10
    output:
      path: report.json
      format: json
    grids:
      lambda: [0.0, 0.25, 0.5]
    """
)


@pytest.fixture
def example_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(EXAMPLE)
    return path


class TestFromYaml:
    def test_example(self, example_file):
        config = RunConfig.from_yaml(str(example_file))
        assert config.command == "verify"
        assert config.target == "thm21"
        assert config.modes == [1]
        assert config.support == (1.0, 3.0)
        assert config.output == "report.json"
        assert config.grids == {"lambda": [0.0, 0.25, 0.5]}
        assert config.validate() is config

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert RunConfig.from_yaml(str(path)) == RunConfig()

    @pytest.mark.parametrize("text", ["parameters: [1, 2", "- verify\n- thm21\n"])
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.yaml"
        path.write_text(text)
        with pytest.raises(ValidationError) as e:
            RunConfig.from_yaml(str(path))
        assert e.value.field == "config"

    def test_missing(self, tmp_path):
        with pytest.raises(ValidationError) as e:
            RunConfig.from_yaml(str(tmp_path / "absent.yaml"))
        assert e.value.field == "config"


class TestFromDict:
    def test_unknown_top_key(self):
        with pytest.raises(ValidationError) as e:
            RunConfig.from_dict({"solver": "lapack"})
        assert e.value.field == "solver"

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError) as e:
            RunConfig.from_dict({"parameters": {"gamma": 2.0}})
        assert e.value.field == "gamma"

    def test_round_trip(self):
        config = RunConfig(command="sweep", target="cor24", alpha=0.5, modes=[1, 2], j=0, grids={"alpha": [0.0, 1.0]}, strict=True)
        assert RunConfig.from_dict(config.to_dict()) == config


class TestDump:
    def test_dump_and_load(self, tmp_path):
        config = RunConfig(command="sharpness", sharpness_target="poincare", levels=2, rmax=30.0)
        path = tmp_path / "saved.yaml"
        config.dump(str(path))
        assert RunConfig.from_yaml(str(path)) == config

    def test_refuses_overwrite(self, example_file):
        before = example_file.read_text()
        with pytest.raises(FileExistsError):
            RunConfig().dump(str(example_file))
        assert example_file.read_text() == before


class TestDerived:
    def test_output_format(self):
        assert RunConfig(command="verify").output_format == "json"
        assert RunConfig(command="bessel").output_format == "json"
        assert RunConfig(command="sharpness").output_format == "csv"
        assert RunConfig(command="sweep").output_format == "csv"
        assert RunConfig(command="sweep", format="json").output_format == "json"
        assert get_allowed_formats() == ["json", "csv"]

    def test_mode_list(self):
        assert RunConfig(j=1).mode_list == [2]
        assert RunConfig(modes=[3, 4]).mode_list == [3, 4]

    def test_quadrature_spec(self):
        spec = RunConfig(rel_tol=1e-8, quad_nodes=8).quadrature_spec()
        assert (spec.rel_tol, spec.base_rule) == (1e-8, 8)

    def test_merged(self):
        config = RunConfig().merged({"N": 4, "lam": None, "target": "cor23"})
        assert (config.N, config.lam, config.target) == (4, 0.0, "cor23")
        with pytest.raises(ValidationError) as e:
            RunConfig().merged({"radius": 2.0})
        assert e.value.field == "radius"

    def test_with_grid_values(self):
        config = RunConfig().with_grid_values({"lambda": "0.5", "N": 4.0, "seed": 3})
        assert config.lam == 0.5
        assert config.N == 4 and isinstance(config.N, int)
        assert config.seed == 3


class TestValidate:
    @pytest.mark.parametrize(
        "kwargs, field",
        [
            ({"command": "plot"}, "command"),
            ({"target": "thm99"}, "target"),
            ({"sharpness_target": "rellich"}, "sharpness_target"),
            ({"manifold": "sphere"}, "manifold"),
            ({"pair": "airy"}, "pair"),
            ({"format": "xml"}, "format"),
            ({"N": 1}, "N"),
            ({"lam": 1.5}, "lambda"),
            ({"j": -2}, "j"),
            ({"j": 1, "modes": [1, 2]}, "modes"),
            ({"modes": [2, 2]}, "modes"),
            ({"support": (3.0, 1.0)}, "support"),
            ({"support": (0.0, 1.0)}, "support"),
            ({"n_knots": 2}, "n_knots"),
            ({"kappa": 0.0}, "kappa"),
            ({"rel_tol": 0.0}, "rel_tol"),
            ({"levels": 0}, "levels"),
            ({"nodes": 1}, "nodes"),
            ({"threads": 0}, "threads"),
            ({"grids": {"support": [1.0]}}, "grids"),
            ({"grids": {"lambda": [0.0, 2.0]}}, "lambda"),
        ],
    )
    def test_rejects(self, kwargs, field):
        with pytest.raises(ValidationError) as e:
            RunConfig(**kwargs).validate()
        assert e.value.field == field

    def test_defaults_are_valid(self):
        RunConfig().validate()

    def test_sharpness_ignores_verify_target(self):
        RunConfig(command="sharpness", target="not-a-target").validate()

    @pytest.mark.parametrize(
        "kwargs, field",
        [
            ({"target": "eq12", "grids": {"N": [2, 3], "lambda": [0.0, 1.0]}}, "lambda"),
            ({"target": "thm21", "j": 0, "modes": [1, 2], "grids": {"j": [0, 1]}}, "modes"),
            ({"target": "eq12", "lam": 1.0, "grids": {"N": [3, 2]}}, "lambda"),
        ],
    )
    def test_rejects_interacting_grids(self, kwargs, field):
        with pytest.raises(ValidationError) as e:
            RunConfig(command="sweep", **kwargs).validate()
        assert e.value.field == field

    def test_interacting_grids_within_range(self):
        # lambda_1(H^2) = 0.25 bounds every tuple
        RunConfig(command="sweep", target="eq12", grids={"N": [2, 3], "lambda": [0.0, 0.25]}).validate()
        RunConfig(command="sweep", target="thm21", grids={"j": [-1, 0, 1]}).validate()
