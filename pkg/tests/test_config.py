import json

import pytest

from libs.config import build_config, load_config, parse_law, read_config
from libs.cookie_env import delta
from libs.exceptions import ConfigError

BASE = {"command": "classify",
        "law": {"family": "theta", "parameter": 0.75},
        "horizons": [100, 200],
        "replicas": 50,
        "seeds": {"master": 7}}


def base(**changes):
    data = json.loads(json.dumps(BASE))
    data.update(changes)
    return data


class TestBuild:

    def test_defaults(self):
        config = build_config(base())
        assert config.command == "classify"
        assert config.seed == 7
        assert config.horizons == (100, 200)
        assert config.replica_stride == 1
        assert config.output_format == "csv"
        assert not config.skip_invalid
        assert delta(config.law) == 2.0
        assert config.law.master_seed == 7

    def test_overrides(self):
        config = build_config(base(), {"command": "simulate", "seed": 3, "replicas": 9, "horizons": [5, 10, 20],
                                       "skip_invalid": True, "format": "json", "threads": None})
        assert (config.command, config.seed, config.replicas) == ("simulate", 3, 9)
        assert config.horizons == (5, 10, 20)
        assert config.skip_invalid
        assert config.output_format == "json"

    def test_command_options(self):
        config = build_config(base(command="simulate", simulate={"steps": 10}))
        assert config.options == {"steps": 10}

    @pytest.mark.parametrize("changes,field", [
        ({"seeds": {}}, "seeds.master"),
        ({"seeds": {"master": -1}}, "seeds.master"),
        ({"seeds": {"master": "abc"}}, "seeds.master"),
        ({"command": "dance"}, "command"),
        ({"horizons": [200, 100]}, "horizons"),
        ({"horizons": []}, "horizons"),
        ({"replicas": 0}, "replicas"),
        ({"replicas": 2.5}, "replicas"),
        ({"output": {"format": "xml"}}, "output.format"),
        ({"law": {"family": "spiral", "parameter": 1}}, "law.family"),
        ({"law": {"family": "theta"}}, "law.parameter"),
        ({"law": {"M": 1, "background": [[-1, 0.5], [1, 0.5]], "generator": {"type": "trap", "depth": 1}}},
         "law.generator.depth"),
        ({"classify": [1, 2]}, "classify"),
    ])
    def test_errors_name_the_field(self, changes, field):
        with pytest.raises(ConfigError) as error:
            build_config(base(**changes))
        assert error.value.field == field

    def test_hash_ignores_threads_and_output(self):
        first = build_config(base(threads=1, output={"dir": "a"}))
        second = build_config(base(threads=4, output={"dir": "b"}))
        assert first.config_hash == second.config_hash
        assert build_config(base(replicas=51)).config_hash != first.config_hash

    def test_trap_shorthand(self):
        law = parse_law({"M": 1, "background": [[-1, 0.5], [1, 0.5]], "generator": {"type": "trap", "depth": 5}}, 3)
        assert law.truncation == 24
        assert law.master_seed == 3


class TestFiles:

    def test_invalid_json_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "command": "classify",\n  "seeds": {"master": }\n}\n')
        with pytest.raises(ConfigError) as error:
            read_config(str(path))
        assert error.value.line == 3
        assert "line 3" in str(error.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_config(str(tmp_path / "nope.json"))

    def test_not_an_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            read_config(str(path))

    @pytest.mark.parametrize("name", ["delta2", "theta_sweep", "no_cookies", "mixture", "martingale", "trap",
                                      "cep_delta2", "oracle_instance", "oracle_suite"])
    def test_bundled_configs_load(self, configs_dir, name):
        config = load_config("{0}/{1}.json".format(configs_dir, name))
        assert config.name == name
        assert config.seed == 20240611
