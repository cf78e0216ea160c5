import pytest

from critbubble.cli import attach_validators
from critbubble.conf import CONFIG_DEFAULTS, OUTPUT_DIR_ENV, FileConfig, RunConfig, config_from_path
from critbubble.exceptions import ConfigurationError


def test_load_config_from_file(tmpdir):
    config_path = tmpdir.join(".critbubble.json")
    config_path.write('{"foo": "bar"}\n')

    c = FileConfig.load(str(config_path))
    assert len(c) == 1
    assert c["foo"] == "bar"


def test_load_config_from_nonexisting_file(tmpdir):
    config_path = tmpdir.join(".critbubble.json")
    c = FileConfig.load(str(config_path))
    assert len(c) == 0


def test_dump_config_to_file(tmpdir):
    config_path = tmpdir.join(".critbubble.json")
    config_path.write('{"foo": "bar"}\n')

    c1 = FileConfig.load(str(config_path))
    c1["baz"] = "foo"
    c1.dump()

    c2 = FileConfig.load(str(config_path))
    assert len(c2) == 2
    assert c2["baz"] == "foo"
    assert c2["foo"] == "bar"


def test_validator(tmpdir):
    config_path = tmpdir.join(".critbubble.json")
    c = FileConfig(config_path, data={})

    @c.validator("foo")
    def validate_foo(value):
        if value != "bar":
            raise ConfigurationError(
                'Value of "foo" must be "bar", but was "{}".'.format(value)
            )

    c["foo"] = "bar"
    assert c["foo"] == "bar"

    with pytest.raises(ConfigurationError) as e:
        c["foo"] = "baz"

    assert str(e.value) == 'Value of "foo" must be "bar", but was "baz".'
    assert c["foo"] == "bar"


def test_defaults_are_valid(tmpdir):
    c = attach_validators(config_from_path(str(tmpdir.join(".critbubble.json"))))
    c.validate()
    assert c["output.format"] == "csv"


@pytest.mark.parametrize(
    "key,value",
    [
        ("output.format", "xml"),
        ("workers", 0),
        ("seed", -1),
        ("output.svg", "maybe"),
        ("quad.rel_tol", 0.0),
        ("verbose", "loud"),
    ],
)
def test_invalid_values_are_rejected(tmpdir, key, value):
    c = attach_validators(config_from_path(str(tmpdir.join(".critbubble.json"))))
    with pytest.raises(ConfigurationError):
        c[key] = value


def test_invalid_file_value_fails_validation(tmpdir):
    config_path = tmpdir.join(".critbubble.json")
    config_path.write('{"workers": "many"}\n')
    c = attach_validators(config_from_path(str(config_path)))
    with pytest.raises(ConfigurationError):
        c.validate()


def test_run_config_takes_file_values(tmpdir):
    config_path = tmpdir.join(".critbubble.json")
    config_path.write('{"quad.rel_tol": 1e-6, "output.dir": "out", "workers": 2}\n')
    run = RunConfig.from_config(config_from_path(str(config_path)))
    assert run.quad.rel_tol == 1e-6
    assert run.output_dir == "out"
    assert run.workers == 2
    assert run.seed == CONFIG_DEFAULTS["seed"]


def test_run_config_flags_win_over_environment(tmpdir, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, "from-env")
    c = config_from_path(str(tmpdir.join(".critbubble.json")))

    assert RunConfig.from_config(c).output_dir == "from-env"
    run = RunConfig.from_config(c, {"output_dir": "from-flag", "seed": 7, "fmt": None})
    assert run.output_dir == "from-flag"
    assert run.seed == 7
    assert run.fmt == "csv"
