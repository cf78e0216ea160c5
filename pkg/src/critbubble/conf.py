import json
import os
from collections import ChainMap

from .quad import QuadSpec

OUTPUT_DIR_ENV = "CRITBUBBLE_OUTPUT_DIR"

#: Keys without a default; unset means the feature is off.
OPTIONAL_KEYS = ("quad.r_max",)

CONFIG_DEFAULTS = {
    "verbose": "info",
    "seed": 20240607,
    "workers": 1,
    "quad.rel_tol": 1e-8,
    "quad.abs_tol": 1e-12,
    "quad.max_subdiv": 200,
    "scan.n_min": 5,
    "scan.n_max": 500,
    "scan.exact_n_max": 12,
    "output.dir": "results",
    "output.format": "csv",
    "output.svg": False,
}


class FileConfig:
    def __init__(self, path, data, defaults=None):
        self.path = path
        if defaults is None:
            defaults = {}
        self._data = ChainMap(data, defaults)
        self._validators = {}

    def validator(self, key):
        """Register a configuration key validator function."""

        def _inner(func):
            self._validators[key] = func
            return func

        return _inner

    def _validate_value(self, key, value):
        if key in self._validators:
            self._validators[key](value)

    def get(self, key, default=None):
        value = self._data.get(key)
        if value is None:
            return default
        self._validate_value(key, value)
        return value

    def validate(self):
        """Run every registered validator against the current values."""
        for key in self._validators:
            if self._data.get(key) is not None:
                self._validate_value(key, self._data[key])

    def __getitem__(self, key):
        value = self._data[key]
        self._validate_value(key, value)
        return value

    def __setitem__(self, key, value):
        self._validate_value(key, value)
        self._data[key] = value

    def __delitem__(self, key):
        if key in self._data.maps[0]:
            del self._data.maps[0][key]

    def __len__(self):
        return len(self._data)

    def __iter__(self):
        return iter(self._data)

    def dump(self):
        """Dump the configuration to disk."""
        with open(str(self.path), "w+") as config_file:
            json.dump(dict(self._data.maps[0]), config_file, indent=4, sort_keys=True)

    @classmethod
    def load(cls, path, defaults=None):
        """Load configuration from a file.

        Reads configuration from `path` and returns a :class:`FileConfig`
        instance with the configuration. The `defaults` will be merged into the
        configuration. A missing file gives an empty configuration.

        :param path str: Path to the configuration file.
        :param defaults dict: A set of defaults to merge into the configuration.
        """
        try:
            with open(str(path)) as config_file:
                data = json.load(config_file)
        except FileNotFoundError:
            data = {}
        return cls(path=path, data=data, defaults=defaults)


def config_from_path(path):
    return FileConfig.load(path, defaults=CONFIG_DEFAULTS)


def output_dir(config):
    """Return the output directory, honouring the environment override."""
    return os.environ.get(OUTPUT_DIR_ENV) or config["output.dir"]


config = config_from_path(".critbubble.json")


class RunConfig:
    """Settings of one command invocation.

    Values given on the command line win over the environment override of
    the output directory, which wins over the configuration file.

    :ivar QuadSpec quad: Quadrature controls.
    :ivar str output_dir: Directory receiving all reports.
    :ivar str fmt: Table format, ``csv`` or ``json``.
    :ivar int seed: Seed of every random number generator.
    :ivar int workers: Size of the worker pool for sweeps.
    :ivar bool svg: Whether static charts are written.
    """

    def __init__(self, quad, output_dir, fmt="csv", seed=20240607, workers=1, svg=False,
                 n_min=5, n_max=500, exact_n_max=12):
        self.quad = quad
        self.output_dir = output_dir
        self.fmt = fmt
        self.seed = seed
        self.workers = workers
        self.svg = svg
        self.n_min = n_min
        self.n_max = n_max
        self.exact_n_max = exact_n_max

    @classmethod
    def from_config(cls, file_config, overrides=None):
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        directory = overrides.get("output_dir") or output_dir(file_config)
        return cls(
            quad=QuadSpec.from_config(file_config),
            output_dir=directory,
            fmt=overrides.get("fmt", file_config["output.format"]),
            seed=int(overrides.get("seed", file_config["seed"])),
            workers=int(overrides.get("workers", file_config["workers"])),
            svg=bool(file_config["output.svg"]),
            n_min=int(file_config["scan.n_min"]),
            n_max=int(file_config["scan.n_max"]),
            exact_n_max=int(file_config["scan.exact_n_max"]),
        )

    @classmethod
    def from_obj(cls, obj):
        """Build the run configuration from the click context object."""
        return cls.from_config(obj.get("config", config), obj)
