import logging
from importlib.metadata import entry_points

import click
from click_plugins import with_plugins

from . import __version__
from .conf import config, config_from_path
from .exceptions import ConfigurationError
from .utils import ColorFormatter

logger = logging.getLogger(__name__)


BASIC_FORMAT = "%(message)s"

ADVANCED_FORMAT = "%(levelname)s%(message)s"

LOGGING_FORMATS = {
    "warning": BASIC_FORMAT,
    "info": BASIC_FORMAT,
    "debug": ADVANCED_FORMAT,
    "error": BASIC_FORMAT,
}

VERBOSITY_LEVELS = ["warning", "debug", "info", "error"]

OUTPUT_FORMATS = ["csv", "json"]

PLUGIN_GROUP = "critbubble.plugins"


def get_level(level):
    return getattr(logging, level.upper())


def configure_logging(level_name):
    fmt = LOGGING_FORMATS[level_name]

    handler = logging.StreamHandler()
    handler.setFormatter(ColorFormatter(fmt=fmt))

    root = logging.getLogger()
    root.addHandler(handler)
    root.setLevel(get_level(level_name))


def plugin_entry_points(group=PLUGIN_GROUP):
    eps = entry_points()
    if hasattr(eps, "select"):
        return eps.select(group=group)
    return eps.get(group, [])


def _validate_choice(key, value, valid_values, human_values=None):
    if value not in valid_values:
        msg = 'Invalid value "{}" for key "{}", must be one of: {}.'
        values = valid_values if human_values is None else human_values
        raise ConfigurationError(msg.format(value, key, ", ".join(values)))


def _validate_bool(key, value):
    human_values = ("true", "yes", "false", "no")
    return _validate_choice(key, value, (True, False), human_values)


def _validate_int(key, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigurationError(
            'Invalid value "{}" for key "{}", must be an integer of at least {}.'.format(
                value, key, minimum
            )
        )


def _validate_positive(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigurationError(
            'Invalid value "{}" for key "{}", must be a positive number.'.format(value, key)
        )


VALIDATORS = {
    "verbose": lambda value: _validate_choice("verbose", value, VERBOSITY_LEVELS),
    "output.format": lambda value: _validate_choice("output.format", value, OUTPUT_FORMATS),
    "output.svg": lambda value: _validate_bool("output.svg", value),
    "workers": lambda value: _validate_int("workers", value, 1),
    "seed": lambda value: _validate_int("seed", value, 0),
    "quad.rel_tol": lambda value: _validate_positive("quad.rel_tol", value),
    "quad.abs_tol": lambda value: _validate_positive("quad.abs_tol", value),
    "quad.r_max": lambda value: _validate_positive("quad.r_max", value),
    "quad.max_subdiv": lambda value: _validate_int("quad.max_subdiv", value, 1),
    "scan.n_min": lambda value: _validate_int("scan.n_min", value, 3),
    "scan.n_max": lambda value: _validate_int("scan.n_max", value, 3),
    "scan.exact_n_max": lambda value: _validate_int("scan.exact_n_max", value, 3),
}


def attach_validators(file_config):
    for key, func in VALIDATORS.items():
        file_config.validator(key)(func)
    return file_config


attach_validators(config)


@with_plugins(plugin_entry_points())
@click.group(context_settings={"obj": {}})
@click.version_option(version=__version__)
@click.option(
    "-v",
    "--verbose",
    type=click.Choice(VERBOSITY_LEVELS),
    default=None,
    help="Verbosity level.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Configuration file to use instead of .critbubble.json.",
)
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Size of the worker pool.")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Random seed.")
@click.option(
    "--format", "fmt", type=click.Choice(OUTPUT_FORMATS), default=None, help="Table format."
)
@click.option("--output-dir", default=None, help="Directory receiving the reports.")
@click.pass_context
def main(ctx, verbose, config_path, workers, seed, fmt, output_dir):
    """Numerical experiments on critical Sobolev bubbles.

    See help for each command using the `--help` flag for that command:

        critbubble threshold --help

    Shows help for the threshold command.
    """
    file_config = config if config_path is None else attach_validators(config_from_path(config_path))
    file_config.validate()

    configure_logging(level_name=verbose or file_config["verbose"])

    ctx.obj = {
        "config": file_config,
        "workers": workers,
        "seed": seed,
        "fmt": fmt,
        "output_dir": output_dir,
    }
