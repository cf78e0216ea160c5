import builtins

import click

from ..conf import CONFIG_DEFAULTS, OPTIONAL_KEYS
from ..exceptions import ConfigurationError


def humanbool(x):
    if x in ("true", "yes"):
        return True
    elif x in ("false", "no"):
        return False
    raise TypeError("x is not a boolean.")


def cast_value(value):
    types = [int, float, humanbool, str]
    for type_func in types:
        try:
            return type_func(value)
        except Exception:
            continue
    return value


def known_keys():
    return sorted(builtins.set(CONFIG_DEFAULTS) | builtins.set(OPTIONAL_KEYS))


@click.group()
def config():
    """Set, unset, get and show configuration."""


@config.command()
@click.argument("key")
@click.pass_obj
def get(obj, key):
    """Get the value of KEY."""
    click.echo(obj["config"].get(key, "<not set>"))


@config.command()
@click.argument("key")
@click.argument("value")
@click.pass_obj
def set(obj, key, value):
    """Set the value of KEY.

    Only known keys can be set and the value is validated before the
    configuration file is written.
    """
    if key not in known_keys():
        raise ConfigurationError(
            'Unknown key "{}", must be one of: {}.'.format(key, ", ".join(known_keys()))
        )
    file_config = obj["config"]
    file_config[key] = cast_value(value)
    file_config.dump()


@config.command()
@click.argument("key")
@click.pass_obj
def unset(obj, key):
    """Unset KEY, restoring its default."""
    file_config = obj["config"]
    del file_config[key]
    file_config.dump()


@config.command()
@click.pass_obj
def show(obj):
    """Show every known key with its effective value."""
    file_config = obj["config"]
    for key in known_keys():
        value = file_config.get(key)
        origin = "default" if value == CONFIG_DEFAULTS.get(key) else "set"
        if value is None:
            value, origin = "<not set>", "default"
        click.echo("{} = {} ({})".format(key, value, origin))
