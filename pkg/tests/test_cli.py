import logging

from critbubble import __version__
from critbubble.cli import configure_logging, main


def test_main_shows_usage_when_no_subcommand_is_given(cli_runner):
    result = cli_runner.invoke(main, [])
    assert result.exit_code == 0
    assert result.output.startswith("Usage:")


def test_main_shows_version(cli_runner):
    result = cli_runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_all_subcommands_are_registered(cli_runner):
    result = cli_runner.invoke(main, ["--help"])
    for name in ("constants", "bubble", "threshold", "asymptotics", "ledger", "extract",
                 "verify", "config"):
        assert name in result.output


def test_invalid_format_is_a_usage_error(cli_runner):
    result = cli_runner.invoke(main, ["--format", "xml", "constants"])
    assert result.exit_code == 2


def test_invalid_config_file_is_a_usage_error(cli_runner):
    with cli_runner.isolated_filesystem():
        with open("broken.json", "w") as fileobj:
            fileobj.write('{"output.format": "xml"}\n')
        result = cli_runner.invoke(main, ["--config", "broken.json", "constants"])
        assert result.exit_code == 2
        assert "output.format" in result.output


def test_configure_logging_sets_root_level():
    configure_logging("debug")
    assert logging.getLogger().level == logging.DEBUG
    configure_logging("warning")
    assert logging.getLogger().level == logging.WARNING
