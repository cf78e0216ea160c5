import os.path

import pandas as pd

from critbubble.cli import main


def test_asymptotics_table(cli_runner, output_dir):
    res = cli_runner.invoke(main, ["--output-dir", output_dir, "asymptotics", "--n-max", "120"])
    assert res.exit_code == 0
    assert "fails" not in res.output

    frame = pd.read_csv(os.path.join(output_dir, "asymptotics.csv"))
    assert list(frame["N"]) == list(range(3, 121))
    assert frame["sobolev"].is_monotonic_increasing
    assert frame["bound_ratio"].isna().sum() == 2


def test_asymptotics_writes_chart(cli_runner, tmpdir, output_dir):
    with tmpdir.as_cwd():
        with open(".critbubble.json", "w") as fileobj:
            fileobj.write('{"output.svg": true}\n')
        res = cli_runner.invoke(
            main,
            ["--config", ".critbubble.json", "--output-dir", output_dir, "asymptotics",
             "--n-max", "40"],
        )
    assert res.exit_code == 0
    assert os.path.exists(os.path.join(output_dir, "asymptotics.svg"))


def test_asymptotics_needs_ten_dimensions(cli_runner, output_dir):
    res = cli_runner.invoke(main, ["--output-dir", output_dir, "asymptotics", "--n-max", "9"])
    assert res.exit_code == 2


def test_asymptotics_reports_domain_error_as_usage_error(cli_runner, tmpdir, output_dir):
    with tmpdir.as_cwd():
        with open(".critbubble.json", "w") as fileobj:
            fileobj.write('{"scan.n_max": 6}\n')
        res = cli_runner.invoke(
            main, ["--config", ".critbubble.json", "--output-dir", output_dir, "asymptotics"]
        )
    assert res.exit_code == 2
    assert "N_hi" in res.output
