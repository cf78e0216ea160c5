import os.path

import pandas as pd
import pytest

from critbubble.bubble import bubble_grad_sq
from critbubble.cli import main


def test_bubble_norms(cli_runner, output_dir):
    res = cli_runner.invoke(main, ["--output-dir", output_dir, "bubble", "-N", "3..6"])
    assert res.exit_code == 0

    frame = pd.read_csv(os.path.join(output_dir, "bubble.csv"))
    assert list(frame["N"]) == [3, 4, 5, 6]
    assert frame["l2_sq"].isna().tolist() == [True, True, False, False]
    assert frame["grad_sq_quadrature"][2] == pytest.approx(bubble_grad_sq(5), rel=1e-7)
    assert frame["lcrit_off_center"].to_numpy() == pytest.approx(
        frame["lcrit"].to_numpy(), rel=1e-6
    )
    assert frame["grad_sq_off_center"].to_numpy() == pytest.approx(
        frame["grad_sq"].to_numpy(), rel=1e-6
    )
    assert (frame["solution_residual"] < 1e-6).all()
    assert not os.path.exists(os.path.join(output_dir, "truncation.csv"))


@pytest.mark.slow
def test_bubble_truncation_table(cli_runner, output_dir):
    res = cli_runner.invoke(
        main,
        ["--output-dir", output_dir, "bubble", "-N", "5", "-R", "30", "-R", "10", "-t", "0.5"],
    )
    assert res.exit_code == 0

    frame = pd.read_csv(os.path.join(output_dir, "truncation.csv"))
    assert list(frame["R"]) == [10.0, 30.0]
    assert frame["total"][1] < frame["total"][0]

    quotients = pd.read_csv(os.path.join(output_dir, "truncated_quotient.csv"))
    assert list(quotients["R"]) == [10.0, 30.0]
    assert (quotients["s"] == 0.5).all()
    assert abs(quotients["gap"][1]) < abs(quotients["gap"][0])
    assert abs(quotients["gap"][1]) < 1e-2 * quotients["limit"][1]
