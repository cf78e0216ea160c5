import click

from ..conf import RunConfig
from ..exceptions import PartialFailureError
from ..report import write_table
from ..threshold import TABLE_COLUMNS, threshold_search
from ..utils import DimRange, FractionalOrder


def echo_summary(record):
    N0 = "none" if record.N0 is None else str(record.N0)
    line = "s={:<6g} N0={:<6} {}".format(record.s, N0, record.mode)
    if record.isolated:
        line += click.style("  holds below N0 at {}".format(record.isolated), fg="yellow")
    if record.failures:
        line += click.style("  {} failed cells".format(len(record.failures)), fg="red")
    click.echo(line)


@click.command()
@click.option("-s", "orders", type=FractionalOrder(), multiple=True,
              default=(0.25, 0.5, 0.75), show_default=True, help="Fractional order.")
@click.option("--mode", type=click.Choice(["analytic", "exact"]), default="analytic",
              show_default=True, help="Use the analytic bound or quadrature.")
@click.option("-N", "--dims", type=DimRange(minimum=5), default=None,
              help="Inclusive range of dimensions [default: from scan.* configuration].")
@click.pass_obj
def threshold(obj, orders, mode, dims):
    """Scan for the dimension beyond which the threshold inequality holds.

    Writes one row per (N, s) and a summary with the threshold of each s.
    Exits with status 3 when a cell could not be computed.
    """
    run = RunConfig.from_obj(obj)
    if dims is None:
        hi = run.n_max if mode == "analytic" else run.exact_n_max
        dims = list(range(run.n_min, hi + 1))
    rows, summaries, failed = [], [], 0
    for s in orders:
        record = threshold_search(
            s, mode, (dims[0], dims[-1]), run.quad if mode == "exact" else None,
            workers=run.workers,
        )
        rows.extend(record.rows())
        summaries.append(record.summary())
        failed += len(record.failures)
        echo_summary(record)
    path = write_table(
        run.output_dir,
        "threshold_" + mode,
        rows,
        TABLE_COLUMNS,
        fmt=run.fmt,
        summary={"mode": mode, "thresholds": summaries},
    )
    click.echo(path)
    if failed:
        raise PartialFailureError("{} cells failed; see the status column of {}.".format(
            failed, path
        ))
