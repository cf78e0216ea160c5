import click

from ..conf import RunConfig
from ..report import to_frame, write_line_chart, write_table
from ..threshold import asymptotic_scan, r_of_n
from ..utils import FractionalOrder

COLUMNS = ["N", "s", "sphere_ratio", "log_sphere_ratio", "sobolev", "bound_ratio", "r_of_n"]


def asymptotic_rows(table):
    rows = []
    for row in table.rows:
        rows.append({
            "N": row.N,
            "s": table.s,
            "sphere_ratio": row.sphere_ratio,
            "log_sphere_ratio": row.log_sphere_ratio,
            "sobolev": row.sobolev,
            "bound_ratio": row.bound_ratio,
            "r_of_n": r_of_n(row.N) if row.N >= 5 else None,
        })
    return rows


@click.command()
@click.option("--n-max", type=click.IntRange(min=10), default=None,
              help="Largest dimension [default: scan.n_max].")
@click.option("-s", "order", type=FractionalOrder(), default=0.5, show_default=True,
              help="Fractional order of the bound ratio.")
@click.pass_obj
def asymptotics(obj, n_max, order):
    """Tabulate the large-N behaviour of the quantities in the threshold inequality."""
    run = RunConfig.from_obj(obj)
    table = asymptotic_scan(n_max or run.n_max, s=order)
    rows = asymptotic_rows(table)
    summary = {"s": order, "trends": table.trends, "ok": table.ok}
    click.echo(write_table(run.output_dir, "asymptotics", rows, COLUMNS, fmt=run.fmt,
                           summary=summary))
    for name, ok in sorted(table.trends.items()):
        click.echo("{:<24}{}".format(name, click.style("ok" if ok else "fails",
                                                        fg="green" if ok else "red")))
    if run.svg:
        frame = to_frame(rows, COLUMNS)
        click.echo(write_line_chart(run.output_dir, "asymptotics", frame, "N",
                                    ["sphere_ratio", "bound_ratio", "r_of_n"], logy=True))
