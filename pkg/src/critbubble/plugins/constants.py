import click

from ..conf import RunConfig
from ..ledger import bubble_energy, coron_window
from ..report import write_table
from ..specfn import sobolev_constant, sobolev_constant_forms, sphere_measure
from ..utils import DimRange

COLUMNS = ["N", "sobolev", "sobolev_sphere_form", "sphere_measure", "bubble_energy",
           "coron_lo", "coron_hi"]


def constants_row(N):
    _, sphere_form = sobolev_constant_forms(N)
    lo, hi = coron_window(N)
    return {
        "N": N,
        "sobolev": sobolev_constant(N),
        "sobolev_sphere_form": sphere_form,
        "sphere_measure": sphere_measure(N - 1),
        "bubble_energy": bubble_energy(N),
        "coron_lo": lo,
        "coron_hi": hi,
    }


@click.command()
@click.option("-N", "--dims", type=DimRange(), default="3..10", show_default=True,
              help="Inclusive range of dimensions.")
@click.pass_obj
def constants(obj, dims):
    """Tabulate the Sobolev constant and the bubble energy levels."""
    run = RunConfig.from_obj(obj)
    rows = [constants_row(N) for N in dims]
    path = write_table(run.output_dir, "constants", rows, COLUMNS, fmt=run.fmt)
    click.echo(path)
