import click

from ..conf import RunConfig
from ..ledger import (
    ProfileSet,
    bubble_energy,
    coron_window,
    energy_from_quotient,
    ps_level,
    solution_residual,
)
from ..report import write_table
from ..specfn import sobolev_constant

COLUMNS = ["N", "profiles", "base", "level", "in_coron_window"]


@click.command()
@click.option("-N", "dim", type=click.IntRange(min=3), default=5, show_default=True,
              help="Dimension.")
@click.option("--max-profiles", type=click.IntRange(min=0), default=3, show_default=True,
              help="Largest number of ground bubbles in the ledger.")
@click.option("--base", type=float, default=0.0, show_default=True,
              help="Energy of the weak limit.")
@click.option("--check/--no-check", default=False,
              help="Check the bubble energy against quadrature.")
@click.pass_obj
def ledger(obj, dim, max_profiles, base, check):
    """Tabulate the energy levels at which compactness can fail."""
    run = RunConfig.from_obj(obj)
    beta = bubble_energy(dim, run.quad if check else None)
    lo, hi = coron_window(dim)
    rows = []
    for count in range(max_profiles + 1):
        level = ps_level(ProfileSet.ground(dim, count, base=base), dim)
        rows.append({
            "N": dim,
            "profiles": count,
            "base": base,
            "level": level,
            "in_coron_window": lo <= level < hi,
        })
    sobolev = sobolev_constant(dim)
    summary = {
        "N": dim,
        "bubble_energy": beta,
        "coron_window": [lo, hi],
        "energy_at_sobolev_level": energy_from_quotient(sobolev, dim),
        "energy_at_doubled_level": energy_from_quotient(2.0 ** (2.0 / dim) * sobolev, dim),
        "solution_residual": solution_residual(dim, (0.1, 0.5, 1.0, 2.0, 5.0)),
    }
    click.echo("beta* = {:.10g}, Coron window [{:.10g}, {:.10g})".format(beta, lo, hi))
    click.echo(write_table(run.output_dir, "ledger", rows, COLUMNS, fmt=run.fmt,
                           summary=summary))
