import click

from ..bubble import (
    Bubble,
    CoronParams,
    axial_norms,
    axis,
    bubble_grad_sq,
    bubble_l2_sq,
    bubble_lcrit,
    solution_amplitude,
    standard_bubble,
    truncation_components,
    truncation_l2_bounds,
)
from ..conf import RunConfig
from ..exceptions import DivergenceError
from ..ledger import solution_residual
from ..quad import gradient_sq, lcrit, mixed_quotient
from ..report import write_table
from ..specfn import DimPair
from ..threshold import concentrating_quotient, truncated_family_quotient
from ..utils import DimRange, FractionalOrder

NORM_COLUMNS = [
    "N",
    "grad_sq",
    "grad_sq_quadrature",
    "lcrit",
    "lcrit_quadrature",
    "lcrit_off_center",
    "grad_sq_off_center",
    "l2_sq",
    "gradient_quotient",
    "solution_amplitude",
    "solution_residual",
    "error_estimate",
]

TRUNCATION_COLUMNS = ["N", "R", "t", "gradient", "l2", "total", "l2_outer_bound",
                      "l2_inner_bound", "error_estimate"]

QUOTIENT_COLUMNS = ["N", "s", "R", "quotient", "limit", "gap"]

RESIDUAL_RADII = (0.1, 0.5, 1.0, 2.0, 5.0)


def norms_row(N, spec):
    u0 = standard_bubble(N)
    grad = gradient_sq(u0, N, spec)
    crit = lcrit(u0, N, spec)
    try:
        l2 = bubble_l2_sq(N)
    except DivergenceError:
        l2 = None
    report = mixed_quotient(u0, N, 0.5, spec, include_seminorm=False)
    off_crit, off_grad = axial_norms(Bubble(axis(N)), spec)
    return {
        "N": N,
        "grad_sq": bubble_grad_sq(N),
        "grad_sq_quadrature": grad.value,
        "lcrit": bubble_lcrit(N),
        "lcrit_quadrature": crit.value,
        "lcrit_off_center": off_crit.value,
        "grad_sq_off_center": off_grad.value,
        "l2_sq": l2,
        "gradient_quotient": report.gradient_quotient,
        "solution_amplitude": solution_amplitude(N),
        "solution_residual": solution_residual(N, RESIDUAL_RADII),
        "error_estimate": grad.error + crit.error + off_crit.error + off_grad.error,
    }


def truncation_rows(N, radii, ts, spec):
    sigma = axis(N)
    rows = []
    for R in radii:
        outer, inner = truncation_l2_bounds(N, R, spec)
        for t in ts:
            gradient, l2 = truncation_components(N, CoronParams(t, sigma), R, spec)
            rows.append({
                "N": N,
                "R": R,
                "t": t,
                "gradient": gradient.value,
                "l2": l2.value,
                "total": gradient.value + l2.value,
                "l2_outer_bound": outer,
                "l2_inner_bound": inner,
                "error_estimate": gradient.error + l2.error,
            })
    return rows


def quotient_rows(N, s, radii, spec):
    """Tabulate the mixed quotient of the radial truncated bubbles against
    its limit, the concentrating quotient at t = 0."""
    dim = DimPair(N, s)
    limit = concentrating_quotient(dim, 0.0, mode="exact", spec=spec).quotient
    rows = []
    for R in radii:
        quotient = truncated_family_quotient(dim, R, spec)
        rows.append({
            "N": N,
            "s": s,
            "R": R,
            "quotient": quotient,
            "limit": limit,
            "gap": quotient - limit,
        })
    return rows


@click.command()
@click.option("-N", "--dims", type=DimRange(), default="3..8", show_default=True,
              help="Inclusive range of dimensions.")
@click.option("-R", "--truncation", "radii", type=click.FloatRange(min=1.0, min_open=True),
              multiple=True, help="Also tabulate the truncation error at this radius.")
@click.option("-t", "ts", type=click.FloatRange(0.0, 1.0, max_open=True), multiple=True,
              default=(0.0, 0.25, 0.5, 0.75, 0.9), show_default=True,
              help="Concentration parameters of the truncation table.")
@click.option("--truncation-dim", type=click.IntRange(min=5), default=5, show_default=True,
              help="Dimension of the truncation table.")
@click.option("-s", "order", type=FractionalOrder(), default=0.5, show_default=True,
              help="Fractional order of the truncated quotient table.")
@click.pass_obj
def bubble(obj, dims, radii, ts, truncation_dim, order):
    """Check the closed-form norms of the standard bubble by quadrature.

    With -R the energy error of the truncated concentrating bubbles is
    tabulated as well, together with the mixed quotient of the radial
    truncated bubbles.
    """
    run = RunConfig.from_obj(obj)
    rows = [norms_row(N, run.quad) for N in dims]
    click.echo(write_table(run.output_dir, "bubble", rows, NORM_COLUMNS, fmt=run.fmt))
    if radii:
        rows = truncation_rows(truncation_dim, sorted(radii), ts, run.quad)
        click.echo(
            write_table(run.output_dir, "truncation", rows, TRUNCATION_COLUMNS, fmt=run.fmt)
        )
        rows = quotient_rows(truncation_dim, order, sorted(radii), run.quad)
        click.echo(write_table(run.output_dir, "truncated_quotient", rows, QUOTIENT_COLUMNS,
                               fmt=run.fmt))
