import click

from ..acceptance import CRITERIA, run_verify
from ..conf import RunConfig
from ..exceptions import AcceptanceError
from ..report import write_report

FAULT_STRICTNESS = 100.0


@click.command()
@click.option("--inject-fault", is_flag=True, default=False,
              help="Tighten every tolerance {:g} times.".format(FAULT_STRICTNESS))
@click.option("--only", type=click.IntRange(1, len(CRITERIA)), multiple=True,
              help="Run only this criterion (may be repeated).")
@click.option("--pin", is_flag=True, default=False,
              help="Write the pinned values of a passing run to goldens.json in the output "
              "directory, where they override the shipped goldens.")
@click.pass_obj
def verify(obj, inject_fault, only, pin):
    """Run the acceptance criteria and write a pass/fail report.

    Exits with status 1 if any criterion fails.
    """
    run = RunConfig.from_obj(obj)
    strictness = FAULT_STRICTNESS if inject_fault else 1.0
    report = run_verify(run, strictness=strictness, only=set(only) or None, pin=pin)
    path = write_report(run.output_dir, "verify", report)
    for entry in report["criteria"]:
        status = click.style("pass", fg="green") if entry["passed"] else click.style(
            "FAIL", fg="red", bold=True
        )
        click.echo("{:>3} {:<32}{}".format(entry["id"], entry["name"], status))
    click.echo(path)
    failed = [e["name"] for e in report["criteria"] if not e["passed"]]
    if failed:
        raise AcceptanceError("Failing criteria: {}.".format(", ".join(failed)))
