import json

import click

from ..conf import RunConfig
from ..exceptions import ConfigurationError, PartialFailureError
from ..extractor import ExtractionSettings, SyntheticSpec, extract_all, make_ps_sequence
from ..report import write_report
from ..utils import FractionalOrder


def load_spec(path):
    if path is None:
        return SyntheticSpec()
    try:
        with open(path) as fileobj:
            data = json.load(fileobj)
    except ValueError as e:
        raise ConfigurationError("Could not parse {}: {}".format(path, e))
    return SyntheticSpec.from_dict(data)


def truth(oracle):
    return [b.to_dict() for b in oracle.bubbles]


@click.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON description of the synthetic sequence.")
@click.option("-k", "indices", type=click.IntRange(min=1), multiple=True, default=(16, 32),
              show_default=True, help="Sequence index to analyse.")
@click.option("-s", "order", type=FractionalOrder(), default=0.5, show_default=True,
              help="Fractional order of the functional.")
@click.option("--max-profiles", type=click.IntRange(min=1), default=4, show_default=True,
              help="Largest number of bubbles to split off.")
@click.pass_obj
def extract(obj, spec_path, indices, order, max_profiles):
    """Split bubbles off members of a synthetic Palais-Smale sequence."""
    run = RunConfig.from_obj(obj)
    spec = load_spec(spec_path)
    settings = ExtractionSettings.from_config(obj["config"])
    settings.seed = run.seed
    results, partial = [], []
    for k in sorted(set(indices)):
        oracle = make_ps_sequence(spec, k)
        result = extract_all(oracle, spec.N, order, max_profiles=max_profiles, settings=settings)
        entry = result.to_dict()
        entry.update(k=k, truth=truth(oracle), relative_gap=result.relative_gap)
        results.append(entry)
        click.echo("k={:<5} profiles={} relative gap={:.3e}".format(
            k, len(result.profiles), result.relative_gap
        ))
        if result.partial:
            partial.append(k)
    path = write_report(run.output_dir, "extract", {
        "spec": spec.to_dict(),
        "seed": run.seed,
        "results": results,
    })
    click.echo(path)
    if partial:
        raise PartialFailureError(
            "Extraction ended on a failed fit for k={}.".format(", ".join(map(str, partial)))
        )
