"""`commands.py` holds the subcommands of the repsample command line.

Each command takes a validated `RunConfig`, does its work through the
library modules and returns the process exit status. Failures are raised,
not returned; `main` maps them to exit statuses.
"""

from __future__ import annotations

from typing import Any
from typing import Callable

from pydantic import ValidationError

from src.argsbuilder import RunConfig
from src.argsbuilder import describe_validation_error
from src.errors import UsageError
from src.evaluation import format_comparison
from src.evaluation import run_comparison
from src.log import logger
from src.pipeline import SamplePipeline
from src.pipeline import sample_pipeline
from src.serials import load_table
from src.serials import read_population_spec
from src.serials import write_assignments_csv
from src.serials import write_json
from src.serials import write_sample_csv
from src.serials import write_text


Command = Callable[[RunConfig], int]


def _resolved(run: RunConfig) -> dict[str, Any]:
    return run.model_dump()


def cmd_sample(run: RunConfig) -> int:
    """Selects a representative sample and writes it with its run report."""
    assert run.input is not None and run.size is not None
    object_set = load_table(run.input)
    result = sample_pipeline(object_set, run.size, run.pipeline_options())
    write_sample_csv(result.sample, run.output)
    write_json({**result.run_report(), "config": _resolved(run)}, run.report)
    return 0


def cmd_cluster(run: RunConfig) -> int:
    """Fits the mixture; writes the model, the hard assignment and a report."""
    assert run.input is not None and run.model is not None
    object_set = load_table(run.input)
    clustering = SamplePipeline(run.pipeline_options()).cluster(object_set)
    write_text(clustering.model.to_json(), run.model)
    write_assignments_csv(
        clustering.object_set.object_ids,
        clustering.assignment,
        clustering.responsibilities,
        run.output,
    )
    report = {
        "seed": run.seed,
        "fit": clustering.report.to_dict(),
        "bic_table": (
            clustering.selection.bic_table() if clustering.selection else None
        ),
        "normalization": (
            clustering.normalization.to_dict()
            if clustering.normalization
            else None
        ),
        "filtering": (
            clustering.filtering.to_dict() if clustering.filtering else None
        ),
        "config": _resolved(run),
    }
    write_json(report, run.report)
    return 0


def cmd_eval(run: RunConfig) -> int:
    """Compares the method with uniform random sampling on a synthetic population."""
    assert run.spec is not None and run.size is not None
    try:
        spec = read_population_spec(run.spec)
    except ValidationError as err:
        raise UsageError(f"--spec {run.spec}", describe_validation_error(err))
    report = run_comparison(spec, run.size, run.runs, run.pipeline_options())
    table = format_comparison(report)
    write_json({**report.to_dict(), "config": _resolved(run)}, run.report)
    write_text(table, run.output)
    logger.info("Comparison over %d runs:\n%s", report.runs, table)
    return 0


COMMANDS: dict[str, Command] = {
    "sample": cmd_sample,
    "cluster": cmd_cluster,
    "eval": cmd_eval,
}
