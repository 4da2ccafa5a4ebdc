"""argsbuilder constructs the argparser for repsample and validates the
parsed flags into a `RunConfig`, for use in the `main` module.
"""

from __future__ import annotations

from argparse import ArgumentParser
from argparse import ArgumentTypeError
from argparse import BooleanOptionalAction
from argparse import Namespace
from argparse import RawDescriptionHelpFormatter
from pathlib import Path
from typing import TYPE_CHECKING
from typing import Any
from typing import Literal

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from src.config import UINT64_MAX
from src.config import config
from src.errors import UsageError
from src.pipeline import PipelineOptions


if TYPE_CHECKING:
    from collections.abc import Sequence

Subcommand = Literal["sample", "cluster", "eval"]

CSV_SCHEMA = """\
input CSV:
  UTF-8, comma-separated. The first header cell names the id column,
  every other header cell names a measure. One object per row; every
  measure cell is a finite real in decimal or scientific notation.

    id,density,elongation
    g1,0.25,1.7e-1
    g2,0.31,0.44

sample CSV:       object_id,cluster,responsibility,rank
assignment CSV:   id,cluster,responsibility
exit status:      0 success, 1 data or feasibility error, 2 usage error
"""

DEFAULT_OUTPUTS: dict[str, dict[str, str]] = {
    "sample": {"output": "sample.csv", "report": "sample_report.json"},
    "cluster": {
        "output": "assignments.csv",
        "report": "cluster_report.json",
        "model": "model.json",
    },
    "eval": {"output": "comparison.txt", "report": "comparison.json"},
}


class RunConfig(BaseModel):
    """The fully resolved configuration of one command-line run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    subcommand: Subcommand
    input: str | None = None
    output: str
    report: str
    model: str | None = None
    spec: str | None = None
    size: int | None = Field(default=None, ge=1)
    k: int | Literal["auto"] = "auto"
    k_min: int = Field(default=config.k_min, ge=1)
    k_max: int = Field(default=config.k_max, ge=1)
    seed: int = Field(default=config.seed, ge=0, le=UINT64_MAX)
    normalize: bool = True
    filter_threshold: float | None = Field(default=None, gt=0, le=1)
    max_iter: int = Field(default=config.max_iter, ge=1)
    tol: float = Field(default=config.tol, gt=0)
    restarts: int = Field(default=config.restarts, ge=1)
    runs: int = Field(default=config.runs, ge=1)

    @model_validator(mode="after")
    def _check_combinations(self) -> RunConfig:
        if isinstance(self.k, int) and self.k < 1:
            raise ValueError("--k must be 'auto' or a positive integer")
        if self.k == "auto" and self.k_min > self.k_max:
            raise ValueError("--k-min must not exceed --k-max")
        if self.subcommand in ("sample", "cluster") and not self.input:
            raise ValueError("--input is required")
        if self.subcommand in ("sample", "eval") and self.size is None:
            raise ValueError("--size is required")
        if self.subcommand == "eval" and not self.spec:
            raise ValueError("--spec is required")
        self._check_destinations()
        return self

    def _check_destinations(self) -> None:
        sources = {
            Path(path).resolve(): flag_name(name)
            for name in ("input", "spec")
            if (path := getattr(self, name))
        }
        targets: dict[Path, str] = {}
        for name in ("output", "report", "model"):
            if (path := getattr(self, name)) is None:
                continue
            target, flag = Path(path).resolve(), flag_name(name)
            if target in sources:
                raise ValueError(
                    f"{flag} must not overwrite {sources[target]}"
                )
            if target in targets:
                raise ValueError(
                    f"{flag} and {targets[target]} name the same file"
                )
            targets[target] = flag

    def pipeline_options(self) -> PipelineOptions:
        return PipelineOptions(
            normalize=self.normalize,
            filter_threshold=self.filter_threshold,
            k=None if self.k == "auto" else self.k,
            k_min=self.k_min,
            k_max=self.k_max,
            seed=self.seed,
            max_iter=self.max_iter,
            tol=self.tol,
            restarts=self.restarts,
        )


def flag_name(field: str) -> str:
    return "--" + field.replace("_", "-")


def k_value(text: str) -> int | str:
    """Parses --k: the word 'auto' or a positive integer."""
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")
    if value < 1:
        raise ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _add_clustering_flags(parser: ArgumentParser) -> None:
    parser.add_argument(
        "--k",
        type=k_value,
        default="auto",
        help="Number of clusters, or 'auto' to choose it by BIC: "
        "default: %(default)s",
    )
    parser.add_argument(
        "--k-min",
        type=int,
        default=config.k_min,
        help="Smallest k tried in auto mode: default: %(default)s",
    )
    parser.add_argument(
        "--k-max",
        type=int,
        default=config.k_max,
        help="Largest k tried in auto mode: default: %(default)s",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=config.seed,
        help="64-bit unsigned seed of every random draw: default: %(default)s",
    )
    parser.add_argument(
        "--normalize",
        action=BooleanOptionalAction,
        default=True,
        help="Z-score every measure before clustering: default: %(default)s",
    )
    parser.add_argument(
        "--filter-threshold",
        type=float,
        default=None,
        metavar="R",
        help="Drop measures whose |Pearson r| with an earlier kept measure "
        "is at least R, in (0, 1]; off when omitted: default: %(default)s",
    )
    parser.add_argument(
        "--max-iter",
        type=int,
        default=config.max_iter,
        help="Maximum EM iterations per fit: default: %(default)s",
    )
    parser.add_argument(
        "--tol",
        type=float,
        default=config.tol,
        help="EM stops when the log-likelihood improves by less than this: "
        "default: %(default)s",
    )
    parser.add_argument(
        "--restarts",
        type=int,
        default=config.restarts,
        help="Seeded EM fits per k in auto mode: default: %(default)s",
    )


def _add_output_flags(parser: ArgumentParser, subcommand: str) -> None:
    defaults = DEFAULT_OUTPUTS[subcommand]
    for name, help_text in (
        ("output", "Path of the main output file"),
        ("report", "Path of the JSON run report"),
        ("model", "Path of the fitted model JSON"),
    ):
        if name in defaults:
            default = str(Path(config.export_dir) / defaults[name])
            parser.add_argument(
                f"--{name}",
                metavar="FILE",
                default=default,
                help=f"{help_text}: default: %(default)s",
            )


def build_parser() -> ArgumentParser:
    """
    build_parser builds the argument parser for repsample.

    Returns:
        ArgumentParser: the parser, with one subparser per subcommand.
    """
    parser = ArgumentParser(
        prog=config.prog,
        usage="%(prog)s [options] {sample,cluster,eval} ...",
        description=config.description,
        epilog=CSV_SCHEMA,
        formatter_class=RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(
        dest="subcommand", metavar="{sample,cluster,eval}", required=True
    )

    sample = subparsers.add_parser(
        "sample",
        help="Select a representative sample of the objects of a CSV table.",
        epilog=CSV_SCHEMA,
        formatter_class=RawDescriptionHelpFormatter,
    )
    sample.add_argument(
        "--input", metavar="FILE", help="The characterised object set CSV."
    )
    sample.add_argument("--size", type=int, help="Number of objects to select.")
    _add_output_flags(sample, "sample")
    _add_clustering_flags(sample)

    cluster = subparsers.add_parser(
        "cluster",
        help="Fit the mixture and write the model and the assignments.",
        epilog=CSV_SCHEMA,
        formatter_class=RawDescriptionHelpFormatter,
    )
    cluster.add_argument(
        "--input", metavar="FILE", help="The characterised object set CSV."
    )
    _add_output_flags(cluster, "cluster")
    _add_clustering_flags(cluster)

    evaluation = subparsers.add_parser(
        "eval",
        help="Compare the method with uniform random sampling on a "
        "synthetic population.",
        epilog=CSV_SCHEMA,
        formatter_class=RawDescriptionHelpFormatter,
    )
    evaluation.add_argument(
        "--spec",
        metavar="FILE",
        help="Population spec JSON: {dimension, seed, "
        "clusters: [{count, mean[], stddev[]}]}.",
    )
    evaluation.add_argument(
        "--size", type=int, help="Number of objects per sample."
    )
    evaluation.add_argument(
        "--runs",
        type=int,
        default=config.runs,
        help="Number of seeded runs: default: %(default)s",
    )
    _add_output_flags(evaluation, "eval")
    _add_clustering_flags(evaluation)
    return parser


def describe_validation_error(err: ValidationError) -> str:
    """The first validation problem, naming the flag or field at fault."""
    error = err.errors()[0]
    location = ".".join(str(part) for part in error["loc"])
    message = str(error["msg"]).removeprefix("Value error, ")
    return f"{location}: {message}" if location else message


def to_run_config(args: Namespace) -> RunConfig:
    """Validates parsed flags; raises UsageError naming the faulty flag."""
    fields: dict[str, Any] = {
        key: value
        for key, value in vars(args).items()
        if key in RunConfig.model_fields
    }
    try:
        return RunConfig(**fields)
    except ValidationError as err:
        error = err.errors()[0]
        if error["loc"]:
            raise UsageError(
                flag_name(str(error["loc"][0])),
                str(error["msg"]),
            )
        raise UsageError("options", describe_validation_error(err))


def build_run_config(argv: Sequence[str] | None) -> RunConfig:
    """Parses `argv` into a validated RunConfig."""
    return to_run_config(build_parser().parse_args(argv))
