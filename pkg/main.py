"""Representative sampling of characterised object sets.

Clusters the objects with a Gaussian mixture and selects the most
probable members of every cluster, so that even small clusters are
represented in the sample.
"""

from __future__ import annotations

import sys

from typing import TYPE_CHECKING

from src.argsbuilder import build_run_config
from src.commands import COMMANDS
from src.errors import SamplingError
from src.errors import UsageError
from src.log import get_time
from src.log import logger


if TYPE_CHECKING:
    from collections.abc import Sequence


@get_time
def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point for the `repsample` application.

    Parses `argv`, runs the chosen subcommand and maps its failures to
    an exit status: 2 for an invalid flag or spec, 1 for a data,
    feasibility or file error. Each failure is logged on one line.

    Parameters
    ---------
    argv:
    The command line arguments. `None` reads them from `sys.argv`.

    Returns
    -------
    int
        The process exit status.
    """
    try:
        run = build_run_config(argv)
        logger.debug(repr(run))
        return COMMANDS[run.subcommand](run)
    except UsageError as err:
        logger.error("usage error: %s", err)
        return 2
    except SamplingError as err:
        logger.error("%s: %s", type(err).__name__, err)
        return 1
    except OSError as err:
        logger.error("%s: %s", err.filename or "I/O error", err.strerror or err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
