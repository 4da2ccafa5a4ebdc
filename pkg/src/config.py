"""config loads the defaults of repsample from `config_setup.json` into a
frozen `SamplerConfig` at import time: the EM, model-selection and
evaluation defaults, and where outputs go when no path is given.
"""

from __future__ import annotations

import json

from dataclasses import dataclass
from dataclasses import field
from pathlib import Path


FilePath = str | Path
UTF = "utf-8"

PROJECT_ROOT = Path(__file__).resolve().parent.parent
CONFIG_FILE = PROJECT_ROOT / "config_setup.json"

# Every real written to CSV or model JSON carries enough digits to
# round-trip a binary64.
SIGNIFICANT_DIGITS = 17
UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class SamplerConfig:
    """
    Defaults shared by the library and the command line.

    Attributes
    ----------
    prog : str
        The name of the program, "repsample", as shown by argparse.
    description : str
        A description of the program, as shown by argparse.
    export_dir : str
        The directory into which outputs are written when no explicit
        path is given on the command line.
    seed : int
        The default seed of every random draw.
    max_iter : int
        Maximum number of EM iterations per fit.
    tol : float
        EM stops once the log-likelihood improves by less than this.
    restarts : int
        Number of seeded EM fits per candidate component count.
    k_min, k_max : int
        Default component-count range searched in automatic mode.
    runs : int
        Default number of evaluation runs.
    variance_floor : float
        Lower bound on every fitted per-dimension variance.
    correlation_slack : float
        Absolute correlations within this distance of 1 count as exactly 1.
    """

    prog: str
    description: str = field(repr=False)
    export_dir: str
    seed: int
    max_iter: int
    tol: float
    restarts: int
    k_min: int
    k_max: int
    runs: int
    variance_floor: float
    correlation_slack: float


def read_config(config_file: FilePath) -> SamplerConfig:
    """Reads `config_file`; every SamplerConfig field must be present."""
    with open(config_file, encoding=UTF) as file:
        data = json.load(file)
    return SamplerConfig(**data)


config: SamplerConfig = read_config(CONFIG_FILE)
