"""Non-Gaussian component analysis.

Estimators that recover the low-dimensional non-Gaussian index space of
high-dimensional data, together with synthetic benchmark generators,
subspace comparison metrics, and a seeded experiment harness.
"""

from .datasets import (
    GeneratorKind,
    assemble_observations,
    load_csv,
    sample_signals,
)
from .experiments import (
    ExperimentConfig,
    RateFit,
    TrialRecord,
    export_projection,
    fit_rate,
    read_records,
    run_experiment,
    write_records,
)
from .gradients import LSLDG
from .imak import IMAK
from .lsngca import LSNGCA
from .metrics import PCABaseline, subspace_distance, subspace_error
from .mipp import MIPP
from .subspace import Subspace, load_subspace, save_subspace
from .whitening import Whitener

__version__ = "0.1.0"

__all__ = [
    "GeneratorKind",
    "assemble_observations",
    "load_csv",
    "sample_signals",
    "ExperimentConfig",
    "RateFit",
    "TrialRecord",
    "export_projection",
    "fit_rate",
    "read_records",
    "run_experiment",
    "write_records",
    "LSLDG",
    "IMAK",
    "LSNGCA",
    "PCABaseline",
    "subspace_distance",
    "subspace_error",
    "MIPP",
    "Subspace",
    "load_subspace",
    "save_subspace",
    "Whitener",
    "__version__",
]
