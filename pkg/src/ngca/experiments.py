"""Benchmark harness: seeded sweeps over sample size and noise level.

A single JSON config describes the sweep; `run_experiment` produces one
record per (algorithm, n, gamma2, trial) cell and writes them as CSV. All
randomness is derived from the master seed, so the full record set is a
pure function of the config. Trial failures are isolated: the record keeps
NaN metrics and the error message, and the run continues.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .datasets import GeneratorKind, assemble_observations, sample_signals
from .gradients import LSLDG
from .imak import IMAK
from .lsngca import LSNGCA
from .metrics import PCABaseline, subspace_distance, subspace_error
from .mipp import MIPP
from .subspace import ORIGINAL, Subspace
from .validation import as_float_matrix

CSV_HEADER = (
    "algorithm",
    "generator",
    "n",
    "gamma2",
    "trial",
    "seed",
    "error_E",
    "distance_D",
    "time_sec",
    "error_msg",
)

ALGORITHMS = ("lsngca", "mipp", "imak", "pca")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one benchmark sweep."""

    algorithms: tuple[str, ...]
    generator: str
    n_grid: tuple[int, ...] = (500, 1000, 2000, 4000)
    gamma2_grid: tuple[float, ...] = (0.0,)
    d_x: int = 10
    d_s: int = 2
    trials: int = 10
    seed: int = 0
    output: str = "results.csv"
    algorithm_options: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(
            self, "gamma2_grid", tuple(float(g) for g in self.gamma2_grid)
        )
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(
                    f"unknown algorithm {a!r}, expected one of {ALGORITHMS}"
                )
        if not self.algorithms:
            raise ValueError("config needs at least one algorithm")
        GeneratorKind(self.generator)
        if not self.n_grid:
            raise ValueError("n_grid must be non-empty")
        if list(self.n_grid) != sorted(self.n_grid):
            raise ValueError(f"n_grid must be ascending, got {self.n_grid}")
        if any(n < 1 for n in self.n_grid):
            raise ValueError("sample sizes must be positive")
        if any(g < 0 for g in self.gamma2_grid):
            raise ValueError("gamma2 values must be non-negative")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.d_s < 1 or self.d_x <= self.d_s:
            raise ValueError(
                f"need 1 <= d_s < d_x, got d_s={self.d_s}, d_x={self.d_x}"
            )
        for key in self.algorithm_options:
            if key not in ALGORITHMS:
                raise ValueError(f"options given for unknown algorithm {key!r}")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        options = {a: payload.pop(a) for a in ALGORITHMS if a in payload}
        known = {
            "algorithms",
            "generator",
            "n_grid",
            "gamma2_grid",
            "d_x",
            "d_s",
            "trials",
            "seed",
            "output",
            "n_jobs",
        }
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(algorithm_options=options, **payload)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if not isinstance(payload, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(payload)


@dataclass(frozen=True)
class TrialRecord:
    algorithm: str
    generator: str
    n: int
    gamma2: float
    trial: int
    seed: int
    error_E: float
    distance_D: float
    time_sec: float
    error_msg: str = ""


def child_seed(master: int, tag: str, n: int, gamma2: float, trial: int) -> int:
    """Deterministic 64-bit seed for one (tag, cell, trial) combination."""
    key = f"{master}|{tag}|{n}|{gamma2!r}|{trial}"
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _build_estimator(algorithm: str, d_s: int, options: dict, seed: int):
    options = dict(options)
    if algorithm == "lsngca":
        score = None
        lsldg_keys = {"sigma_grid", "lambda_grid", "cv_folds"}
        if lsldg_keys & set(options):
            score = LSLDG(
                sigma_grid=options.pop("sigma_grid", None),
                lambda_grid=options.pop("lambda_grid", None),
                cv_folds=options.pop("cv_folds", 5),
                random_state=seed,
            )
        est = LSNGCA(n_components=d_s, score_estimator=score, random_state=seed)
    elif algorithm == "mipp":
        est = MIPP(
            n_components=d_s,
            profiles=options.pop("profiles", None),
            n_directions=options.pop("K_dir", 50),
            fastica_iters=options.pop("iters", 10),
            random_state=seed,
        )
    elif algorithm == "imak":
        est = IMAK(
            n_components=d_s,
            sigma2_grid=options.pop("sigma2_grid", (0.5, 1.0, 2.0, 4.0)),
            n_iterations=options.pop("outer_iters", 10),
        )
    elif algorithm == "pca":
        est = PCABaseline(n_components=d_s)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if options:
        raise ValueError(
            f"unknown options for algorithm {algorithm!r}: {sorted(options)}"
        )
    return est


def _run_trial(cfg: ExperimentConfig, algorithm: str, n: int, gamma2: float, trial: int, clock):
    signal_seed = child_seed(cfg.seed, "signals", n, gamma2, trial)
    noise_seed = child_seed(cfg.seed, "noise", n, gamma2, trial)
    algo_seed = child_seed(cfg.seed, algorithm, n, gamma2, trial)
    truth = Subspace(np.eye(cfg.d_x)[:, : cfg.d_s], frame=ORIGINAL)
    record = TrialRecord(
        algorithm=algorithm,
        generator=cfg.generator,
        n=n,
        gamma2=gamma2,
        trial=trial,
        seed=algo_seed,
        error_E=math.nan,
        distance_D=math.nan,
        time_sec=0.0,
    )
    start = clock()
    try:
        signals = sample_signals(cfg.generator, n, seed=signal_seed)
        X = assemble_observations(signals, cfg.d_x, gamma2, seed=noise_seed)
        options = cfg.algorithm_options.get(algorithm, {})
        estimator = _build_estimator(algorithm, cfg.d_s, options, algo_seed)
        start = clock()
        estimator.fit(X)
        elapsed = max(clock() - start, 1e-12)
        return replace(
            record,
            error_E=subspace_error(estimator.subspace_, truth),
            distance_D=subspace_distance(estimator.subspace_, truth),
            time_sec=elapsed,
        )
    except Exception as exc:  # noqa: BLE001 - failures become NaN records
        elapsed = max(clock() - start, 1e-12)
        message = " ".join(str(exc).split())
        return replace(record, time_sec=elapsed, error_msg=message)


def run_experiment(cfg: ExperimentConfig, clock=time.perf_counter) -> list[TrialRecord]:
    """Run the sweep described by `cfg` and write its records as CSV.

    Records are emitted in a fixed order (algorithm, then n, then gamma2,
    then trial) regardless of how trials are scheduled; with `n_jobs != 1`
    the independent trials run in parallel through joblib.
    """
    cells = [
        (algorithm, n, gamma2, trial)
        for algorithm in cfg.algorithms
        for n in cfg.n_grid
        for gamma2 in cfg.gamma2_grid
        for trial in range(cfg.trials)
    ]
    if cfg.n_jobs == 1:
        records = [_run_trial(cfg, *cell, clock) for cell in cells]
    else:
        records = Parallel(n_jobs=cfg.n_jobs)(
            delayed(_run_trial)(cfg, *cell, clock) for cell in cells
        )
    if cfg.output:
        write_records(records, cfg.output)
    return records


def write_records(records, path) -> None:
    """Write trial records with the fixed CSV schema (LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.algorithm,
                    r.generator,
                    r.n,
                    repr(float(r.gamma2)),
                    r.trial,
                    r.seed,
                    repr(float(r.error_E)),
                    repr(float(r.distance_D)),
                    repr(float(r.time_sec)),
                    r.error_msg,
                ]
            )


def read_records(path) -> list[TrialRecord]:
    """Read back a records CSV produced by `write_records`."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        records = []
        for i, row in enumerate(reader, start=1):
            if len(row) != len(CSV_HEADER):
                raise ValueError(
                    f"{path}: row {i} has {len(row)} fields, expected {len(CSV_HEADER)}"
                )
            records.append(
                TrialRecord(
                    algorithm=row[0],
                    generator=row[1],
                    n=int(row[2]),
                    gamma2=float(row[3]),
                    trial=int(row[4]),
                    seed=int(row[5]),
                    error_E=float(row[6]),
                    distance_D=float(row[7]),
                    time_sec=float(row[8]),
                    error_msg=row[9],
                )
            )
    return records


@dataclass(frozen=True)
class RateFit:
    """Log-log convergence-rate fit: mean metric ~ C * n^slope."""

    slope: float
    stderr: float
    n_points: int


def fit_rate(records, algorithm: str, metric: str = "E") -> RateFit:
    """Fit the convergence rate of one algorithm's mean metric over n.

    Averages the chosen metric per sample size (NaN trials excluded), then
    regresses log(mean) on log(n) by ordinary least squares. Needs at least
    three sample sizes with positive means.
    """
    if metric not in ("E", "D"):
        raise ValueError(f"metric must be 'E' or 'D', got {metric!r}")
    attr = "error_E" if metric == "E" else "distance_D"
    by_n: dict[int, list[float]] = {}
    for r in records:
        if r.algorithm != algorithm:
            continue
        value = getattr(r, attr)
        if math.isnan(value):
            continue
        by_n.setdefault(r.n, []).append(value)
    points = []
    for n, values in by_n.items():
        mean = sum(values) / len(values)
        if mean > 0:
            points.append((math.log(n), math.log(mean)))
    if len(points) < 3:
        raise ValueError(
            f"rate fit needs at least 3 sample sizes with positive mean "
            f"{metric}, got {len(points)}"
        )
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    x_c = x - x.mean()
    sxx = float(x_c @ x_c)
    slope = float(x_c @ (y - y.mean())) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    residuals = y - (intercept + slope * x)
    dof = len(points) - 2
    variance = max(float(residuals @ residuals), 0.0) / dof
    return RateFit(slope=slope, stderr=math.sqrt(variance / sxx), n_points=len(points))


def export_projection(X, subspace: Subspace, path) -> np.ndarray:
    """Project centered data onto a subspace basis and write it as CSV.

    Row i of the output is basis^T (x_i - mean(X)). The subspace must be in
    the original data frame and match the data dimension.
    """
    X = as_float_matrix(X)
    if subspace.frame != ORIGINAL:
        raise ValueError(
            f"projection needs an original-frame subspace, got {subspace.frame!r}"
        )
    if subspace.d_x != X.shape[1]:
        raise ValueError(
            f"subspace dimension {subspace.d_x} does not match data "
            f"dimension {X.shape[1]}"
        )
    projected = (X - X.mean(axis=0)) @ subspace.basis
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in projected:
            writer.writerow([repr(float(v)) for v in row])
    return projected
