"""End-to-end driver: MOEA/D rounds interleaved with surrogate-guided weight adjustment.

Each of ``K_outer`` rounds runs ``N_inner`` generations, then (in
``umoead`` mode) fits the surrogate on ``(angle, objective)`` pairs of the
current population, spreads the angles apart on the surrogate front and
installs the resulting weights. ``moead`` mode skips the adjustment and is
the vanilla baseline. A metrics snapshot closes every round.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .metrics import MetricsRecord, default_reference_point, report
from .moead import OperatorConfig, default_neighborhood_size, generation_step, init_population
from .pfl import PflModel, mse_loss_and_grad, pfl_init, pfl_train
from .problems import get_problem, problem_ids
from .scalarize import angle_to_weight, das_dennis
from .uniformity import DEFAULT_K, adjust_angles

log = logging.getLogger(__name__)

THREADS_ENV = "UMOEAD_THREADS"
_DEFAULT_H = {2: 49, 3: 12}


@dataclass(frozen=True)
class PflConfig:
    hidden: tuple[int, ...] = (64, 64)
    epochs: int = 1000
    lr: float = 1e-2
    optimizer: str = "gd"
    momentum: float = 0.0


@dataclass(frozen=True)
class AdjustConfig:
    steps: int = 500
    lr: float = 1e-2
    mode: str = "hard"
    K: float = DEFAULT_K


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.

    ``N`` takes precedence over ``H``; with neither set, two-objective
    problems use 50 subproblems and three-objective problems ``H = 12``.
    """

    problem: str = "zdt1"
    n_var: int | None = None
    N: int | None = None
    H: int | None = None
    T: int | None = None
    K_outer: int = 5
    N_inner: int = 50
    pfl: PflConfig = field(default_factory=PflConfig)
    adjust: AdjustConfig = field(default_factory=AdjustConfig)
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    ref_point: tuple[float, ...] | None = None
    metrics_K: float = DEFAULT_K
    seed: int = 0
    mode: str = "umoead"
    out: str | None = None

    def __post_init__(self):
        if self.problem.lower() not in problem_ids():
            raise ConfigurationError(f"unknown problem {self.problem!r}")
        object.__setattr__(self, "problem", self.problem.lower())
        if self.mode not in ("umoead", "moead"):
            raise ConfigurationError(f"mode must be 'umoead' or 'moead', got {self.mode!r}")
        for name in ("n_var", "N", "H", "T"):
            value = getattr(self, name)
            if value is not None and (int(value) != value or value < 1):
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
        if self.K_outer < 1 or self.N_inner < 0:
            raise ConfigurationError("K_outer must be >= 1 and N_inner >= 0")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")
        if not self.metrics_K > 0:
            raise ConfigurationError("metrics_K must be positive")
        if self.pfl.optimizer not in ("gd", "adam", "lbfgs"):
            raise ConfigurationError(f"unknown PFL optimizer {self.pfl.optimizer!r}")
        if self.pfl.epochs < 0 or self.adjust.steps < 0:
            raise ConfigurationError("epochs and steps must be nonnegative")
        if self.adjust.mode not in ("hard", "soft"):
            raise ConfigurationError(f"unknown adjustment mode {self.adjust.mode!r}")
        if self.ref_point is not None:
            object.__setattr__(self, "ref_point", tuple(float(v) for v in self.ref_point))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pfl"]["hidden"] = list(self.pfl.hidden)
        if self.ref_point is not None:
            out["ref_point"] = list(self.ref_point)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        data = dict(data)
        nested = {"pfl": PflConfig, "adjust": AdjustConfig, "operators": OperatorConfig}
        for key, kind in nested.items():
            if key in data:
                data[key] = _build(kind, data[key], key)
        if "pfl" in data and not isinstance(data["pfl"].hidden, tuple):
            data["pfl"] = PflConfig(**{**asdict(data["pfl"]), "hidden": tuple(data["pfl"].hidden)})
        return _build(cls, data, "config")

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: top level must be an object")
        return cls.from_dict(data)


def _build(kind, data, where: str):
    if isinstance(data, kind):
        return data
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where}: expected an object")
    allowed = {f.name for f in fields(kind)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return kind(**data)
    except TypeError as exc:
        raise ConfigurationError(f"{where}: {exc}") from exc


def initial_weights(config: RunConfig, m: int) -> np.ndarray:
    """Das-Dennis weights sized by ``N`` or ``H``.

    For ``m >= 3`` and an explicit ``N`` the smallest lattice with at least
    ``N`` points is thinned to ``N`` evenly spaced rows of its
    lexicographic order.
    """
    if config.N is None:
        H = config.H or _DEFAULT_H.get(m, 6)
        return das_dennis(m, H)
    N = config.N
    if N < 2:
        raise ConfigurationError("need at least two subproblems")
    if m == 2:
        return das_dennis(2, N - 1)
    H = 1
    while math.comb(H + m - 1, m - 1) < N:
        H += 1
    W = das_dennis(m, H)
    if W.shape[0] == N:
        return W
    keep = np.unique(np.round(np.linspace(0, W.shape[0] - 1, N)).astype(int))
    return W[keep]


@dataclass
class RoundLog:
    round: int
    generation: int
    evaluations: int
    metrics: MetricsRecord
    train_loss: float | None = None
    predicted_delta_before: float | None = None
    predicted_delta_after: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["metrics"] = self.metrics.to_dict()
        return out


@dataclass
class RunReport:
    config: RunConfig
    rounds: list[RoundLog]
    X: np.ndarray
    Y: np.ndarray
    weights: np.ndarray
    angles: np.ndarray
    timings: dict[str, float] = field(default_factory=dict)
    completed: bool = True

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "completed": self.completed,
            "rounds": [r.to_dict() for r in self.rounds],
            "X": self.X.tolist(),
            "Y": self.Y.tolist(),
            "weights": self.weights.tolist(),
            "angles": self.angles.tolist(),
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        return out

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), sort_keys=True)


def train_surrogate(model: PflModel, thetas, Y, cfg: PflConfig) -> tuple[PflModel, float]:
    """Warm-started PFL fit; returns the model and its final training loss."""
    model = pfl_train(model, thetas, Y, cfg.epochs, cfg.lr, cfg.momentum, optimizer=cfg.optimizer)
    return model, mse_loss_and_grad(model, thetas, Y)[0]


def _executor_from_env() -> ThreadPoolExecutor | None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return ThreadPoolExecutor(max_workers=threads) if threads > 1 else None


def run(config: RunConfig, surrogate=None) -> RunReport:
    """Execute a full run.

    Args:
        config: Run configuration.
        surrogate: Optional fixed model (``predict``/``input_jacobian``)
            used for the adjustment instead of training the PFL network.

    On a failure inside the loop, the partial report is exported to
    ``config.out`` (when set) before the exception propagates.
    """
    problem = get_problem(config.problem, config.n_var)
    W = initial_weights(config, problem.m)
    T = config.T if config.T is not None else default_neighborhood_size(W.shape[0])
    if config.ref_point is None and problem.nadir is None:
        raise ConfigurationError(f"problem {problem.id} has no known nadir point; set ref_point")
    ref = np.array(config.ref_point) if config.ref_point is not None else default_reference_point(problem.nadir)
    if ref.shape != (problem.m,):
        raise ConfigurationError(f"reference point must have {problem.m} components")

    timings = {"evolution": 0.0, "pfl": 0.0, "adjust": 0.0, "metrics": 0.0}
    tick = time.perf_counter()
    state = init_population(problem, W, T, config.seed)
    timings["evolution"] += time.perf_counter() - tick
    model = None
    if config.mode == "umoead" and surrogate is None:
        model = pfl_init(problem.m, config.pfl.hidden, seed=config.seed)

    rounds: list[RoundLog] = []
    executor = _executor_from_env()
    try:
        for k in range(config.K_outer):
            tick = time.perf_counter()
            for _ in range(config.N_inner):
                state = generation_step(state, problem, config.operators, executor)
            timings["evolution"] += time.perf_counter() - tick

            loss = before = after = None
            if config.mode == "umoead":
                thetas = state.angles
                tick = time.perf_counter()
                if surrogate is None:
                    model, loss = train_surrogate(model, thetas, state.Y, config.pfl)
                timings["pfl"] += time.perf_counter() - tick

                tick = time.perf_counter()
                result = adjust_angles(
                    surrogate if surrogate is not None else model,
                    thetas,
                    config.adjust.steps,
                    config.adjust.lr,
                    mode=config.adjust.mode,
                    K=config.adjust.K,
                )
                state = state.with_weights(angle_to_weight(result.angles))
                before, after = result.initial_delta, result.delta
                timings["adjust"] += time.perf_counter() - tick

            tick = time.perf_counter()
            record = report(state.Y, ref, config.metrics_K)
            timings["metrics"] += time.perf_counter() - tick
            rounds.append(RoundLog(k, state.generation, state.evaluations, record, loss, before, after))
            log.info(
                "round %d/%d gen=%d hv=%.4f spacing=%.4g delta=%.4g",
                k + 1, config.K_outer, state.generation, record.hv, record.spacing, record.delta,
            )
    except Exception:
        partial = RunReport(config, rounds, state.X, state.Y, state.weights, state.angles, timings, completed=False)
        if config.out:
            export(partial, config.out)
        raise
    finally:
        if executor is not None:
            executor.shutdown()
    return RunReport(config, rounds, state.X, state.Y, state.weights, state.angles, timings)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, row in enumerate(rows):
        writer.writerow([str(i)] + [_fmt(v) for v in row])
    return buf.getvalue()


def export(report_: RunReport, directory) -> list[Path]:
    """Write objectives.csv, weights.csv, metrics.json, config.json and timings.json.

    Everything except timings.json is a deterministic function of the run.
    """
    out = Path(directory)
    n, m = report_.X.shape[1], report_.Y.shape[1]
    files = {
        "objectives.csv": _csv_text(
            ["index"] + [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(m)],
            np.hstack([report_.X, report_.Y]),
        ),
        "weights.csv": _csv_text(
            ["index"] + [f"lambda{i}" for i in range(m)] + [f"theta{i}" for i in range(m - 1)],
            np.hstack([report_.weights, report_.angles]),
        ),
        "metrics.json": json.dumps(
            {"completed": report_.completed, "rounds": [r.to_dict() for r in report_.rounds]},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        "config.json": json.dumps(report_.config.to_dict(), indent=2, sort_keys=True) + "\n",
        "timings.json": json.dumps(report_.timings, indent=2, sort_keys=True) + "\n",
    }
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write run output: {exc.strerror}", str(exc.filename or out)) from exc
    return written


def read_objectives(path) -> np.ndarray:
    """Objective columns (``y*``) of an objectives.csv; plain numeric CSVs are
    read whole."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigurationError(f"{path}: empty file")
    header = rows[0]
    try:
        [float(v) for v in header]
        body, cols = rows, list(range(len(header)))
    except ValueError:
        body = rows[1:]
        cols = [i for i, name in enumerate(header) if name.strip().startswith("y")]
        if not cols:
            cols = [i for i, name in enumerate(header) if name.strip() != "index"]
    try:
        return np.array([[float(r[i]) for i in cols] for r in body if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"{path}: malformed numeric data ({exc})") from exc
