"""MOEA/D population state, variation operators and the elite update.

Randomness is drawn from independent per-subproblem streams keyed by
``(seed, generation, subproblem)``, so candidate generation gives the same
result whether subproblems run one after another or on a thread pool.
Ideal-point and elite updates always happen in a serial commit phase.
"""

from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .problems import Problem, evaluate
from .scalarize import clamp_weight, weight_to_angle

IDEAL_OFFSET = 1e-6
_INIT_KEY = 0
_GENERATION_KEY = 1


@dataclass(frozen=True)
class OperatorConfig:
    """Variation and replacement settings.

    ``p_m=None`` means ``1/n``. ``replacement`` is ``"classic"`` (a child
    replaces at most ``nr`` neighbors it improves on) or ``"literal"`` (each
    subproblem picks the best incumbent among its neighborhood and itself).
    """

    eta_c: float = 15.0
    p_c: float = 0.9
    eta_m: float = 20.0
    p_m: float | None = None
    replacement: str = "classic"
    nr: int = 2

    def __post_init__(self):
        if self.replacement not in ("classic", "literal"):
            raise ConfigurationError(f"unknown replacement mode {self.replacement!r}")
        if self.nr < 1:
            raise ConfigurationError("nr must be at least 1")
        if not (0.0 <= self.p_c <= 1.0) or (self.p_m is not None and not 0.0 <= self.p_m <= 1.0):
            raise ConfigurationError("operator probabilities must lie in [0, 1]")
        if self.eta_c < 0 or self.eta_m < 0:
            raise ConfigurationError("distribution indices must be nonnegative")


@dataclass
class PopulationState:
    """One solution per subproblem plus the shared bookkeeping.

    Row ``j`` of ``X``/``Y``/``weights``/``angles`` belongs to subproblem
    ``j``; ``neighborhoods[j]`` lists the ``T`` subproblems whose weights
    are closest to ``weights[j]`` (``j`` itself first).
    """

    X: np.ndarray
    Y: np.ndarray
    weights: np.ndarray
    angles: np.ndarray
    neighborhoods: np.ndarray
    ideal: np.ndarray
    seed: int
    generation: int = 0
    evaluations: int = field(default=0, compare=False)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def T(self) -> int:
        return self.neighborhoods.shape[1]

    def copy(self) -> PopulationState:
        return replace(
            self,
            X=self.X.copy(),
            Y=self.Y.copy(),
            weights=self.weights.copy(),
            angles=self.angles.copy(),
            neighborhoods=self.neighborhoods.copy(),
            ideal=self.ideal.copy(),
        )

    def with_weights(self, weights) -> PopulationState:
        """Install new subproblem weights, keeping each index's incumbent."""
        weights = np.array(weights, dtype=float)
        if weights.shape != self.weights.shape:
            raise ConfigurationError(f"expected weights of shape {self.weights.shape}, got {weights.shape}")
        new = self.copy()
        new.weights = weights
        new.angles = weight_to_angle(weights)
        new.neighborhoods = compute_neighborhoods(weights, self.T)
        return new

    def aggregation_values(self, z=None) -> np.ndarray:
        """``mtche(Y[j], weights[j], z)`` for every subproblem."""
        z = self.ideal if z is None else np.asarray(z, dtype=float)
        return np.max((self.Y - z) / clamp_weight(self.weights), axis=1)


def compute_neighborhoods(weights, T: int) -> np.ndarray:
    """Indices of the ``T`` nearest weights (Euclidean) for every weight.

    A stable sort keeps ties in index order, so a weight always lists
    itself first.
    """
    W = np.asarray(weights, dtype=float)
    N = W.shape[0]
    if not 2 <= T <= N:
        raise ConfigurationError(f"neighborhood size T={T} must satisfy 2 <= T <= N={N}")
    dist = np.sqrt(((W[:, None, :] - W[None, :, :]) ** 2).sum(axis=-1))
    return np.argsort(dist, axis=1, kind="stable")[:, :T]


def subproblem_rng(seed: int, generation: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_GENERATION_KEY, generation, j)))


def init_population(problem: Problem, weights, T: int, seed: int) -> PopulationState:
    """Sample one solution per weight uniformly inside the box and evaluate it."""
    W = np.array(weights, dtype=float)
    if W.ndim != 2 or W.shape[1] != problem.m:
        raise ConfigurationError(f"weights must have shape (N, {problem.m}), got {W.shape}")
    N = W.shape[0]
    if not 2 <= T <= N:
        raise ConfigurationError(f"neighborhood size T={T} must satisfy 2 <= T <= N={N}")
    if seed < 0:
        raise ConfigurationError("seed must be nonnegative")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_INIT_KEY,)))
    X = problem.lower + rng.random((N, problem.n)) * (problem.upper - problem.lower)
    Y = np.array([evaluate(problem, x) for x in X])
    return PopulationState(
        X=X,
        Y=Y,
        weights=W,
        angles=weight_to_angle(W),
        neighborhoods=compute_neighborhoods(W, T),
        ideal=Y.min(axis=0) - IDEAL_OFFSET,
        seed=int(seed),
        evaluations=N,
    )


def sbx_crossover(x1, x2, lower, upper, eta_c: float, p_c: float, rng: np.random.Generator) -> np.ndarray:
    """Bounded simulated binary crossover returning a single child.

    Each variable is recombined with probability ``p_c`` (otherwise the
    child copies ``x1``). Recombined variables draw a spread factor from
    the bounded SBX density and the two offspring values are swapped with
    probability 1/2 before the first one is returned.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = x1.shape[0]

    cross = rng.random(n) < p_c
    u = rng.random(n)
    swap = rng.random(n) < 0.5
    child = x1.copy()
    active = cross & (np.abs(x1 - x2) > 1e-14)
    if not active.any():
        return child

    a, b = x1[active], x2[active]
    lo, hi = lower[active], upper[active]
    y1, y2 = np.minimum(a, b), np.maximum(a, b)
    span = y2 - y1
    ua = u[active]
    expo = 1.0 / (eta_c + 1.0)

    def spread(beta):
        alpha = 2.0 - beta ** (-(eta_c + 1.0))
        return np.where(
            ua <= 1.0 / alpha,
            (ua * alpha) ** expo,
            (1.0 / (2.0 - ua * alpha)) ** expo,
        )

    c1 = 0.5 * (y1 + y2 - spread(1.0 + 2.0 * (y1 - lo) / span) * span)
    c2 = 0.5 * (y1 + y2 + spread(1.0 + 2.0 * (hi - y2) / span) * span)
    c1 = np.clip(c1, lo, hi)
    c2 = np.clip(c2, lo, hi)
    child[active] = np.where(swap[active], c2, c1)
    return child


def poly_mutation(x, lower, upper, eta_m: float, p_m: float, rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation; each variable mutates with probability ``p_m``."""
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = x.shape[0]
    mutate = rng.random(n) < p_m
    u = rng.random(n)
    out = x.copy()
    if not mutate.any():
        return out

    y, lo, hi, r = x[mutate], lower[mutate], upper[mutate], u[mutate]
    width = hi - lo
    d1 = (y - lo) / width
    d2 = (hi - y) / width
    power = 1.0 / (eta_m + 1.0)
    low_side = r < 0.5
    val_lo = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1) ** (eta_m + 1.0)
    val_hi = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2) ** (eta_m + 1.0)
    deltaq = np.where(low_side, val_lo**power - 1.0, 1.0 - val_hi**power)
    out[mutate] = np.clip(y + deltaq * width, lo, hi)
    return out


def _candidate(state: PopulationState, problem: Problem, ops: OperatorConfig, j: int):
    rng = subproblem_rng(state.seed, state.generation, j)
    hood = state.neighborhoods[j]
    a, b = rng.choice(hood.shape[0], size=2, replace=False)
    child = sbx_crossover(state.X[hood[a]], state.X[hood[b]], problem.lower, problem.upper, ops.eta_c, ops.p_c, rng)
    p_m = 1.0 / problem.n if ops.p_m is None else ops.p_m
    child = poly_mutation(child, problem.lower, problem.upper, ops.eta_m, p_m, rng)
    order = rng.permutation(hood)
    return child, evaluate(problem, child), order


def generation_step(
    state: PopulationState,
    problem: Problem,
    ops: OperatorConfig | None = None,
    executor: Executor | None = None,
) -> PopulationState:
    """Advance the population by one generation and return the new state.

    Candidates (parent choice, SBX, mutation, evaluation) are produced for
    every subproblem first, optionally on ``executor``. The commit phase
    then lowers the ideal point with all children and performs the elite
    update against that single ideal point, so each subproblem's
    aggregation value can only decrease.
    """
    ops = ops or OperatorConfig()
    jobs = range(state.N)
    if executor is None:
        candidates = [_candidate(state, problem, ops, j) for j in jobs]
    else:
        candidates = list(executor.map(lambda j: _candidate(state, problem, ops, j), jobs))

    new = state.copy()
    children = np.array([c[0] for c in candidates])
    child_y = np.array([c[1] for c in candidates])
    new.ideal = np.minimum(state.ideal, child_y.min(axis=0))
    z = new.ideal
    W = clamp_weight(state.weights)

    if ops.replacement == "classic":
        for j, (_, _, order) in enumerate(candidates):
            replaced = 0
            child_g = np.max((child_y[j] - z) / W[order], axis=1)
            for pos, i in enumerate(order):
                if child_g[pos] < np.max((new.Y[i] - z) / W[i]):
                    new.X[i] = children[j]
                    new.Y[i] = child_y[j]
                    replaced += 1
                    if replaced >= ops.nr:
                        break
    else:
        # literal reading: best incumbent of B(j) plus j itself, on a snapshot
        for j in range(state.N):
            pool = np.concatenate(([j], state.neighborhoods[j]))
            g = np.max((state.Y[pool] - z) / W[j], axis=1)
            best = pool[int(np.argmin(g))]
            new.X[j] = state.X[best]
            new.Y[j] = state.Y[best]

    new.generation = state.generation + 1
    new.evaluations = state.evaluations + state.N
    return new


def default_neighborhood_size(N: int) -> int:
    return min(N, max(2, math.ceil(N / 10)))
