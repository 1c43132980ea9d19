"""Maximal separation of predicted objectives.

:func:`adjust_angles` runs projected gradient ascent on the smallest
pairwise distance among ``model.predict(angles)``. The min is not smooth,
so each step follows the subgradient of the closest pair only (averaged
over exact ties). A smooth log-sum-exp objective is available as an
alternative.

Any object with ``predict(thetas) -> (K, m)`` and
``input_jacobian(thetas) -> (K, m, m-1)`` can serve as the model, e.g. a
trained :class:`~umoead.pfl.PflModel` or a :class:`CallableSurrogate`.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigurationError

HALF_PI = 0.5 * math.pi
DEFAULT_K = 50.0


@dataclass(frozen=True)
class SeparationReport:
    delta: float
    argpair: tuple[int, int]
    soft_delta: float
    K: float = DEFAULT_K


def pairwise_distances(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    return np.sqrt(((Y[:, None, :] - Y[None, :, :]) ** 2).sum(axis=-1))


def _check_set(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] < 2:
        raise ConfigurationError(f"need at least two objective vectors, got shape {Y.shape}")
    return Y


def min_pairwise(Y, K: float = DEFAULT_K) -> SeparationReport:
    """Smallest pairwise distance and the first pair (lexicographic) attaining it."""
    Y = _check_set(Y)
    D = pairwise_distances(Y)
    iu, ju = np.triu_indices(Y.shape[0], k=1)
    flat = D[iu, ju]
    k = int(np.argmin(flat))
    return SeparationReport(float(flat[k]), (int(iu[k]), int(ju[k])), _soft_from_distances(D, K), float(K))


def _soft_from_distances(D: np.ndarray, K: float) -> float:
    off = ~np.eye(D.shape[0], dtype=bool)
    return float(-logsumexp(-K * D[off]) / K)


def soft_min_pairwise(Y, K: float = DEFAULT_K) -> float:
    """``-(1/K) log sum_{i != j} exp(-K * |y_i - y_j|)`` over ordered pairs."""
    Y = _check_set(Y)
    if not K > 0:
        raise ConfigurationError(f"K must be positive, got {K}")
    return _soft_from_distances(pairwise_distances(Y), K)


def project_box(theta) -> np.ndarray:
    """Clamp weight angles into ``[0, pi/2]``."""
    return np.clip(np.asarray(theta, dtype=float), 0.0, HALF_PI)


class CallableSurrogate:
    """Wrap plain functions as a surrogate model.

    Args:
        forward: Maps a ``(K, m-1)`` array of angles to ``(K, m)`` objectives.
        jacobian: Maps angles to ``(K, m, m-1)`` Jacobians. When omitted,
            central differences with step ``eps`` are used.
    """

    def __init__(self, forward: Callable, jacobian: Callable | None = None, eps: float = 1e-6):
        self._forward = forward
        self._jacobian = jacobian
        self.eps = eps

    def predict(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 1:
            return np.asarray(self._forward(theta[None, :]), dtype=float)[0]
        return np.asarray(self._forward(theta), dtype=float)

    def input_jacobian(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        single = theta.ndim == 1
        batch = theta[None, :] if single else theta
        if self._jacobian is not None:
            J = np.asarray(self._jacobian(batch), dtype=float)
        else:
            cols = []
            for d in range(batch.shape[1]):
                step = np.zeros(batch.shape[1])
                step[d] = self.eps
                diff = self.predict(batch + step) - self.predict(batch - step)
                cols.append(diff / (2.0 * self.eps))
            J = np.stack(cols, axis=-1)
        return J[0] if single else J


@dataclass
class AscentResult:
    """Outcome of :func:`adjust_angles`.

    ``angles`` is the best iterate seen; ``delta`` its predicted minimal
    separation; ``history`` the separation after every step.
    """

    angles: np.ndarray
    delta: float
    initial_delta: float
    status: str = "ok"
    lr_final: float = 0.0
    history: list[float] = field(default_factory=list, repr=False)


def _min_pairs(D: np.ndarray, tie_tol: float) -> tuple[float, np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(D.shape[0], k=1)
    flat = D[iu, ju]
    delta = float(flat.min())
    tied = flat <= delta + tie_tol
    return delta, iu[tied], ju[tied]


def _hard_direction(model, thetas, Y, D, tie_tol) -> np.ndarray:
    _, I, J = _min_pairs(D, tie_tol)
    grad = np.zeros_like(thetas)
    involved = np.unique(np.concatenate([I, J]))
    jac = dict(zip(involved.tolist(), model.input_jacobian(thetas[involved])))
    for i, j in zip(I.tolist(), J.tolist()):
        u = (Y[i] - Y[j]) / D[i, j]
        grad[i] += jac[i].T @ u
        grad[j] -= jac[j].T @ u
    return grad / len(I)


def _soft_direction(model, thetas, Y, D, K) -> np.ndarray:
    N = Y.shape[0]
    off = ~np.eye(N, dtype=bool)
    logw = np.where(off, -K * D, -np.inf)
    w = np.exp(logw - logsumexp(logw[off]))
    # d soft / d y_i = sum_j 2 w_ij (y_i - y_j) / rho_ij; ordered pairs count twice
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(off & (D > 0), 2.0 * w / D, 0.0)
    gy = coef.sum(axis=1)[:, None] * Y - coef @ Y
    J = model.input_jacobian(thetas)
    return np.einsum("kmd,km->kd", J, gy)


def _jitter_duplicates(thetas: np.ndarray, D: np.ndarray, size: float) -> np.ndarray:
    out = thetas.copy()
    N = thetas.shape[0]
    rank = 0
    for j in range(N):
        if np.any(D[:j, j] == 0.0):
            rank += 1
            direction = np.where(out[j] < 0.25 * math.pi, 1.0, -1.0)
            out[j] = out[j] + size * rank * direction
    return project_box(out)


def adjust_angles(
    model,
    angles,
    steps: int = 500,
    lr: float = 1e-2,
    *,
    mode: str = "hard",
    K: float = DEFAULT_K,
    patience: int = 20,
    tie_tol: float = 1e-12,
    jitter: float = 1e-3,
) -> AscentResult:
    """Spread predicted objectives apart by projected gradient ascent on angles.

    Each step computes ``Y = model.predict(angles)`` and moves the angles
    along the gradient of the minimal pairwise distance (``mode="hard"``)
    or of its log-sum-exp relaxation with sharpness ``K``
    (``mode="soft"``), then clamps them back into ``[0, pi/2]``. In hard
    mode only the angles of the closest pair (or of all pairs tied within
    ``tie_tol``) move. The step size halves after ``patience`` consecutive
    steps without a new best separation. The best iterate is returned.

    If predictions coincide at the start, the later duplicates are nudged
    by ``jitter`` first. A model whose outputs stay identical for every
    input gets ``status="degenerate"`` and the input angles back.
    """
    if mode not in ("hard", "soft"):
        raise ConfigurationError(f"unknown ascent mode {mode!r}")
    thetas = project_box(np.array(angles, dtype=float))
    if thetas.ndim != 2 or thetas.shape[0] < 2:
        raise ConfigurationError(f"need at least two angle vectors, got shape {thetas.shape}")
    original = thetas.copy()

    Y = np.asarray(model.predict(thetas), dtype=float)
    D = pairwise_distances(Y)
    initial_delta = float(D[np.triu_indices(len(D), 1)].min())
    if initial_delta == 0.0:
        thetas = _jitter_duplicates(thetas, D, jitter)
        Y = np.asarray(model.predict(thetas), dtype=float)
        D = pairwise_distances(Y)
        if float(D[np.triu_indices(len(D), 1)].min()) == 0.0:
            warnings.warn("surrogate predictions collapse to duplicates; angles left unchanged", RuntimeWarning)
            return AscentResult(original, 0.0, 0.0, status="degenerate", lr_final=lr)

    delta = float(D[np.triu_indices(len(D), 1)].min())
    floor = delta

    def score(D, delta):
        # soft mode ranks iterates by the relaxed objective, never below the start
        if mode == "hard":
            return delta
        return _soft_from_distances(D, K) if delta >= floor else -math.inf

    best_thetas, best_delta, best_score = thetas.copy(), delta, score(D, delta)
    history = []
    stale = 0
    step_size = lr
    for _ in range(steps):
        if delta == 0.0:
            break
        if mode == "hard":
            direction = _hard_direction(model, thetas, Y, D, tie_tol)
        else:
            direction = _soft_direction(model, thetas, Y, D, K)
        thetas = project_box(thetas + step_size * direction)
        Y = np.asarray(model.predict(thetas), dtype=float)
        D = pairwise_distances(Y)
        delta = float(D[np.triu_indices(len(D), 1)].min())
        history.append(delta)
        current = score(D, delta)
        if current > best_score:
            best_thetas, best_delta, best_score = thetas.copy(), delta, current
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                step_size *= 0.5
                stale = 0
    return AscentResult(best_thetas, best_delta, initial_delta, lr_final=step_size, history=history)
