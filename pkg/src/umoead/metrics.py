"""Quality indicators: hypervolume, spacing, sparsity and (soft) minimal distance."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigurationError
from .uniformity import DEFAULT_K, min_pairwise, pairwise_distances

log = logging.getLogger(__name__)

MC_SAMPLES = 10**6


def _objectives(Y, min_points: int = 1) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ConfigurationError(f"objective set must be 2-D, got shape {Y.shape}")
    if Y.shape[0] < min_points:
        raise ConfigurationError(f"need at least {min_points} objective vectors, got {Y.shape[0]}")
    return Y


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((P[:, 1], P[:, 0]))
    area = 0.0
    ceiling = ref[1]
    for y1, y2 in P[order]:
        if y2 < ceiling:
            area += (ref[0] - y1) * (ceiling - y2)
            ceiling = y2
    return area


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.argsort(P[:, 2], kind="stable")]
    tops = np.append(P[1:, 2], ref[2])
    volume = 0.0
    for k in range(P.shape[0]):
        height = tops[k] - P[k, 2]
        if height > 0.0:
            volume += _hv2d(P[: k + 1, :2], ref[:2]) * height
    return volume


def hypervolume_mc(Y, ref, samples: int = MC_SAMPLES, seed: int = 0, chunk: int = 200_000) -> tuple[float, float]:
    """Monte Carlo hypervolume estimate and its standard error.

    Samples uniformly in the box spanned by the componentwise minimum of
    the contributing points and ``ref``.
    """
    Y = _objectives(Y)
    ref = np.asarray(ref, dtype=float)
    P = Y[np.all(Y < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0, 0.0
    low = P.min(axis=0)
    box = float(np.prod(ref - low))
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    while remaining > 0:
        size = min(chunk, remaining)
        U = low + rng.random((size, P.shape[1])) * (ref - low)
        covered = np.zeros(size, dtype=bool)
        for p in P:
            covered |= np.all(U >= p, axis=1)
        hits += int(covered.sum())
        remaining -= size
    frac = hits / samples
    return box * frac, box * np.sqrt(frac * (1.0 - frac) / samples)


def hypervolume(Y, ref, *, samples: int = MC_SAMPLES, seed: int = 0) -> float:
    """Volume dominated by ``Y`` and bounded by ``ref`` (minimization).

    Only points strictly better than ``ref`` in every objective count.
    Exact for two (sweep) and three (slicing) objectives; Monte Carlo
    beyond that, with the standard error logged at debug level.
    """
    Y = _objectives(Y)
    ref = np.asarray(ref, dtype=float)
    m = Y.shape[1]
    if m < 2:
        raise ConfigurationError(f"hypervolume needs m >= 2, got {m}")
    if ref.shape != (m,):
        raise ConfigurationError(f"reference point must have length {m}")
    P = Y[np.all(Y < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    if m == 2:
        return float(_hv2d(P, ref))
    if m == 3:
        return float(_hv3d(P, ref))
    value, se = hypervolume_mc(P, ref, samples=samples, seed=seed)
    log.debug("Monte Carlo hypervolume %.6g +/- %.2g (m=%d)", value, se, m)
    return value


def nearest_neighbor_distances(Y) -> np.ndarray:
    D = pairwise_distances(_objectives(Y, 2))
    np.fill_diagonal(D, np.inf)
    return D.min(axis=1)


def spacing(Y) -> float:
    """Population standard deviation of nearest-neighbor distances."""
    return float(np.std(nearest_neighbor_distances(Y)))


def sparsity(Y) -> float:
    """Squared gaps between consecutive sorted values, summed over objectives,
    divided by ``N - 1``."""
    Y = _objectives(Y, 2)
    gaps = np.diff(np.sort(Y, axis=0), axis=0)
    return float(np.sum(gaps**2) / (Y.shape[0] - 1))


@dataclass(frozen=True)
class MetricsRecord:
    hv: float
    spacing: float
    sparsity: float
    delta: float
    soft_delta: float
    ref_point: tuple[float, ...]
    K: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ref_point"] = list(self.ref_point)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> MetricsRecord:
        keys = {"hv", "spacing", "sparsity", "delta", "soft_delta", "ref_point", "K"}
        if set(data) != keys:
            raise ConfigurationError(f"metrics record keys must be {sorted(keys)}, got {sorted(data)}")
        return cls(
            hv=float(data["hv"]),
            spacing=float(data["spacing"]),
            sparsity=float(data["sparsity"]),
            delta=float(data["delta"]),
            soft_delta=float(data["soft_delta"]),
            ref_point=tuple(float(v) for v in data["ref_point"]),
            K=float(data["K"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> MetricsRecord:
        return cls.from_dict(json.loads(text))


def report(Y, ref, K: float = DEFAULT_K) -> MetricsRecord:
    """All five indicators for one objective set."""
    Y = _objectives(Y, 2)
    sep = min_pairwise(Y, K)
    return MetricsRecord(
        hv=hypervolume(Y, ref),
        spacing=spacing(Y),
        sparsity=sparsity(Y),
        delta=sep.delta,
        soft_delta=sep.soft_delta,
        ref_point=tuple(float(v) for v in np.asarray(ref, dtype=float)),
        K=float(K),
    )


def default_reference_point(nadir) -> np.ndarray:
    return 1.1 * np.asarray(nadir, dtype=float)
