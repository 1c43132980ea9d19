"""Aggregation, ideal-point bookkeeping and weight parameterizations."""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ConfigurationError, DomainError

WEIGHT_FLOOR = 1e-6
_DEGENERATE_SINE = 1e-12


def clamp_weight(lam) -> np.ndarray:
    """Lift components below ``WEIGHT_FLOOR`` and renormalize onto the simplex."""
    lam = np.maximum(np.asarray(lam, dtype=float), WEIGHT_FLOOR)
    return lam / lam.sum(axis=-1, keepdims=True)


def mtche(y, lam, z) -> float:
    """Modified Tchebycheff aggregation ``max_i (y_i - z_i) / lam_i``.

    ``lam`` is passed through :func:`clamp_weight` first so boundary
    weights never divide by zero.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.isnan(y).any() or np.isnan(z).any() or np.isnan(lam).any():
        raise DomainError("mtche received NaN input")
    return float(np.max((y - z) / clamp_weight(lam)))


def mtche_matrix(Y, W, z) -> np.ndarray:
    """``out[a, b] = mtche(Y[a], W[b], z)`` for every objective/weight pair."""
    Y = np.asarray(Y, dtype=float)
    W = clamp_weight(W)
    return np.max((Y[:, None, :] - np.asarray(z, dtype=float)) / W[None, :, :], axis=-1)


def angle_to_weight(theta) -> np.ndarray:
    """Map weight angles in ``[0, pi/2]^(m-1)`` onto the simplex.

    ``sqrt(lam)`` is the point on the unit sphere with these spherical
    coordinates, so the components are ``cos^2(t1)``,
    ``sin^2(t1) cos^2(t2)``, ..., ``sin^2(t1) ... sin^2(t_{m-1})``.
    Accepts a single angle vector or a batch of shape ``(N, m-1)``.
    """
    theta = np.asarray(theta, dtype=float)
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    lead = np.cumprod(s2, axis=-1)
    ones = np.ones(theta.shape[:-1] + (1,))
    prefix = np.concatenate([ones, lead], axis=-1)
    tail = np.concatenate([c2, ones], axis=-1)
    return prefix * tail


def weight_to_angle(lam) -> np.ndarray:
    """Inverse of :func:`angle_to_weight`.

    Uses ``theta_k = atan2(sqrt(lam_{k+1} + ... + lam_m), sqrt(lam_k))``,
    which equals the arccos recursion but stays accurate near the poles.
    Once the remaining mass ``sqrt(lam_k + ... + lam_m)`` (the leading sine
    product) drops below 1e-12 the remaining angles are set to 0.
    """
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    # suffix sums: rest[..., k] = lam_k + ... + lam_{m-1}
    rest = np.cumsum(lam[..., ::-1], axis=-1)[..., ::-1]
    sines = np.sqrt(rest[..., :-1])
    theta = np.arctan2(np.sqrt(rest[..., 1:]), np.sqrt(lam[..., :-1]))
    return np.where(sines < _DEGENERATE_SINE, 0.0, theta)


def das_dennis(m: int, H: int) -> np.ndarray:
    """Simplex-lattice weights with components in ``{0, 1/H, ..., 1}``.

    Returns all ``C(H + m - 1, m - 1)`` vectors, sorted lexicographically.
    """
    if m < 1 or H < 1:
        raise ConfigurationError(f"das_dennis needs m >= 1 and H >= 1, got m={m}, H={H}")
    points = []
    # stars and bars: choose m-1 divider positions among H + m - 1 slots
    for bars in itertools.combinations(range(H + m - 1), m - 1):
        edges = (-1,) + bars + (H + m - 1,)
        points.append(tuple(edges[i + 1] - edges[i] - 1 for i in range(m)))
    points.sort()
    return np.array(points, dtype=float) / H


def update_ideal(z, y) -> np.ndarray:
    """Componentwise minimum of the ideal point and a new objective vector."""
    return np.minimum(np.asarray(z, dtype=float), np.asarray(y, dtype=float))
