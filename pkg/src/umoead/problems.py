"""Benchmark problems (ZDT1/2/4/6, DTLZ1-4) and weight-to-objective oracles.

Every problem is a :class:`Problem` record holding its bounds, an
evaluator and, when the Pareto front is known in closed form, a residual
function that is negative below the front and positive above it along any
ray from the origin. The residual drives :func:`numeric_h_oracle`, a
bisection search that is independent of the closed forms in
:func:`analytic_h`.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, DomainError, NoIntersectionError, NotAvailableError

Evaluator = Callable[[np.ndarray], np.ndarray]
FrontResidual = Callable[[np.ndarray], float]
FrontValid = Callable[[np.ndarray], bool]


@dataclass(frozen=True)
class Problem:
    """A box-constrained multiobjective minimization problem.

    Attributes:
        id: Stable lowercase identifier, e.g. ``"zdt1"``.
        m: Number of objectives.
        n: Number of decision variables.
        lower, upper: Per-variable bounds, each of length ``n``.
        evaluator: Maps a decision vector to an ``m``-vector of objectives.
        pf_residual: Signed distance-like function of an objective vector;
            zero on the Pareto front, increasing along rays from the origin.
        pf_valid: Predicate restricting where a zero of ``pf_residual``
            actually belongs to the attainable front.
        nadir: Nadir point of the true front, used for reference points.
    """

    id: str
    m: int
    n: int
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Evaluator = field(repr=False)
    pf_residual: FrontResidual | None = field(default=None, repr=False)
    pf_valid: FrontValid | None = field(default=None, repr=False)
    nadir: np.ndarray | None = None

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (self.n,) or upper.shape != (self.n,):
            raise ConfigurationError(f"{self.id}: bounds must have length n={self.n}")
        if not np.all(lower < upper):
            raise ConfigurationError(f"{self.id}: lower bounds must be strictly below upper bounds")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.nadir is not None:
            nadir = np.asarray(self.nadir, dtype=float)
            nadir.flags.writeable = False
            object.__setattr__(self, "nadir", nadir)

    @property
    def has_front(self) -> bool:
        return self.pf_residual is not None


# ---------------------------------------------------------------------------
# ZDT family


def _zdt_g_linear(x: np.ndarray) -> float:
    return 1.0 + 9.0 * np.sum(x[1:]) / (len(x) - 1)


def _zdt1(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    g = _zdt_g_linear(x)
    return np.array([f1, g * (1.0 - math.sqrt(f1 / g))])


def _zdt2(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    g = _zdt_g_linear(x)
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


def _zdt4(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    rest = x[1:]
    g = 1.0 + 10.0 * len(rest) + np.sum(rest**2 - 10.0 * np.cos(4.0 * np.pi * rest))
    return np.array([f1, g * (1.0 - math.sqrt(f1 / g))])


def _zdt6(x: np.ndarray) -> np.ndarray:
    f1 = 1.0 - math.exp(-4.0 * x[0]) * math.sin(6.0 * math.pi * x[0]) ** 6
    g = 1.0 + 9.0 * (np.sum(x[1:]) / (len(x) - 1)) ** 0.25
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


def _zdt6_f1_min() -> float:
    # f1 is minimized near the first peak of sin^6, around x1 = 1/12
    res = minimize_scalar(
        lambda t: 1.0 - math.exp(-4.0 * t) * math.sin(6.0 * math.pi * t) ** 6,
        bounds=(0.0, 1.0 / 6.0),
        method="bounded",
        options={"xatol": 1e-14},
    )
    return float(res.fun)


ZDT6_F1_MIN = _zdt6_f1_min()


def _convex_front(y: np.ndarray) -> float:
    return y[1] - (1.0 - math.sqrt(max(y[0], 0.0)))


def _concave_front(y: np.ndarray) -> float:
    return y[1] - (1.0 - y[0] ** 2)


def _zdt_valid(y: np.ndarray) -> bool:
    return 0.0 <= y[0] <= 1.0


def _zdt6_valid(y: np.ndarray) -> bool:
    return ZDT6_F1_MIN <= y[0] <= 1.0


def zdt1(n: int = 30) -> Problem:
    _check_n("zdt1", n, 2)
    return Problem("zdt1", 2, n, np.zeros(n), np.ones(n), _zdt1, _convex_front, _zdt_valid, np.ones(2))


def zdt2(n: int = 30) -> Problem:
    _check_n("zdt2", n, 2)
    return Problem("zdt2", 2, n, np.zeros(n), np.ones(n), _zdt2, _concave_front, _zdt_valid, np.ones(2))


def zdt4(n: int = 10) -> Problem:
    _check_n("zdt4", n, 2)
    lower = np.full(n, -10.0)
    upper = np.full(n, 10.0)
    lower[0], upper[0] = 0.0, 1.0
    return Problem("zdt4", 2, n, lower, upper, _zdt4, _convex_front, _zdt_valid, np.ones(2))


def zdt6(n: int = 10) -> Problem:
    _check_n("zdt6", n, 2)
    return Problem(
        "zdt6", 2, n, np.zeros(n), np.ones(n), _zdt6, _concave_front, _zdt6_valid, np.ones(2)
    )


# ---------------------------------------------------------------------------
# DTLZ family


def _dtlz_g_rastrigin(xm: np.ndarray) -> float:
    return 100.0 * (len(xm) + np.sum((xm - 0.5) ** 2 - np.cos(20.0 * np.pi * (xm - 0.5))))


def _dtlz_g_sphere(xm: np.ndarray) -> float:
    return float(np.sum((xm - 0.5) ** 2))


def _linear_shape(x: np.ndarray, m: int, g: float) -> np.ndarray:
    f = np.empty(m)
    for i in range(m):
        val = 0.5 * (1.0 + g)
        val *= np.prod(x[: m - 1 - i])
        if i > 0:
            val *= 1.0 - x[m - 1 - i]
        f[i] = val
    return f


def _spherical_shape(x: np.ndarray, m: int, g: float) -> np.ndarray:
    angles = 0.5 * np.pi * x[: m - 1]
    f = np.empty(m)
    for i in range(m):
        val = 1.0 + g
        val *= np.prod(np.cos(angles[: m - 1 - i]))
        if i > 0:
            val *= math.sin(angles[m - 1 - i])
        f[i] = val
    return f


def _make_dtlz(kind: int, m: int) -> Evaluator:
    def evaluate(x: np.ndarray) -> np.ndarray:
        xm = x[m - 1 :]
        if kind == 1:
            return _linear_shape(x, m, _dtlz_g_rastrigin(xm))
        if kind == 2:
            return _spherical_shape(x, m, _dtlz_g_sphere(xm))
        if kind == 3:
            return _spherical_shape(x, m, _dtlz_g_rastrigin(xm))
        xa = x.copy()
        xa[: m - 1] = xa[: m - 1] ** 100.0
        return _spherical_shape(xa, m, _dtlz_g_sphere(xm))

    return evaluate


def _simplex_front(y: np.ndarray) -> float:
    return float(np.sum(y)) - 0.5


def _sphere_front(y: np.ndarray) -> float:
    return float(np.dot(y, y)) - 1.0


def _nonnegative(y: np.ndarray) -> bool:
    return bool(np.all(y >= 0.0))


def _dtlz(kind: int, n: int, m: int) -> Problem:
    pid = f"dtlz{kind}"
    if m < 2:
        raise ConfigurationError(f"{pid}: need m >= 2, got {m}")
    _check_n(pid, n, m)
    if kind == 1:
        front, nadir = _simplex_front, np.full(m, 0.5)
    else:
        front, nadir = _sphere_front, np.ones(m)
    return Problem(pid, m, n, np.zeros(n), np.ones(n), _make_dtlz(kind, m), front, _nonnegative, nadir)


def dtlz1(n: int = 7, m: int = 3) -> Problem:
    return _dtlz(1, n, m)


def dtlz2(n: int = 12, m: int = 3) -> Problem:
    return _dtlz(2, n, m)


def dtlz3(n: int = 12, m: int = 3) -> Problem:
    return _dtlz(3, n, m)


def dtlz4(n: int = 12, m: int = 3) -> Problem:
    return _dtlz(4, n, m)


def _check_n(pid: str, n: int, minimum: int) -> None:
    if int(n) != n or n < minimum:
        raise ConfigurationError(f"{pid}: decision dimension must be an integer >= {minimum}, got {n}")


# ---------------------------------------------------------------------------
# Registry

_REGISTRY: dict[str, Callable[..., Problem]] = {
    "zdt1": zdt1,
    "zdt2": zdt2,
    "zdt4": zdt4,
    "zdt6": zdt6,
    "dtlz1": dtlz1,
    "dtlz2": dtlz2,
    "dtlz3": dtlz3,
    "dtlz4": dtlz4,
}


def register_problem(pid: str, factory: Callable[..., Problem], *, overwrite: bool = False) -> None:
    """Register a problem factory under a lowercase id.

    The factory is called with an optional ``n`` keyword and must return a
    :class:`Problem`. ``pf_residual`` may be omitted when the front is
    unknown; the numeric oracle then raises :class:`NotAvailableError`.
    """
    pid = pid.lower()
    if pid in _REGISTRY and not overwrite:
        raise ConfigurationError(f"problem {pid!r} is already registered")
    _REGISTRY[pid] = factory


def problem_ids() -> list[str]:
    return sorted(_REGISTRY)


def get_problem(pid: str, n: int | None = None) -> Problem:
    try:
        factory = _REGISTRY[pid.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown problem {pid!r}; known: {', '.join(problem_ids())}") from None
    return factory() if n is None else factory(n=n)


# ---------------------------------------------------------------------------
# Evaluation and oracles


def evaluate(problem: Problem, x) -> np.ndarray:
    """Evaluate ``problem`` at decision vector ``x``.

    Raises:
        DomainError: If ``x`` has the wrong length or leaves the box; the
            message names the first offending index.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise DomainError(f"{problem.id}: expected a vector of length {problem.n}, got shape {x.shape}")
    bad = np.flatnonzero(~((x >= problem.lower) & (x <= problem.upper)))
    if bad.size:
        i = int(bad[0])
        raise DomainError(
            f"{problem.id}: x[{i}] = {x[i]!r} outside [{problem.lower[i]}, {problem.upper[i]}]"
        )
    return np.asarray(problem.evaluator(x), dtype=float)


def _positive_weight(lam, m: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (m,):
        raise DomainError(f"weight must have length {m}, got shape {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise DomainError("weight has non-finite components")
    if np.any(lam <= 0.0):
        raise DomainError(f"weight components must be strictly positive, got {lam.tolist()}")
    return lam


def analytic_h(problem: Problem, lam) -> np.ndarray:
    """Closed-form Pareto objective on the ray of ``lam`` (ideal point at 0).

    Available for ZDT1, ZDT2 and DTLZ1. For the ZDT problems the ray
    scale ``k`` is written in its rationalized form, algebraically equal to
    the textbook expression but free of cancellation as ``lam[0] -> 1``.
    """
    lam = _positive_weight(lam, problem.m)
    if problem.id == "dtlz1":
        return 0.5 * lam
    l1 = lam[0]
    if problem.id == "zdt1":
        k = 2.0 / (2.0 - l1 + math.sqrt(4.0 * l1 - 3.0 * l1 * l1))
    elif problem.id == "zdt2":
        k = 2.0 / (1.0 - l1 + math.sqrt(5.0 * l1 * l1 - 2.0 * l1 + 1.0))
    else:
        raise NotAvailableError(f"no closed-form weight-to-objective map for {problem.id!r}")
    return k * np.array([l1, 1.0 - l1])


def numeric_h_oracle(
    problem: Problem,
    lam,
    tol: float = 1e-12,
    *,
    z=None,
    k_max: float = 10.0,
    max_iter: int = 200,
) -> np.ndarray:
    """Intersect the ray ``{z + k * lam : k > 0}`` with the true front by bisection.

    The bracket is ``(0, k_max]``; bisection stops once its width drops
    below ``tol`` or after ``max_iter`` halvings.

    Raises:
        DomainError: If a weight component is not strictly positive.
        NotAvailableError: If the problem has no known front.
        NoIntersectionError: If the ray misses the attainable front.
    """
    if not problem.has_front:
        raise NotAvailableError(f"{problem.id!r} has no known Pareto front parameterization")
    lam = _positive_weight(lam, problem.m)
    z = np.zeros(problem.m) if z is None else np.asarray(z, dtype=float)
    residual = problem.pf_residual

    lo, hi = 0.0, float(k_max)
    if residual(z) >= 0.0 or residual(z + hi * lam) < 0.0:
        raise NoIntersectionError(f"{problem.id}: ray {lam.tolist()} has no front crossing in (0, {k_max}]")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if residual(z + mid * lam) < 0.0:
            lo = mid
        else:
            hi = mid
    y = z + 0.5 * (lo + hi) * lam
    if problem.pf_valid is not None and not problem.pf_valid(y):
        raise NoIntersectionError(
            f"{problem.id}: ray {lam.tolist()} crosses the front curve outside the attainable range"
        )
    return y
