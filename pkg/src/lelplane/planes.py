"""Plane model ``t1*x + t2*y + t3*z = 1`` and the three estimators fitting it.

Points are passed around as ``(N, 3)`` float arrays in centimetres. The
parameter vector lives in :class:`PlaneParams`; every estimator returns one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._neldermead import MinimizerConfig, SimplexResult, nelder_mead
from .errors import ConvergenceError, DegenerateGeometryError

__all__ = [
    "PlaneParams", "LelFitResult", "RansacFitResult", "MinimizerConfig",
    "as_points", "residual", "residuals", "sum_of_squares",
    "relative_squared_residuals", "entropy_like_cost", "lel_cost",
    "fit_least_squares", "multi_start_points", "fit_least_entropy_like",
    "fit_ransac_plane", "to_axis_explicit", "from_axis_explicit",
]

#: Below this sum of squared residuals the fit counts as perfect (H = 0).
ZERO_SUM_OF_SQUARES = 1e-18
#: Largest acceptable condition number of the LS normal matrix.
MAX_NORMAL_CONDITION = 1e12


@dataclass(frozen=True)
class PlaneParams:
    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        vals = (self.theta1, self.theta2, self.theta3)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"plane parameters must be finite, got {vals}")
        if all(v == 0.0 for v in vals):
            raise ValueError("all-zero parameter vector does not describe a plane")

    @classmethod
    def from_array(cls, theta) -> "PlaneParams":
        t = np.asarray(theta, dtype=float).reshape(3)
        return cls(float(t[0]), float(t[1]), float(t[2]))

    @property
    def theta(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.theta))

    def distances(self, points) -> np.ndarray:
        """Signed perpendicular distances of ``points`` from the plane (cm)."""
        return residuals(points, self) / self.norm

    def __neg__(self) -> "PlaneParams":
        return PlaneParams(-self.theta1, -self.theta2, -self.theta3)


@dataclass(frozen=True)
class LelFitResult:
    params: PlaneParams
    cost: float
    start_index: int
    iterations: int
    converged: bool
    start_costs: tuple[float, ...] = ()


@dataclass(frozen=True)
class RansacFitResult:
    params: PlaneParams
    inlier_count: int
    inlier_threshold: float
    seed: int
    inliers: np.ndarray | None = None


def _theta(params) -> np.ndarray:
    if isinstance(params, PlaneParams):
        return params.theta
    return np.asarray(params, dtype=float).reshape(3)


def as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.size == 3:
        pts = pts.reshape(1, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (N, 3) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must have finite coordinates")
    return pts


def residual(point, params) -> float:
    """Algebraic residual ``t . v - 1`` of a single point."""
    return float(np.dot(np.asarray(point, dtype=float), _theta(params)) - 1.0)


def residuals(points, params) -> np.ndarray:
    return as_points(points) @ _theta(params) - 1.0


def sum_of_squares(res) -> float:
    res = np.asarray(res, dtype=float)
    return float(np.dot(res, res))


def relative_squared_residuals(res) -> np.ndarray:
    """Squared residuals normalised to sum to one.

    Raises ``ValueError`` when all residuals vanish; callers handle that case
    separately (the cost is defined as zero there).
    """
    res = np.asarray(res, dtype=float).ravel()
    if res.size == 0:
        raise ValueError("empty residual set")
    d = sum_of_squares(res)
    if d == 0.0:
        raise ValueError("sum of squared residuals is zero")
    return res * res / d


def entropy_like_cost(res) -> float:
    """Normalised entropy of the relative squared residuals, in [0, 1].

    Natural logs; ``0 log 0`` is taken as 0. A sum of squares below
    ``ZERO_SUM_OF_SQUARES`` is treated as an exact fit and scores 0.
    """
    res = np.asarray(res, dtype=float).ravel()
    n = res.size
    if n < 2:
        raise ValueError("entropy-like cost needs at least two residuals")
    d = sum_of_squares(res)
    if d < ZERO_SUM_OF_SQUARES:
        return 0.0
    q = res * res / d
    q = q[q > 0.0]
    h = -float(np.dot(q, np.log(q))) / math.log(n)
    return min(max(0.0, h), 1.0)


def lel_cost(theta, points) -> float:
    return entropy_like_cost(as_points(points) @ _theta(theta) - 1.0)


def fit_least_squares(points) -> PlaneParams:
    """Normal-equations solution of ``G theta = 1``.

    Raises :class:`DegenerateGeometryError` for fewer than three points or a
    singular normal matrix (collinear points, or a plane through the origin,
    which this parameterisation cannot represent).
    """
    g = as_points(points)
    if g.shape[0] < 3:
        raise DegenerateGeometryError(f"need at least 3 points, got {g.shape[0]}")
    gtg = g.T @ g
    cond = np.linalg.cond(gtg)
    if not np.isfinite(cond) or cond > MAX_NORMAL_CONDITION:
        raise DegenerateGeometryError(
            f"normal matrix is singular or ill-conditioned (cond={cond:.3g}); "
            "points are collinear or the plane passes through the origin")
    theta = np.linalg.solve(gtg, g.T @ np.ones(g.shape[0]))
    return PlaneParams.from_array(theta)


def multi_start_points(theta_ls) -> list[PlaneParams]:
    """Six LEL starting vectors built around the LS solution.

    ``[t, u, w, -t, -u, -w]`` where ``u`` and ``w`` are orthogonal to ``t``
    and to each other and share its norm. ``u`` comes from Gram-Schmidt on
    the canonical axis least aligned with ``t``, ``w = t_hat x u``.
    """
    t = _theta(theta_ls)
    norm = float(np.linalg.norm(t))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("multi-start needs a nonzero, finite LS solution")
    t_hat = t / norm
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(t_hat)))] = 1.0
    u = axis - np.dot(axis, t_hat) * t_hat
    u /= np.linalg.norm(u)
    w = np.cross(t_hat, u)
    w /= np.linalg.norm(w)
    base = [t, norm * u, norm * w]
    return [PlaneParams.from_array(v) for v in base + [-v for v in base]]


def fit_least_entropy_like(points, config: MinimizerConfig = MinimizerConfig(),
                           theta_ls: PlaneParams | None = None) -> LelFitResult:
    """Least entropy-like plane fit by six-start Nelder-Mead.

    The LS fit seeds :func:`multi_start_points`; the run with the least
    final cost wins, ties going to the lowest start index. Raises
    :class:`ConvergenceError` (carrying the best result) if no start
    converged within ``config.max_iter``.
    """
    pts = as_points(points)
    if pts.shape[0] < 4:
        raise DegenerateGeometryError(f"LEL fit needs at least 4 points, got {pts.shape[0]}")
    if theta_ls is None:
        theta_ls = fit_least_squares(pts)
    starts = multi_start_points(theta_ls)

    def cost(theta):
        return entropy_like_cost(pts @ theta - 1.0)

    def run(start: PlaneParams) -> SimplexResult:
        return nelder_mead(cost, start.theta, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(run, starts))
    else:
        runs = [run(s) for s in starts]

    best_index = None
    for i, r in enumerate(runs):
        if not np.all(np.isfinite(r.x)) or not np.any(r.x):
            continue
        if best_index is None or r.fun < runs[best_index].fun:
            best_index = i
    if best_index is None:
        raise ConvergenceError("every LEL start produced an invalid parameter vector")

    best = runs[best_index]
    params = PlaneParams.from_array(best.x)
    result = LelFitResult(
        params=params,
        cost=cost(params.theta),
        start_index=best_index,
        iterations=best.iterations,
        converged=best.converged,
        start_costs=tuple(r.fun for r in runs),
    )
    if not any(r.converged for r in runs):
        raise ConvergenceError(
            f"no LEL start converged within {config.max_iter} iterations", best=result)
    return result


def _plane_through(p3: np.ndarray) -> np.ndarray | None:
    try:
        if abs(np.linalg.det(p3)) < 1e-12 * max(1.0, np.abs(p3).max() ** 3):
            return None
        theta = np.linalg.solve(p3, np.ones(3))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(theta)) or not np.any(theta):
        return None
    return theta


def fit_ransac_plane(points, threshold: float, trials: int = 500,
                     seed: int = 0) -> RansacFitResult:
    """Three-point random sample consensus followed by an LS refit.

    Inliers lie within ``threshold`` cm (perpendicular distance) of the
    candidate plane. Among candidates with equal support the one with the
    smaller inlier sum of squared distances wins.
    """
    pts = as_points(points)
    n = pts.shape[0]
    if n < 3:
        raise DegenerateGeometryError(f"RANSAC needs at least 3 points, got {n}")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    rng = np.random.default_rng(seed)
    best_mask, best_key = None, None
    for _ in range(trials):
        idx = rng.choice(n, size=3, replace=False)
        theta = _plane_through(pts[idx])
        if theta is None:
            continue
        dist = np.abs(pts @ theta - 1.0) / np.linalg.norm(theta)
        mask = dist <= threshold
        count = int(mask.sum())
        if count < 3:
            continue
        key = (-count, float(np.sum(dist[mask] ** 2)))
        if best_key is None or key < best_key:
            best_key, best_mask = key, mask
    if best_mask is None:
        raise DegenerateGeometryError("no RANSAC candidate gathered 3 or more inliers")

    inliers = pts[best_mask]
    if inliers.shape[0] == 3:
        params = PlaneParams.from_array(_plane_through(inliers))
    else:
        params = fit_least_squares(inliers)
    return RansacFitResult(params=params, inlier_count=int(best_mask.sum()),
                           inlier_threshold=float(threshold), seed=seed,
                           inliers=np.flatnonzero(best_mask))


_AXES = {"X": 0, "Y": 1, "Z": 2}


def to_axis_explicit(params, axis: str) -> tuple[float, float, float]:
    """Rewrite the plane as ``axis = a*u + b*v + c``.

    ``u, v`` are the remaining coordinates in x, y, z order, so axis ``"Y"``
    gives ``y = a*x + b*z + c`` and ``"Z"`` gives ``z = a*x + b*y + c``.
    """
    t = _theta(params)
    k = _AXES[axis.upper()]
    if t[k] == 0.0:
        raise ValueError(f"plane is parallel to the {axis.lower()} axis; no explicit form")
    others = [i for i in range(3) if i != k]
    return (float(-t[others[0]] / t[k]), float(-t[others[1]] / t[k]), float(1.0 / t[k]))


def from_axis_explicit(coeffs, axis: str) -> PlaneParams:
    a, b, c = (float(v) for v in coeffs)
    if c == 0.0:
        raise ValueError("zero offset: plane passes through the origin")
    k = _AXES[axis.upper()]
    others = [i for i in range(3) if i != k]
    t = np.zeros(3)
    t[k] = 1.0 / c
    t[others[0]] = -a * t[k]
    t[others[1]] = -b * t[k]
    return PlaneParams.from_array(t)
