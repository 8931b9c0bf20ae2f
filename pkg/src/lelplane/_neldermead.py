"""Plain Nelder-Mead simplex minimizer with explicit termination rules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class MinimizerConfig:
    """Nelder-Mead settings shared by every LEL fit.

    Initial simplex: the start point plus one vertex per coordinate, offset
    by ``max(step_fraction * |x_i|, min_step)``. The run stops when the cost
    spread across the simplex drops below ``fatol``, when the simplex
    diameter drops below ``xatol``, or after ``max_iter`` iterations.
    ``workers > 1`` runs the independent multi-start minimizations on a
    thread pool; results do not depend on it.
    """

    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    step_fraction: float = 0.05
    min_step: float = 1e-4
    fatol: float = 1e-12
    xatol: float = 1e-10
    max_iter: int = 2000
    workers: int = 1

    def __post_init__(self):
        if not (self.reflection > 0 and self.expansion > 1
                and 0 < self.contraction < 1 and 0 < self.shrink < 1):
            raise ValueError("invalid Nelder-Mead coefficients")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool


def initial_simplex(x0: np.ndarray, config: MinimizerConfig) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += max(config.step_fraction * abs(x0[i]), config.min_step)
    return simplex


def nelder_mead(func: Callable[[np.ndarray], float], x0,
                config: MinimizerConfig = MinimizerConfig()) -> SimplexResult:
    simplex = initial_simplex(x0, config)
    fvals = np.array([func(v) for v in simplex])
    n = simplex.shape[1]
    alpha, gamma = config.reflection, config.expansion
    rho, sigma = config.contraction, config.shrink

    iterations = 0
    converged = False
    while True:
        # stable sort keeps the earlier vertex first on ties -> deterministic
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]

        spread = fvals[-1] - fvals[0]
        diameter = np.max(np.abs(simplex[1:] - simplex[0]))
        if spread < config.fatol or diameter < config.xatol:
            converged = True
            break
        if iterations >= config.max_iter:
            break
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        if fr < fvals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue

        if fr < fvals[-1]:
            # outside contraction
            xc = centroid + rho * (xr - centroid)
            fc = func(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)
            fc = func(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue

        best = simplex[0]
        for j in range(1, n + 1):
            simplex[j] = best + sigma * (simplex[j] - best)
            fvals[j] = func(simplex[j])

    return SimplexResult(x=simplex[0].copy(), fun=float(fvals[0]),
                         iterations=iterations, converged=converged)
