"""Fitting errors, MAD-based spread and the single-pass 10 % pre-filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FilterError
from .planes import LelFitResult, MinimizerConfig, as_points, fit_least_entropy_like, residuals

__all__ = [
    "MAD_TO_SIGMA", "ErrorStats", "FilterOutcome", "PrefilterResult",
    "fitting_errors", "error_stats", "prefilter", "fit_with_prefilter",
]

#: Normal-consistency constant of the median absolute deviation.
MAD_TO_SIGMA = 1.4826
FILTER_FRACTION = 0.1
_EQUAL_ERROR_SPAN = 1e-15


@dataclass(frozen=True)
class ErrorStats:
    errors: np.ndarray
    sorted_errors: np.ndarray
    median_error: float
    mad: float
    sigma: float


@dataclass(frozen=True)
class FilterOutcome:
    kept: np.ndarray
    removed: np.ndarray
    kept_mask: np.ndarray
    threshold: float


@dataclass(frozen=True)
class PrefilterResult:
    raw: LelFitResult
    filtered: LelFitResult
    before: ErrorStats
    after: ErrorStats
    outcome: FilterOutcome


def fitting_errors(points, params) -> np.ndarray:
    return residuals(points, params)


def error_stats(errors) -> ErrorStats:
    """Median error, MAD about it (absolute deviations) and ``sigma = 1.4826 * MAD``."""
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise ValueError("error_stats needs at least one error")
    mu = float(np.median(e))
    mad = float(np.median(np.abs(e - mu)))
    return ErrorStats(errors=e, sorted_errors=np.sort(e), median_error=mu,
                      mad=mad, sigma=MAD_TO_SIGMA * mad)


def prefilter(points, errors, fraction: float = FILTER_FRACTION) -> FilterOutcome:
    """Keep points whose ``|error|`` is at most ``fraction * max|error|``.

    When all ``|error|`` are equal there is nothing to discriminate and
    every point is kept.
    """
    pts = as_points(points)
    e = np.abs(np.asarray(errors, dtype=float).ravel())
    if e.size != pts.shape[0]:
        raise ValueError("points and errors differ in length")
    if e.size == 0:
        raise ValueError("prefilter needs at least one point")
    threshold = fraction * float(e.max())
    if e.max() - e.min() < _EQUAL_ERROR_SPAN:
        mask = np.ones(e.size, dtype=bool)
    else:
        mask = e <= threshold
    return FilterOutcome(kept=pts[mask], removed=pts[~mask], kept_mask=mask,
                         threshold=threshold)


def fit_with_prefilter(points, config: MinimizerConfig = MinimizerConfig(),
                       passes: int = 1) -> PrefilterResult:
    """LEL fit, drop the points with large errors, refit on the rest.

    ``passes`` repeats the filter/refit step; the default single pass is
    the reference procedure. ``outcome.kept_mask`` always refers to the
    input points.
    """
    pts = as_points(points)
    if pts.shape[0] < 8:
        raise FilterError(f"pre-filtered fit needs at least 8 points, got {pts.shape[0]}")
    if passes < 1:
        raise ValueError("passes must be >= 1")
    raw = fit_least_entropy_like(pts, config)
    before = error_stats(fitting_errors(pts, raw.params))

    fit, mask = raw, np.ones(pts.shape[0], dtype=bool)
    threshold = 0.0
    for _ in range(passes):
        current = pts[mask]
        step = prefilter(current, fitting_errors(current, fit.params))
        threshold = step.threshold
        new_mask = mask.copy()
        new_mask[np.flatnonzero(mask)] = step.kept_mask
        if new_mask.sum() < 4:
            raise FilterError(
                f"only {int(new_mask.sum())} points survive the pre-filter", raw=raw)
        mask = new_mask
        fit = fit_least_entropy_like(pts[mask], config)

    after = error_stats(fitting_errors(pts[mask], fit.params))
    outcome = FilterOutcome(kept=pts[mask], removed=pts[~mask], kept_mask=mask,
                            threshold=threshold)
    return PrefilterResult(raw=raw, filtered=fit, before=before, after=after,
                           outcome=outcome)
