"""Echo energies, the inverse-quadratic energy/distance model and corner detection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EnergyModelError

__all__ = [
    "Waveform", "EnergyModel", "EnergyPrediction", "CriticalDetection",
    "waveform_energy", "total_energy", "calibrate_energy_model",
    "predict_energy", "median_distance", "detect_critical_position",
]

REFERENCE_VALID_RANGE = (90.0, 180.0)


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_interval: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("a waveform needs at least two samples")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")

    @property
    def duration(self) -> float:
        return (self.samples.size - 1) * self.sample_interval


@dataclass(frozen=True)
class EnergyModel:
    """``E(d) = 1 / (phi0*d**2 + phi1*d + phi2)`` with ``d`` in cm, ``E`` in V^2 s."""

    phi0: float
    phi1: float
    phi2: float
    valid_range: tuple[float, float] = REFERENCE_VALID_RANGE

    def __post_init__(self):
        lo, hi = self.valid_range
        if not lo < hi:
            raise EnergyModelError(f"invalid validity range {self.valid_range}")
        # a quadratic's minimum over an interval sits at an end or at the vertex
        cands = [lo, hi]
        if self.phi0 != 0.0:
            vertex = -self.phi1 / (2.0 * self.phi0)
            if lo < vertex < hi:
                cands.append(vertex)
        if min(self.denominator(d) for d in cands) <= 0.0:
            raise EnergyModelError(
                "model denominator is not positive over its validity range "
                f"{self.valid_range}")

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.phi0, self.phi1, self.phi2])

    def denominator(self, d):
        return self.phi0 * d * d + self.phi1 * d + self.phi2

    def in_range(self, d) -> bool:
        return self.valid_range[0] <= d <= self.valid_range[1]


#: Calibration reported for the original rig.
REFERENCE_MODEL = EnergyModel(-0.00000806, 0.0034138, -0.00193113)


class EnergyPrediction(NamedTuple):
    energy: float
    extrapolated: bool


@dataclass(frozen=True)
class CriticalDetection:
    critical_index: int
    critical_angle: float
    ratios: np.ndarray
    total_energies: np.ndarray
    predicted_energies: np.ndarray
    median_distances: np.ndarray
    skipped_frames: tuple[int, ...] = ()
    extrapolated_frames: tuple[int, ...] = ()


def waveform_energy(w: Waveform) -> float:
    """Trapezoidal integral of the squared signal over the capture."""
    return float(np.trapezoid(w.samples ** 2, dx=w.sample_interval))


def total_energy(per_sensor) -> float:
    e = np.asarray(per_sensor, dtype=float)
    if e.shape != (4,):
        raise ValueError("expected four per-sensor energies")
    if np.any(e < 0):
        raise ValueError("energies must be nonnegative")
    return float(e.sum())


def calibrate_energy_model(distances, energies,
                           valid_range=REFERENCE_VALID_RANGE) -> EnergyModel:
    """Least-squares fit of ``1/E`` against ``[d**2, d, 1]``.

    Solved with an orthogonal factorisation rather than by forming ``A^T A``
    explicitly; squaring a Vandermonde matrix in centimetres throws away
    most of the available digits.
    """
    d = np.asarray(distances, dtype=float).ravel()
    e = np.asarray(energies, dtype=float).ravel()
    if d.shape != e.shape:
        raise ValueError("distances and energies differ in length")
    if np.unique(d).size < 3:
        raise EnergyModelError("calibration needs at least 3 distinct distances")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise EnergyModelError("calibration energies must be positive and finite")
    a = np.vander(d, 3)
    # column scaling keeps the factorisation well conditioned
    scale = np.abs(a).max(axis=0)
    coef, _, rank, _ = np.linalg.lstsq(a / scale, 1.0 / e, rcond=None)
    if rank < 3:
        raise EnergyModelError("Vandermonde system is rank deficient")
    phi = coef / scale
    return EnergyModel(float(phi[0]), float(phi[1]), float(phi[2]), tuple(valid_range))


def predict_energy(model: EnergyModel, d: float) -> EnergyPrediction:
    den = model.denominator(d)
    if not den > 0.0:
        raise EnergyModelError(f"model denominator is {den:.6g} at d={d} cm")
    return EnergyPrediction(float(1.0 / den), not model.in_range(d))


def median_distance(distances) -> float:
    return float(np.median(np.asarray(distances, dtype=float)))


def detect_critical_position(dataset, model: EnergyModel) -> CriticalDetection:
    """Locate the corner as the frame with the largest measured/predicted energy ratio.

    ``dataset`` needs ``gammas`` and ``(frames, 4)`` ``distances`` and
    ``energies`` arrays (a :class:`~lelplane.geometry.ScanDataset`); NaN
    marks a missing reading. Frames with any missing reading are skipped
    and their ratio is NaN. Ties go to the lowest frame index.
    """
    if dataset.energies is None:
        raise ValueError("dataset carries no energies; compute them from waveforms first")
    g = np.asarray(dataset.gammas, dtype=float).ravel()
    d = np.asarray(dataset.distances, dtype=float).reshape(-1, 4)
    e = np.asarray(dataset.energies, dtype=float).reshape(-1, 4)
    if not (g.size == d.shape[0] == e.shape[0]) or g.size == 0:
        raise ValueError("gammas, distances and energies must describe the same frames")

    nframes = g.size
    ratios = np.full(nframes, np.nan)
    totals = np.full(nframes, np.nan)
    predicted = np.full(nframes, np.nan)
    medians = np.full(nframes, np.nan)
    skipped, extrapolated = [], []
    for k in range(nframes):
        if np.any(np.isnan(d[k])) or np.any(np.isnan(e[k])):
            skipped.append(k)
            continue
        medians[k] = median_distance(d[k])
        totals[k] = total_energy(e[k])
        try:
            pred = predict_energy(model, medians[k])
        except EnergyModelError as exc:
            raise EnergyModelError(f"frame {k} (gamma={g[k]} deg): {exc}") from None
        predicted[k] = pred.energy
        if pred.extrapolated:
            extrapolated.append(k)
        ratios[k] = totals[k] / pred.energy
    if len(skipped) == nframes:
        raise EnergyModelError("no frame has a complete set of readings")

    # np.nanargmax returns the first maximum
    idx = int(np.nanargmax(ratios))
    return CriticalDetection(
        critical_index=idx, critical_angle=float(g[idx]), ratios=ratios,
        total_energies=totals, predicted_energies=predicted,
        median_distances=medians, skipped_frames=tuple(skipped),
        extrapolated_frames=tuple(extrapolated),
    )
