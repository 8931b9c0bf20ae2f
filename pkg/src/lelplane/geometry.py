"""Rotating sensor bar: frames, polar-to-Cartesian mapping, corner partition.

Angles are degrees at every public boundary. ``gamma`` is the rotation about
the x axis, 0 when the beams point along +y and 90 when they point along +z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PartitionError

__all__ = [
    "SensorArrayConfig", "ScanFrame", "ScanDataset", "PartitionedPoints",
    "capsule_positions", "frame_to_points", "dataset_points",
    "partition_at_critical", "correct_reflection_direction",
]

CORRECTION_MODES = ("slant", "redirect")


@dataclass(frozen=True)
class SensorArrayConfig:
    """Four capsules on a bar along x, ``radial_offset`` cm from the rotation axis."""

    capsule_offsets_x: tuple[float, float, float, float] = (-12.0, -4.0, 4.0, 12.0)
    radial_offset: float = 0.0

    def __post_init__(self):
        offsets = tuple(float(v) for v in self.capsule_offsets_x)
        if len(offsets) != 4:
            raise ValueError("the array has exactly four capsules")
        object.__setattr__(self, "capsule_offsets_x", offsets)
        object.__setattr__(self, "radial_offset", float(self.radial_offset))

    def to_dict(self) -> dict:
        return {"capsule_offsets_x_cm": list(self.capsule_offsets_x),
                "radial_offset_cm": self.radial_offset}

    @classmethod
    def from_dict(cls, d: dict) -> "SensorArrayConfig":
        return cls(tuple(d["capsule_offsets_x_cm"]), d["radial_offset_cm"])


@dataclass(frozen=True)
class ScanFrame:
    gamma: float
    distances: np.ndarray
    energies: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class ScanDataset:
    """Ordered scan frames. NaN in ``distances`` or ``energies`` marks a missing reading.

    ``energies`` may be None when the per-sensor energies still have to be
    computed from raw waveforms.
    """

    gammas: np.ndarray
    distances: np.ndarray
    energies: np.ndarray | None = None
    config: SensorArrayConfig = field(default_factory=SensorArrayConfig)
    rotation_range: tuple[float, float] = (-10.0, 110.0)

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float).ravel()
        d = np.asarray(self.distances, dtype=float).reshape(-1, 4)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "distances", d)
        if self.energies is not None:
            e = np.asarray(self.energies, dtype=float).reshape(-1, 4)
            object.__setattr__(self, "energies", e)
            if e.shape[0] != g.size:
                raise ValueError("energies and gammas describe different frame counts")
        if d.shape[0] != g.size:
            raise ValueError("distances and gammas describe different frame counts")
        if not np.all(np.isfinite(g)):
            raise ValueError("gamma values must be finite")
        present = d[~np.isnan(d)]
        if np.any(present <= 0) or not np.all(np.isfinite(present)):
            raise ValueError("distances must be positive")
        steps = np.diff(g)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("frames must be ordered by strictly monotone gamma")

    def __len__(self) -> int:
        return self.gammas.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScanDataset):
            return NotImplemented
        same_e = (self.energies is None and other.energies is None) or (
            self.energies is not None and other.energies is not None
            and np.array_equal(self.energies, other.energies, equal_nan=True))
        return (np.array_equal(self.gammas, other.gammas)
                and np.array_equal(self.distances, other.distances, equal_nan=True)
                and same_e and self.config == other.config
                and tuple(self.rotation_range) == tuple(other.rotation_range))

    def frame(self, k: int) -> ScanFrame:
        e = None if self.energies is None else self.energies[k]
        return ScanFrame(float(self.gammas[k]), self.distances[k], e)

    def with_energies(self, energies) -> "ScanDataset":
        return ScanDataset(self.gammas, self.distances, energies, self.config,
                           self.rotation_range)

    def reversed(self) -> "ScanDataset":
        e = None if self.energies is None else self.energies[::-1]
        return ScanDataset(self.gammas[::-1], self.distances[::-1], e, self.config,
                           self.rotation_range)


@dataclass(frozen=True)
class PartitionedPoints:
    """Points split at the corner frame.

    ``*_ids`` are ``(n, 2)`` integer arrays of ``(frame, sensor)`` for each
    point, in the same row order as the coordinates.
    """

    subset_y: np.ndarray
    subset_z: np.ndarray
    excluded: np.ndarray
    ids_y: np.ndarray
    ids_z: np.ndarray
    ids_excluded: np.ndarray
    critical_index: int


def capsule_positions(gamma: float, config: SensorArrayConfig) -> np.ndarray:
    g = np.deg2rad(gamma)
    r = config.radial_offset
    pos = np.zeros((4, 3))
    pos[:, 0] = config.capsule_offsets_x
    pos[:, 1] = r * np.cos(g)
    pos[:, 2] = r * np.sin(g)
    return pos


def _polar_points(gamma, distances, config, direction_gamma=None):
    caps = capsule_positions(gamma, config)
    dg = np.deg2rad(gamma if direction_gamma is None else direction_gamma)
    d = np.asarray(distances, dtype=float)
    pts = caps.copy()
    pts[:, 1] += d * np.cos(dg)
    pts[:, 2] += d * np.sin(dg)
    present = ~np.isnan(d)
    return pts[present], np.flatnonzero(present)


def frame_to_points(frame: ScanFrame, config: SensorArrayConfig) -> np.ndarray:
    """Cartesian echo points of one frame; missing distances give no point."""
    pts, _ = _polar_points(frame.gamma, frame.distances, config)
    return pts


def _frames_to_points(dataset, frames, config, transform=None):
    pts, ids = [], []
    for k in frames:
        gamma, d = dataset.gammas[k], dataset.distances[k]
        direction = None
        if transform is not None:
            d, direction = transform(gamma, d)
        p, sensors = _polar_points(gamma, d, config, direction)
        pts.append(p)
        ids.append(np.column_stack([np.full(sensors.size, k), sensors]))
    if not pts:
        return np.empty((0, 3)), np.empty((0, 2), dtype=int)
    return np.vstack(pts), np.vstack(ids).astype(int)


def dataset_points(dataset: ScanDataset, config: SensorArrayConfig | None = None):
    """All raw points of a scan and their ``(frame, sensor)`` ids."""
    config = dataset.config if config is None else config
    return _frames_to_points(dataset, range(len(dataset)), config)


def _split(dataset, critical):
    idx = critical if isinstance(critical, (int, np.integer)) else critical.critical_index
    n = len(dataset)
    if not 0 <= idx < n:
        raise PartitionError(f"critical index {idx} outside a {n}-frame scan")
    if idx == 0 or idx == n - 1:
        raise PartitionError(
            f"critical frame {idx} is at the scan boundary; cannot form two subsets")
    return int(idx), range(0, idx), range(idx + 1, n)


def partition_at_critical(dataset: ScanDataset, critical) -> PartitionedPoints:
    """Frames before the corner go to the y-plane subset, frames after it to the z-plane."""
    idx, before, after = _split(dataset, critical)
    cfg = dataset.config
    py, iy = _frames_to_points(dataset, before, cfg)
    pz, iz = _frames_to_points(dataset, after, cfg)
    pe, ie = _frames_to_points(dataset, [idx], cfg)
    return PartitionedPoints(py, pz, pe, iy, iz, ie, idx)


def correct_reflection_direction(dataset: ScanDataset, critical,
                                 config: SensorArrayConfig | None = None,
                                 mode: str = "slant") -> PartitionedPoints:
    """Partition and re-map each subset assuming the echo returns along its plane normal.

    The measured range is the perpendicular distance to the attributed plane.
    ``mode="slant"`` converts it to the range along the beam (``d/cos`` for
    the y subset, ``d/sin`` for the z subset) and then maps with the true
    angle, which puts the point where the beam meets the plane.
    ``mode="redirect"`` keeps ``d`` and maps it along the normal instead
    (effective angle 0 or 90 deg); every point of a subset then shares the
    capsule's height, so with a zero radial offset the subsets are lines.
    The corner frame is left uncorrected.
    """
    if mode not in CORRECTION_MODES:
        raise ValueError(f"unknown correction mode {mode!r}; expected one of {CORRECTION_MODES}")
    config = dataset.config if config is None else config
    idx, before, after = _split(dataset, critical)

    def along(normal_gamma):
        def transform(gamma, d):
            if mode == "redirect":
                return d, normal_gamma
            c = np.cos(np.deg2rad(gamma - normal_gamma))
            if abs(c) < 1e-9:
                raise PartitionError(f"beam at gamma={gamma} deg is parallel to its plane")
            return d / c, None
        return transform

    py, iy = _frames_to_points(dataset, before, config, along(0.0))
    pz, iz = _frames_to_points(dataset, after, config, along(90.0))
    pe, ie = _frames_to_points(dataset, [idx], config)
    return PartitionedPoints(py, pz, pe, iy, iz, ie, idx)
