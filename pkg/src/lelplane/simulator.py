"""Synthetic L-shaped scans with ground truth.

Two walls, ``y = y_plane_offset`` and ``z = z_plane_offset``, scanned by the
rotating four-capsule bar. Each beam reports the perpendicular range to the
wall it points at. Beams within ``corner_half_width`` degrees of the corner
get their range inflated (multiple reflections). Per-sensor energies follow
the energy/distance model, boosted by Gaussian bumps in gamma at the two
direct-reflection angles and, more strongly, at the corner.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .energy import EnergyModel, REFERENCE_MODEL
from .geometry import ScanDataset, SensorArrayConfig, capsule_positions
from .planes import PlaneParams, to_axis_explicit

__all__ = ["SceneConfig", "GroundTruth", "simulate_scan", "evaluate_against_truth",
           "scene_test1", "scene_test2"]


@dataclass(frozen=True)
class SceneConfig:
    y_plane_offset: float = 157.0
    z_plane_offset: float = 106.0
    rotation_range: tuple[float, float] = (-10.0, 110.0)
    steps: int = 184
    noise_sigma: float = 0.0
    corner_half_width: float = 0.0
    outlier_magnitude: float = 0.0
    outlier_min: float = 0.0
    outlier_probability: float = 1.0
    seed: int = 0
    array: SensorArrayConfig = field(default_factory=SensorArrayConfig)
    direct_bump_height: float = 1.0
    direct_bump_width: float = 4.0
    corner_bump_height: float = 4.0
    corner_bump_width: float = 1.0
    energy_noise: float = 0.0

    def __post_init__(self):
        if self.y_plane_offset <= 0 or self.z_plane_offset <= 0:
            raise ValueError("plane offsets must be positive")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if self.noise_sigma < 0 or self.energy_noise < 0:
            raise ValueError("noise levels must be nonnegative")
        if not 0 <= self.outlier_min <= self.outlier_magnitude:
            raise ValueError("need 0 <= outlier_min <= outlier_magnitude")
        if not 0 <= self.outlier_probability <= 1:
            raise ValueError("outlier_probability must lie in [0, 1]")
        object.__setattr__(self, "rotation_range", tuple(float(v) for v in self.rotation_range))
        if isinstance(self.array, dict):
            object.__setattr__(self, "array", SensorArrayConfig.from_dict(self.array))

    @property
    def critical_angle(self) -> float:
        return math.degrees(math.atan2(self.z_plane_offset, self.y_plane_offset))

    @property
    def step_size(self) -> float:
        lo, hi = self.rotation_range
        return (hi - lo) / (self.steps - 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rotation_range"] = list(self.rotation_range)
        d["array"] = self.array.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        d = dict(d)
        if "array" in d:
            d["array"] = SensorArrayConfig.from_dict(d["array"])
        if "rotation_range" in d:
            d["rotation_range"] = tuple(d["rotation_range"])
        return cls(**d)


def scene_test1(seed: int = 0, **overrides) -> SceneConfig:
    """Contaminated scene shaped like the first rig test (184 steps).

    The corner window covers 20 % of the sweep and every beam inside it is
    inflated by 10-30 cm.
    """
    params = dict(steps=184, noise_sigma=0.2, corner_half_width=12.0,
                  outlier_min=10.0, outlier_magnitude=30.0, seed=seed)
    params.update(overrides)
    return SceneConfig(**params)


def scene_test2(seed: int = 0, **overrides) -> SceneConfig:
    return scene_test1(seed, **{"steps": 220, **overrides})


@dataclass(frozen=True)
class GroundTruth:
    y_plane: PlaneParams
    z_plane: PlaneParams
    critical_angle: float
    outlier_flags: np.ndarray
    plane_labels: np.ndarray

    def to_dict(self) -> dict:
        return {
            "y_plane_theta_per_cm": self.y_plane.theta.tolist(),
            "z_plane_theta_per_cm": self.z_plane.theta.tolist(),
            "critical_angle_deg": self.critical_angle,
            "outlier_flags": self.outlier_flags.astype(int).tolist(),
            "plane_labels": self.plane_labels.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(PlaneParams.from_array(d["y_plane_theta_per_cm"]),
                   PlaneParams.from_array(d["z_plane_theta_per_cm"]),
                   float(d["critical_angle_deg"]),
                   np.asarray(d["outlier_flags"], dtype=bool),
                   np.asarray(d["plane_labels"], dtype="<U1"))


def _gauss(x, mu, width):
    return np.exp(-0.5 * ((x - mu) / width) ** 2)


def simulate_scan(scene: SceneConfig,
                  energy_model: EnergyModel = REFERENCE_MODEL) -> tuple[ScanDataset, GroundTruth]:
    rng = np.random.default_rng(scene.seed)
    lo, hi = scene.rotation_range
    gammas = np.linspace(lo, hi, scene.steps)
    y0, z0 = scene.y_plane_offset, scene.z_plane_offset
    crit = scene.critical_angle

    # draw every random stream up front so the sequence never depends on the config
    noise = rng.standard_normal((scene.steps, 4))
    inflation_u = rng.random((scene.steps, 4))
    outlier_u = rng.random((scene.steps, 4))
    energy_n = rng.standard_normal((scene.steps, 4))

    distances = np.empty((scene.steps, 4))
    labels = np.empty((scene.steps, 4), dtype="<U1")
    for k, g in enumerate(gammas):
        caps = capsule_positions(g, scene.array)
        c, s = math.cos(math.radians(g)), math.sin(math.radians(g))
        t_y = (y0 - caps[:, 1]) / c if c > 0 else np.full(4, np.inf)
        t_z = (z0 - caps[:, 2]) / s if s > 0 else np.full(4, np.inf)
        hits_y = t_y <= t_z
        labels[k] = np.where(hits_y, "y", "z")
        distances[k] = np.where(hits_y, y0 - caps[:, 1], z0 - caps[:, 2])

    distances += scene.noise_sigma * noise
    in_corner = np.abs(gammas - crit) <= scene.corner_half_width
    flags = np.zeros((scene.steps, 4), dtype=bool)
    if scene.corner_half_width > 0 and scene.outlier_magnitude > 0:
        flags = in_corner[:, None] & (outlier_u < scene.outlier_probability)
        # (0, 1] -> (outlier_min, outlier_magnitude]
        span = scene.outlier_magnitude - scene.outlier_min
        inflation = scene.outlier_min + span * (1.0 - inflation_u)
        distances = np.where(flags, distances + inflation, distances)

    bump = (1.0
            + scene.direct_bump_height * (_gauss(gammas, 0.0, scene.direct_bump_width)
                                          + _gauss(gammas, 90.0, scene.direct_bump_width))
            + scene.corner_bump_height * _gauss(gammas, crit, scene.corner_bump_width))
    energies = 1.0 / energy_model.denominator(distances)
    energies *= bump[:, None]
    energies *= np.clip(1.0 + scene.energy_noise * energy_n, 0.05, None)

    dataset = ScanDataset(gammas, distances, energies, scene.array, scene.rotation_range)
    truth = GroundTruth(
        y_plane=PlaneParams(0.0, 1.0 / y0, 0.0),
        z_plane=PlaneParams(0.0, 0.0, 1.0 / z0),
        critical_angle=crit,
        outlier_flags=flags,
        plane_labels=labels,
    )
    return dataset, truth


def _tilt_deg(fitted: PlaneParams, true: PlaneParams) -> float:
    a, b = fitted.theta, true.theta
    cos = abs(np.dot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.degrees(math.acos(min(1.0, cos)))


def evaluate_against_truth(report, truth: GroundTruth) -> dict:
    """Offset and tilt errors per plane and estimator, plus pre-filter precision/recall.

    ``report`` is a :class:`~lelplane.pipeline.FitReport`.
    """
    out = {}
    for name, true_plane, axis in (("y", truth.y_plane, "Y"), ("z", truth.z_plane, "Z")):
        plane = report.planes[name]
        true_offset = to_axis_explicit(true_plane, axis)[2]
        metrics = {}
        for est in ("ls", "lel", "lel_filtered", "ransac"):
            params = getattr(plane, est)
            metrics[est] = {
                "offset_error_cm": abs(to_axis_explicit(params, axis)[2] - true_offset),
                "tilt_error_deg": _tilt_deg(params, true_plane),
            }
        ids = np.asarray(plane.point_ids, dtype=int).reshape(-1, 2)
        is_outlier = truth.outlier_flags[ids[:, 0], ids[:, 1]]
        removed = ~np.asarray(plane.kept_mask, dtype=bool)
        hits = int(np.sum(removed & is_outlier))
        metrics["outlier_precision"] = hits / removed.sum() if removed.any() else 1.0
        metrics["outlier_recall"] = hits / is_outlier.sum() if is_outlier.any() else 1.0
        out[name] = metrics
    return out
