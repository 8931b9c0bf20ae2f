"""End-to-end processing of one scan: corner detection, partition, fits, report."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .energy import CriticalDetection, EnergyModel, detect_critical_position
from .geometry import (CORRECTION_MODES, PartitionedPoints, ScanDataset,
                       correct_reflection_direction, dataset_points)
from .planes import (MinimizerConfig, PlaneParams, fit_least_squares,
                     fit_ransac_plane, to_axis_explicit)
from .postprocess import PrefilterResult, fit_with_prefilter

logger = logging.getLogger(__name__)

__all__ = ["PipelineOptions", "PlaneReport", "FitReport", "Intermediates",
           "run_pipeline", "emit_plot_data", "PLOT_FILES"]

ESTIMATORS = ("ls", "lel", "lel_filtered", "ransac")


@dataclass(frozen=True)
class PipelineOptions:
    minimizer: MinimizerConfig = field(default_factory=MinimizerConfig)
    ransac_threshold: float = 1.0
    ransac_trials: int = 500
    seed: int = 0
    correction_mode: str = "slant"
    prefilter_passes: int = 1

    def __post_init__(self):
        if self.correction_mode not in CORRECTION_MODES:
            raise ValueError(f"correction_mode must be one of {CORRECTION_MODES}")
        if isinstance(self.minimizer, dict):
            object.__setattr__(self, "minimizer", MinimizerConfig(**self.minimizer))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineOptions":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown pipeline options: {sorted(unknown)}")
        for name in sorted(known - set(d)):
            logger.info("option %s not given; using default %r", name,
                        getattr(cls(), name))
        return cls(**d)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class PlaneReport:
    axis: str
    ls: PlaneParams
    lel: PlaneParams
    lel_filtered: PlaneParams
    ransac: PlaneParams
    lel_cost: float
    lel_filtered_cost: float
    lel_start_index: int
    lel_filtered_start_index: int
    ransac_inliers: int
    sigma_before: float
    sigma_after: float
    filter_threshold: float
    point_ids: np.ndarray
    kept_mask: np.ndarray

    @property
    def n_points(self) -> int:
        return int(self.kept_mask.size)

    @property
    def n_filtered(self) -> int:
        return int(np.sum(~self.kept_mask))

    @property
    def sigma_improved(self) -> bool:
        return self.sigma_after <= self.sigma_before

    def to_dict(self) -> dict:
        coeff_names = {"Y": ("a_x", "b_z", "c_cm"), "Z": ("a_x", "b_y", "c_cm")}[self.axis]
        fits = {}
        for est in ESTIMATORS:
            params = getattr(self, est)
            fits[est] = {
                "explicit": dict(zip(coeff_names, to_axis_explicit(params, self.axis))),
                "theta_per_cm": params.theta.tolist(),
            }
        removed = self.point_ids[~self.kept_mask]
        return {
            "form": f"{self.axis.lower()} = " + (
                "a_x*x + b_z*z + c_cm" if self.axis == "Y" else "a_x*x + b_y*y + c_cm"),
            "fits": fits,
            "lel_cost": self.lel_cost,
            "lel_filtered_cost": self.lel_filtered_cost,
            "lel_start_index": self.lel_start_index,
            "lel_filtered_start_index": self.lel_filtered_start_index,
            "ransac_inliers": self.ransac_inliers,
            "sigma_before": self.sigma_before,
            "sigma_after": self.sigma_after,
            "sigma_improved": self.sigma_improved,
            "filter_threshold": self.filter_threshold,
            "counts": {"points": self.n_points, "filtered": self.n_filtered},
            "removed_points_frame_sensor": removed.tolist(),
        }


@dataclass(frozen=True)
class FitReport:
    critical_index: int
    critical_angle: float
    total_points: int
    excluded_points: int
    planes: dict
    skipped_frames: tuple[int, ...] = ()
    extrapolated_frames: tuple[int, ...] = ()
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "units": {"lengths": "cm", "angles": "deg", "theta": "1/cm",
                      "errors": "dimensionless (theta . v - 1)", "energies": "V^2 s"},
            "critical": {"index": self.critical_index, "angle_deg": self.critical_angle},
            "counts": {
                "total_points": self.total_points,
                "excluded_at_critical": self.excluded_points,
                "subset_y": self.planes["y"].n_points,
                "subset_z": self.planes["z"].n_points,
                "filtered_y": self.planes["y"].n_filtered,
                "filtered_z": self.planes["z"].n_filtered,
            },
            "planes": {"y": self.planes["y"].to_dict(), "z": self.planes["z"].to_dict()},
            "skipped_frames": list(self.skipped_frames),
            "extrapolated_frames": list(self.extrapolated_frames),
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        lines = [
            f"critical angle   {self.critical_angle:10.3f} deg  (frame {self.critical_index})",
            f"points           {self.total_points:6d} total, "
            f"{self.excluded_points} excluded at corner",
        ]
        for name in ("y", "z"):
            p = self.planes[name]
            other = "z" if p.axis == "Y" else "y"
            lines.append("")
            lines.append(f"{name}-plane  ({p.n_points} points, {p.n_filtered} filtered)")
            for est in ESTIMATORS:
                a, b, c = to_axis_explicit(getattr(p, est), p.axis)
                lines.append(f"  {est:<13s} {name} = {a:+.6f} x {b:+.6f} {other} {c:+.4f}")
            lines.append(f"  H raw {p.lel_cost:.6f}   H filtered {p.lel_filtered_cost:.6f}")
            lines.append(f"  sigma before {p.sigma_before:.6f}   after {p.sigma_after:.6f}"
                         f"   improved {'yes' if p.sigma_improved else 'no'}")
        return "\n".join(lines) + "\n"


@dataclass
class Intermediates:
    dataset: ScanDataset
    detection: CriticalDetection
    raw_points: np.ndarray
    raw_ids: np.ndarray
    partition: PartitionedPoints
    prefilter: dict


def _fit_subset(points, ids, axis, options: PipelineOptions) -> tuple[PlaneReport, PrefilterResult]:
    ls = fit_least_squares(points)
    pre = fit_with_prefilter(points, options.minimizer, options.prefilter_passes)
    ransac = fit_ransac_plane(points, options.ransac_threshold, options.ransac_trials,
                              options.seed)
    report = PlaneReport(
        axis=axis, ls=ls, lel=pre.raw.params, lel_filtered=pre.filtered.params,
        ransac=ransac.params, lel_cost=pre.raw.cost, lel_filtered_cost=pre.filtered.cost,
        lel_start_index=pre.raw.start_index,
        lel_filtered_start_index=pre.filtered.start_index,
        ransac_inliers=ransac.inlier_count, sigma_before=pre.before.sigma,
        sigma_after=pre.after.sigma, filter_threshold=pre.outcome.threshold,
        point_ids=ids, kept_mask=pre.outcome.kept_mask,
    )
    return report, pre


def run_pipeline(dataset: ScanDataset, model: EnergyModel,
                 options: PipelineOptions = PipelineOptions(),
                 provenance: dict | None = None) -> tuple[FitReport, Intermediates]:
    """Detect the corner, split and correct the points, fit both walls."""
    detection = detect_critical_position(dataset, model)
    for k in detection.skipped_frames:
        logger.warning("frame %d has a missing reading; skipped for corner detection", k)
    partition = correct_reflection_direction(dataset, detection,
                                             mode=options.correction_mode)
    raw_points, raw_ids = dataset_points(dataset)

    plane_y, pre_y = _fit_subset(partition.subset_y, partition.ids_y, "Y", options)
    plane_z, pre_z = _fit_subset(partition.subset_z, partition.ids_z, "Z", options)

    prov = {"seed": options.seed, "config_hash": options.digest(),
            "options": options.to_dict()}
    prov.update(provenance or {})
    report = FitReport(
        critical_index=detection.critical_index,
        critical_angle=detection.critical_angle,
        total_points=int(raw_points.shape[0]),
        excluded_points=int(partition.excluded.shape[0]),
        planes={"y": plane_y, "z": plane_z},
        skipped_frames=detection.skipped_frames,
        extrapolated_frames=detection.extrapolated_frames,
        provenance=prov,
    )
    inter = Intermediates(dataset, detection, raw_points, raw_ids, partition,
                          {"y": pre_y, "z": pre_z})
    return report, inter


PLOT_FILES = (
    "raw_points.csv", "corrected_points.csv", "total_energy.csv",
    "predicted_energy.csv", "energy_ratio.csv", "sorted_errors_y.csv",
    "sorted_errors_z.csv", "plane_grid_y.csv", "plane_grid_z.csv",
)

_GRID_N = 11


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer, str)):
        return str(v)
    v = float(v)
    return "" if np.isnan(v) else repr(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _plane_grid(report: PlaneReport | None, points: np.ndarray):
    """Evaluate every estimator's explicit form on a regular grid over the subset."""
    if report is None or points.size == 0:
        return
    # explicit-form inputs: (x, z) for the y-plane, (x, y) for the z-plane
    cols = (0, 2) if report.axis == "Y" else (0, 1)
    u = np.linspace(points[:, cols[0]].min(), points[:, cols[0]].max(), _GRID_N)
    v = np.linspace(points[:, cols[1]].min(), points[:, cols[1]].max(), _GRID_N)
    forms = [to_axis_explicit(getattr(report, est), report.axis) for est in ESTIMATORS]
    for ui in u:
        for vi in v:
            yield [ui, vi] + [a * ui + b * vi + c for a, b, c in forms]


def emit_plot_data(report: FitReport | None, inter: Intermediates | None,
                   out_dir) -> list[Path]:
    """Write the nine plot-data CSVs into ``out_dir`` and return their paths.

    With no report or intermediates every file is written header-only.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / name for name in PLOT_FILES]
    have = report is not None and inter is not None
    det = inter.detection if have else None
    gammas = inter.dataset.gammas if have else np.empty(0)

    raw = []
    if have:
        for (f, s), p in zip(inter.raw_ids, inter.raw_points):
            raw.append([int(f), int(s), gammas[f], *p])
    _write_csv(paths[0], ["frame", "sensor", "gamma_deg", "x_cm", "y_cm", "z_cm"], raw)

    corrected = []
    if have:
        part = inter.partition
        for label, ids, pts in (("y", part.ids_y, part.subset_y),
                                ("z", part.ids_z, part.subset_z),
                                ("excluded", part.ids_excluded, part.excluded)):
            for (f, s), p in zip(ids, pts):
                corrected.append([label, int(f), int(s), *p])
        corrected.sort(key=lambda r: (r[1], r[2]))
    _write_csv(paths[1], ["subset", "frame", "sensor", "x_cm", "y_cm", "z_cm"], corrected)

    n = gammas.size
    _write_csv(paths[2], ["gamma_deg", "total_energy_v2s"],
               [[gammas[k], det.total_energies[k]] for k in range(n)])
    _write_csv(paths[3], ["gamma_deg", "median_distance_cm", "predicted_energy_v2s"],
               [[gammas[k], det.median_distances[k], det.predicted_energies[k]]
                for k in range(n)])
    _write_csv(paths[4], ["gamma_deg", "ratio"], [[gammas[k], det.ratios[k]] for k in range(n)])

    for i, name in ((5, "y"), (6, "z")):
        rows = []
        if have:
            errs = inter.prefilter[name].before.sorted_errors
            rows = [[r + 1, e] for r, e in enumerate(errs)]
        _write_csv(paths[i], ["rank", "error"], rows)

    for i, name, header in ((7, "y", ["x_cm", "z_cm"]), (8, "z", ["x_cm", "y_cm"])):
        target = f"{name}_cm"
        rows = []
        if have:
            pts = getattr(inter.partition, f"subset_{name}")
            rows = list(_plane_grid(report.planes[name], pts))
        _write_csv(paths[i], header + [f"{target}_{est}" for est in ESTIMATORS], rows)
    return paths
