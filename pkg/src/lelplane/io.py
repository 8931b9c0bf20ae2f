"""File formats: scan CSV + sidecar JSON, calibration CSV, model JSON, waveforms."""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path

import numpy as np

from .energy import EnergyModel, REFERENCE_VALID_RANGE, Waveform, waveform_energy
from .errors import ScanFormatError
from .geometry import ScanDataset, SensorArrayConfig

logger = logging.getLogger(__name__)

SCAN_HEADER = ["gamma_deg", "d1_cm", "d2_cm", "d3_cm", "d4_cm", "e1", "e2", "e3", "e4"]
CALIBRATION_HEADER = ["distance_cm", "energy_v2s"]
WAVEFORM_HEADER = ["t_s", "v"]


def _cell(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def _parse(cell: str, where: str) -> float:
    cell = cell.strip()
    if cell == "":
        return math.nan
    try:
        v = float(cell)
    except ValueError:
        raise ScanFormatError(f"{where}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise ScanFormatError(f"{where}: non-finite value {cell!r}")
    return v


def _read_rows(path, header):
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ScanFormatError(f"cannot read {path}: {exc}") from None
    if not rows or [c.strip() for c in rows[0]] != header:
        raise ScanFormatError(f"{path}: expected header {','.join(header)}")
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ScanFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        body.append([_parse(c, f"{path}:{lineno}") for c in row])
    return body


def sidecar_path(scan_path) -> Path:
    return Path(scan_path).with_suffix(".json")


def write_scan(dataset: ScanDataset, path) -> None:
    path = Path(path)
    energies = dataset.energies if dataset.energies is not None else np.full((len(dataset), 4), np.nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for g, d, e in zip(dataset.gammas, dataset.distances, energies):
            w.writerow([_cell(g)] + [_cell(v) for v in d] + [_cell(v) for v in e])
    side = {"sensor_array": dataset.config.to_dict(),
            "rotation_range_deg": list(dataset.rotation_range)}
    sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")


def read_scan(path) -> ScanDataset:
    """Read a scan CSV and its sidecar; energies are None if every energy cell is empty."""
    rows = _read_rows(path, SCAN_HEADER)
    if not rows:
        raise ScanFormatError(f"{path}: no frames")
    arr = np.array(rows, dtype=float)
    if np.any(np.isnan(arr[:, 0])):
        raise ScanFormatError(f"{path}: every frame needs a gamma_deg value")
    energies = arr[:, 5:9]
    if np.all(np.isnan(energies)):
        energies = None

    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
            config = SensorArrayConfig.from_dict(meta["sensor_array"])
            rotation = tuple(float(v) for v in meta["rotation_range_deg"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ScanFormatError(f"{side}: malformed sidecar ({exc})") from None
    else:
        config = SensorArrayConfig()
        rotation = (float(arr[0, 0]), float(arr[-1, 0]))
        logger.info("no sidecar %s; using default sensor array %s and rotation range %s",
                    side, config.to_dict(), rotation)
    try:
        return ScanDataset(arr[:, 0], arr[:, 1:5], energies, config, rotation)
    except ValueError as exc:
        raise ScanFormatError(f"{path}: {exc}") from None


def write_calibration(distances, energies, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CALIBRATION_HEADER)
        for d, e in zip(distances, energies):
            w.writerow([repr(float(d)), repr(float(e))])


def read_calibration(path) -> tuple[np.ndarray, np.ndarray]:
    rows = _read_rows(path, CALIBRATION_HEADER)
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    if np.any(np.isnan(arr)):
        raise ScanFormatError(f"{path}: calibration rows may not have empty cells")
    return arr[:, 0], arr[:, 1]


def write_model(model: EnergyModel, path) -> None:
    d = {"phi0": model.phi0, "phi1": model.phi1, "phi2": model.phi2,
         "valid_range_cm": list(model.valid_range),
         "units": {"phi0": "1/(V^2 s cm^2)", "phi1": "1/(V^2 s cm)", "phi2": "1/(V^2 s)"}}
    Path(path).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")


def read_model(path) -> EnergyModel:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ScanFormatError(f"cannot read model {path}: {exc}") from None
    try:
        phi = [float(d[k]) for k in ("phi0", "phi1", "phi2")]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScanFormatError(f"{path}: malformed model ({exc})") from None
    if "valid_range_cm" in d:
        valid = tuple(float(v) for v in d["valid_range_cm"])
    else:
        valid = REFERENCE_VALID_RANGE
        logger.info("%s has no valid_range_cm; using default %s", path, valid)
    return EnergyModel(*phi, valid_range=valid)


def waveform_path(directory, frame: int, sensor: int) -> Path:
    """Sensors are numbered 1-4 in file names, frames from 0."""
    return Path(directory) / f"frame{frame:04d}_sensor{sensor}.csv"


def write_waveform(w: Waveform, path) -> None:
    t = np.arange(w.samples.size) * w.sample_interval
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(WAVEFORM_HEADER)
        for ti, vi in zip(t, w.samples):
            wr.writerow([repr(float(ti)), repr(float(vi))])


def read_waveform(path) -> Waveform:
    rows = _read_rows(path, WAVEFORM_HEADER)
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    if arr.shape[0] < 2 or np.any(np.isnan(arr)):
        raise ScanFormatError(f"{path}: need at least two complete samples")
    dt = np.diff(arr[:, 0])
    if np.any(dt <= 0) or np.ptp(dt) > 1e-6 * dt.mean():
        raise ScanFormatError(f"{path}: samples must be uniformly spaced in time")
    return Waveform(arr[:, 1], float(dt.mean()))


def energies_from_waveforms(dataset: ScanDataset, directory) -> ScanDataset:
    """Replace the dataset's energies with waveform energies read from ``directory``.

    A missing waveform file leaves that reading missing (NaN).
    """
    energies = np.full((len(dataset), 4), np.nan)
    for k in range(len(dataset)):
        for i in range(4):
            p = waveform_path(directory, k, i + 1)
            if p.exists():
                energies[k, i] = waveform_energy(read_waveform(p))
    return dataset.with_energies(energies)
