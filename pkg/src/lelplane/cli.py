"""Command-line entry point: ``lelplane {simulate,calibrate,fit,plot-data}``.

Exit status 0 on success, 2 for unreadable or malformed input, 3 when a
processing stage fails (the message names the stage).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .energy import REFERENCE_MODEL, calibrate_energy_model
from .errors import LelPlaneError, ScanFormatError
from .pipeline import PipelineOptions, emit_plot_data, run_pipeline
from .simulator import SceneConfig, scene_test1, scene_test2, simulate_scan

logger = logging.getLogger("lelplane")

CALIBRATION_DISTANCES = (95.0, 110.0, 125.0, 140.0, 155.0, 170.0)
PRESETS = {"test1": scene_test1, "test2": scene_test2,
           "clean": lambda seed: SceneConfig(seed=seed)}


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage} failed: {exc}")


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ScanFormatError(f"cannot read {path}: {exc}") from None


def cmd_simulate(args) -> None:
    if args.config:
        try:
            scene = SceneConfig.from_dict(_load_json(args.config))
        except (TypeError, ValueError) as exc:
            raise ScanFormatError(f"{args.config}: invalid scene ({exc})") from None
        if args.seed is not None:
            scene = SceneConfig.from_dict({**scene.to_dict(), "seed": args.seed})
    else:
        seed = 0 if args.seed is None else args.seed
        scene = PRESETS[args.preset](seed)
        logger.info("no --config; using preset %r with seed %d", args.preset, seed)
    model = io.read_model(args.model) if args.model else REFERENCE_MODEL
    dataset, truth = simulate_scan(scene, model)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_scan(dataset, out / "scan.csv")
    (out / "truth.json").write_text(json.dumps(truth.to_dict(), sort_keys=True) + "\n")
    (out / "scene.json").write_text(json.dumps(scene.to_dict(), indent=2, sort_keys=True) + "\n")
    d = np.array(CALIBRATION_DISTANCES)
    io.write_calibration(d, 1.0 / model.denominator(d), out / "calibration.csv")
    print(f"wrote {len(dataset)} frames to {out / 'scan.csv'}")


def cmd_calibrate(args) -> None:
    d, e = io.read_calibration(args.calibration)
    try:
        model = calibrate_energy_model(d, e)
    except LelPlaneError as exc:
        raise StageError("calibration", exc) from None
    io.write_model(model, args.out)
    print(f"phi = ({model.phi0!r}, {model.phi1!r}, {model.phi2!r}) -> {args.out}")


def _prepare(args):
    dataset = io.read_scan(args.scan)
    if args.waveform_dir:
        dataset = io.energies_from_waveforms(dataset, args.waveform_dir)
    elif dataset.energies is None:
        raise ScanFormatError(f"{args.scan} has no energies and no --waveform-dir was given")

    if args.model:
        model = io.read_model(args.model)
    else:
        d, e = io.read_calibration(args.calibration)
        try:
            model = calibrate_energy_model(d, e)
        except LelPlaneError as exc:
            raise StageError("calibration", exc) from None

    opts = {}
    if args.config:
        opts = _load_json(args.config)
        if not isinstance(opts, dict):
            raise ScanFormatError(f"{args.config}: options must be a JSON object")
    if args.seed is not None:
        opts["seed"] = args.seed
    try:
        options = PipelineOptions.from_dict(opts)
    except (TypeError, ValueError) as exc:
        raise ScanFormatError(f"invalid options: {exc}") from None

    provenance = {"input_file": str(args.scan),
                  "energy_source": str(args.model or args.calibration),
                  "waveform_dir": str(args.waveform_dir) if args.waveform_dir else None}
    try:
        return run_pipeline(dataset, model, options, provenance)
    except LelPlaneError as exc:
        raise StageError(type(exc).__name__.replace("Error", "").lower() or "pipeline",
                         exc) from None


def cmd_fit(args) -> None:
    report, _ = _prepare(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "report.txt").write_text(report.summary())
    sys.stdout.write(report.summary())


def cmd_plot_data(args) -> None:
    report, inter = _prepare(args)
    try:
        paths = emit_plot_data(report, inter, args.out)
    except OSError as exc:
        raise StageError("plot-data", exc) from None
    for p in paths:
        print(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lelplane", description="Reconstruct two orthogonal walls from a rotating sonar scan.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic scan, calibration points and truth")
    p.add_argument("--config", help="scene JSON (fields of SceneConfig)")
    p.add_argument("--preset", choices=sorted(PRESETS), default="test1")
    p.add_argument("--model", help="energy model JSON (default: reference calibration)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit the energy/distance model")
    p.add_argument("calibration", help="CSV distance_cm,energy_v2s")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.set_defaults(func=cmd_calibrate)

    for name, func, helptext in (("fit", cmd_fit, "run the pipeline and write a report"),
                                 ("plot-data", cmd_plot_data, "run the pipeline and write plot CSVs")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scan", help="scan CSV")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--calibration", help="calibration CSV")
        src.add_argument("--model", help="energy model JSON")
        p.add_argument("--waveform-dir", help="directory of frameNNNN_sensorI.csv waveforms")
        p.add_argument("--config", help="pipeline options JSON")
        p.add_argument("--seed", type=int, help="RANSAC seed")
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ScanFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LelPlaneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
