"""Robust reconstruction of two orthogonal walls from rotating ultrasonic scans.

The core estimator minimises an entropy-like function of the relative
squared residuals of the plane ``t1*x + t2*y + t3*z = 1``; least squares
and RANSAC are provided as baselines.
"""

from ._neldermead import MinimizerConfig, nelder_mead
from .energy import (REFERENCE_MODEL, CriticalDetection, EnergyModel, Waveform,
                     calibrate_energy_model, detect_critical_position,
                     predict_energy, total_energy, waveform_energy)
from .errors import (ConvergenceError, DegenerateGeometryError, EnergyModelError,
                     FilterError, LelPlaneError, PartitionError, ScanFormatError)
from .geometry import (PartitionedPoints, ScanDataset, ScanFrame, SensorArrayConfig,
                       correct_reflection_direction, frame_to_points,
                       partition_at_critical)
from .pipeline import FitReport, PipelineOptions, emit_plot_data, run_pipeline
from .planes import (LelFitResult, PlaneParams, RansacFitResult, entropy_like_cost,
                     fit_least_entropy_like, fit_least_squares, fit_ransac_plane,
                     from_axis_explicit, multi_start_points, relative_squared_residuals,
                     residual, residuals, to_axis_explicit)
from .postprocess import ErrorStats, FilterOutcome, error_stats, fit_with_prefilter, fitting_errors, prefilter
from .simulator import GroundTruth, SceneConfig, evaluate_against_truth, simulate_scan

__version__ = "0.1.0"
