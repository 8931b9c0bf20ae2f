"""Calibrate the energy/distance model and locate the corner in a scan.

Run: python3 demos/02_energy_and_critical_angle.py
"""

import math

import numpy as np

from lelplane import (REFERENCE_MODEL, calibrate_energy_model, detect_critical_position,
                      predict_energy, simulate_scan)
from lelplane.simulator import scene_test1

d = np.array([95.0, 110.0, 125.0, 140.0, 155.0, 170.0])
e = 1.0 / REFERENCE_MODEL.denominator(d)
model = calibrate_energy_model(d, e)
print("coefficients", model.coefficients)
print("E(120 cm) =", round(predict_energy(model, 120.0).energy, 4))
# Outside the calibrated range the value is still returned but flagged.
print("E(200 cm) =", predict_energy(model, 200.0))

scene = scene_test1(seed=0)
dataset, truth = simulate_scan(scene)
det = detect_critical_position(dataset, model)
print(f"corner at frame {det.critical_index}, gamma = {det.critical_angle:.3f} deg")
print(f"true corner direction {math.degrees(math.atan(106 / 157)):.3f} deg, "
      f"step {scene.step_size:.3f} deg")
