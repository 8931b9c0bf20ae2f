"""Simulate a contaminated scan and compare LS, LEL, filtered LEL and RANSAC.

Run: python3 demos/03_full_pipeline.py [seed]
"""

import sys

from lelplane import REFERENCE_MODEL, evaluate_against_truth, run_pipeline, simulate_scan
from lelplane.simulator import scene_test1

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
dataset, truth = simulate_scan(scene_test1(seed=seed))
report, _ = run_pipeline(dataset, REFERENCE_MODEL)
print(report.summary())

metrics = evaluate_against_truth(report, truth)
print("offset error (cm) against the simulated walls")
for plane in ("y", "z"):
    row = metrics[plane]
    line = "  ".join(f"{k}={row[k]['offset_error_cm']:.3f}"
                     for k in ("ls", "lel", "lel_filtered", "ransac"))
    print(f"  {plane}: {line}  (filter precision {row['outlier_precision']:.2f}, "
          f"recall {row['outlier_recall']:.2f})")
