"""Regenerate src/awareness/data/power_samples.csv.

Synthetic 100 Hz recording of one sensor module with the group medians of the
calibrated model (standby 155.3 W, one/two quadrants 283.6 W, three 277.3 W).
Offsets are mirrored around each median so the medians are exact.
"""

from pathlib import Path

import numpy as np

MEDIANS = {0: 155.3, 1: 283.6, 2: 283.6, 3: 277.3}
SPREAD = {0: 4.0, 1: 9.0, 2: 9.0, 3: 9.0}
HALF = 500  # 1001 samples per group
RATE_HZ = 100

rng = np.random.default_rng(20221008)
rows = []
t = 0
for q, med in MEDIANS.items():
    off = np.round(np.abs(rng.normal(0.0, SPREAD[q], HALF)), 2)
    values = np.concatenate([off, -off, [0.0]])
    rng.shuffle(values)
    for v in values:
        rows.append(f"{t / RATE_HZ:.2f},{q},{med + v:.2f}")
        t += 1

out = Path(__file__).resolve().parents[1] / "src/awareness/data/power_samples.csv"
out.write_text("timestamp_s,active_quadrants,watts\n" + "\n".join(rows) + "\n")
