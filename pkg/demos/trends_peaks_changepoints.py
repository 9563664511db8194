"""
Trend, peaks and change points on a daily series
================================================

Three complementary views of one series: a Mann-Kendall trend test, peaks
outside an inflated mean +/- std band, and PELT change points under a
squared-error cost.
"""

import numpy as np

from discourse.analytics import detect_peaks, mann_kendall, pelt

rng = np.random.default_rng(0)
n = 120
x = 10 + 0.05 * np.arange(n) + rng.normal(0, 1, n)
x[60:] += 4.0  # level shift
x[30] += 25.0  # one-day burst

r = mann_kendall(x)
print(f"S={r.S} Z={r.Z:.2f} p={r.p:.2e} {r.direction}")

###############################################################################
# Peaks: upper bound (mean + std) + m * |mean + std|. A larger m only
# removes peaks.

for m in (0.25, 0.5, 1.0):
    ps = detect_peaks(x, m)
    print(f"m={m}: peaks at {list(ps.indices)} (upper={ps.upper_threshold:.1f})")

###############################################################################
# PELT with the default penalty 2 * var * log(n), then a larger one.

for penalty in (None, 200.0):
    cp = pelt(x, penalty)
    print(f"penalty={cp.penalty:.1f}: change points {cp.change_points}")
