"""
Key rate for symmetric BB84 data
================================

When the parties see the textbook BB84 statistics (uniform marginals, the
same correlation sigma in both matched bases, nothing across bases) the
calibration-robust bound reduces to the familiar 1 - 2 h2(Q).
"""
import numpy as np

from robustbb84 import diagonal_data, rate_from_data, symmetric_rate, threshold_qber

# closed form at a few error rates
for q in (0.0, 0.02, 0.05, 0.1):
    r = symmetric_rate(q)
    print(f"Q = {q:.2f}: I(X:Y) = {r.mutual_info:.4f}, bound = {r.adversary_bound:.4f}, rate = {r.rate:.4f}")

# the same number from the full pipeline: build the data matrix and let the
# optimiser search over every calibration of Alice's device
q = 0.05
d = diagonal_data(1 - 2 * q)
numeric = rate_from_data(d, method="optimize")
print("\noptimiser path:", round(numeric.rate, 9), " closed form:", round(symmetric_rate(q).rate, 9))
print("worst-case calibration found:", numeric.optimizer_trace.best_params)

# past this QBER no key is guaranteed
qstar = threshold_qber()
print(f"\nthreshold QBER = {qstar:.7f}")

# a sweep, e.g. to feed a plotting tool (same output as `robustbb84 sweep`)
for q in np.linspace(0, 0.15, 7):
    print(f"{q:.3f}  {symmetric_rate(q).rate:+.4f}")
