"""
Undoing an imperfect calibration
================================

Alice's detectors are unsharp (eta < 1) and biased.  Her data are a
classical post-processing of sharp measurements, and the matrices S and R
map the observed data matrix back to the one sharp measurements along
mutually unbiased axes would have produced.
"""
import math

import numpy as np

from robustbb84 import MeasurementModel, SimConfig, exact_data, transform, true_calibration, werner_state
from robustbb84.qubit import X_AXIS, Z_AXIS

state = werner_state(0.92)
alice = (MeasurementModel(Z_AXIS, sharpness=0.8, bias=0.1), MeasurementModel(X_AXIS, sharpness=0.9, bias=-0.05))
observed = exact_data(SimConfig.werner(0.92, 1, alice=alice))
print("observed data matrix:\n", np.round(observed.d, 4))

p = true_calibration(*alice)
print("\ncalibration realised by the devices:", p)

recovered = transform(observed, p)
ideal = exact_data(SimConfig.werner(0.92, 1))
print("\nafter the transform:\n", np.round(recovered.d, 4))
print("max deviation from ideal data:", np.max(np.abs(recovered.d - ideal.d)))

# Tilted axes: only the sharpen-then-rotate order ("literal") recovers the
# sharp, unbiased data; the default order agrees with it at right angles.
tilt = 1.2
second = (math.sin(tilt), 0.0, math.cos(tilt))
alice = (MeasurementModel(Z_AXIS, 0.85, 0.05), MeasurementModel(second, 0.9, 0.0))
observed = exact_data(SimConfig.werner(0.92, 1, alice=alice))
p = true_calibration(*alice)
for order in ("printed", "literal"):
    dev = np.max(np.abs(transform(observed, p, order=order).d - ideal.d))
    print(f"theta = {p.theta:.2f}, order = {order:8s} max deviation = {dev:.2e}")
