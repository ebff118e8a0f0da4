"""
Finite statistics
=================

Simulate the measurement stage, estimate the data matrix from counts and
watch the estimated rate settle on the asymptotic value.
"""
from robustbb84 import SimConfig, rate_from_data, run, symmetric_rate

target = symmetric_rate(0.05).rate
for rounds in (10**4, 10**5, 10**6):
    est = run(SimConfig.werner(0.9, rounds, seed=7))
    r = rate_from_data(est.d)
    print(f"{rounds:>8d} rounds: rate = {r.rate:.4f} (asymptotic {target:.4f}), "
          f"stderr of E(XY) = {est.stderr[1, 1]:.1e}")

# the estimate is reproducible bit for bit and serialises to JSON
est = run(SimConfig.werner(0.9, 10**5, seed=7), workers=4)
print(est.to_json()[:120], "...")
