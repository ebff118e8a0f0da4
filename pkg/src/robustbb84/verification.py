"""Self-checks run by ``robustbb84 verify``.

Every check compares a fast path against an independent route (closed
form, brute-force grid, direct quantum computation) and reports the
measured deviation next to its tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationParams, DataMatrix, diagonal_data, feasible, transform
from .entropy import binary_entropy
from .keyrate import OptimizerOptions, general_adversary_bound, rate_from_data, symmetric_rate, threshold_qber
from .qubit import (
    MeasurementModel,
    complementary_axis,
    random_axis,
    random_measurement,
    random_state,
    true_calibration,
)
from .simulation import SimConfig, exact_data, run


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    label: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        label = self.label or f"deviation {self.deviation:.3g} (tol {self.tolerance:g})"
        return f"{self.name} {label} {status}"


def random_params(rng, x_max=3.0, theta=None):
    x2 = rng.uniform(1.0, x_max)
    x4 = rng.uniform(1.0, x_max)
    return CalibrationParams(
        x1=rng.uniform(-1.0, 1.0) * (x2 - 1.0),
        x2=x2,
        x3=rng.uniform(-1.0, 1.0) * (x4 - 1.0),
        x4=x4,
        theta=rng.uniform(0.05, math.pi - 0.05) if theta is None else theta,
    )


def printed_diagonal_image(sigma, p):
    """Hypothetical data for diag(1, sigma, sigma), written out entry by entry."""
    cot, csc = math.cos(p.theta) / math.sin(p.theta), 1.0 / math.sin(p.theta)
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [p.x1, sigma * p.x2, 0.0],
            [p.x3, -sigma * p.x4 * cot, sigma * p.x4 * csc],
        ]
    )


def sharp_reference(state, alice, bob):
    """Data matrix of sharp measurements along Alice's first axis and its unbiased partner."""
    a1, a2 = alice
    sharp = (
        MeasurementModel.sharp(a1.axis),
        MeasurementModel.sharp(complementary_axis(a1.axis, a2.axis)),
    )
    cfg = SimConfig(state=state, alice=sharp, bob=tuple(bob), rounds=1)
    return exact_data(cfg).d


def roundtrip_deviation(rng, orthogonal=True, order="printed"):
    """|transform(D, true calibration) - sharp D| for one random instance."""
    state = random_state(rng)
    ax1 = random_axis(rng)
    ax2 = complementary_axis(ax1, random_axis(rng)) if orthogonal else random_axis(rng)
    alice = (random_measurement(rng, ax1), random_measurement(rng, ax2))
    bob = (random_measurement(rng), random_measurement(rng))
    d = exact_data(SimConfig(state=state, alice=alice, bob=bob, rounds=1))
    dbar = transform(d, true_calibration(*alice), order=order).d
    return float(np.max(np.abs(dbar - sharp_reference(state, alice, bob))))


def grid_oracle_bound(d: DataMatrix, x4_max=3.0, step=1e-3, theta_points=None):
    """Brute-force maximum of h2((1 - E(Xbar'Y'))/2) over an (x4, theta) grid at x3 = 0.

    Each grid point builds S @ R @ D by explicit matrix products and keeps
    it only if every pairwise joint of the result is a distribution.
    """
    x4 = np.arange(1.0, x4_max + step / 2, step)
    n_theta = theta_points or int(round(math.pi / step))
    theta = np.linspace(0.0, math.pi, n_theta + 2)[1:-1]
    best = -1.0
    for th in theta:
        r = np.array([[1, 0, 0], [0, 1, 0], [0, -math.cos(th) / math.sin(th), 1 / math.sin(th)]])
        rd = r @ d.d
        s = np.zeros((len(x4), 3, 3))
        s[:, 0, 0] = 1.0
        s[:, 1, 1] = 1.0
        s[:, 2, 2] = x4
        dbar = s @ rd
        ok = np.all(np.abs(dbar) <= 1.0 + 1e-9, axis=(1, 2))
        for i in (1, 2):
            for j in (1, 2):
                ex, ey, exy = dbar[:, i, 0], dbar[:, 0, j], dbar[:, i, j]
                for a in (1, -1):
                    for b in (1, -1):
                        ok &= 1 + a * ex + b * ey + a * b * exy >= -4e-9
        if np.any(ok):
            t = np.min(np.abs(dbar[ok, 2, 2]))
            best = max(best, binary_entropy((1.0 - min(t, 1.0)) / 2.0))
    return best


def check_threshold():
    q = threshold_qber()
    dev = abs(binary_entropy(q) - 0.5)
    return CheckResult("threshold_qber", dev < 1e-6, dev, 1e-6, f"{q:.7f} (|h2−0.5| < 1e-6)")


def check_printed_regression(rng, n):
    worst = 0.0
    for _ in range(n):
        sigma = rng.uniform(0.0, 1.0)
        p = random_params(rng)
        got = transform(diagonal_data(sigma), p).d
        worst = max(worst, float(np.max(np.abs(got - printed_diagonal_image(sigma, p)))))
    return CheckResult("printed_transform_regression", worst <= 1e-12, worst, 1e-12)


def check_roundtrip(rng, n):
    worst = max(roundtrip_deviation(rng) for _ in range(n))
    worst_lit = max(roundtrip_deviation(rng, orthogonal=False, order="literal") for _ in range(n))
    dev = max(worst, worst_lit)
    return CheckResult("calibration_roundtrip", dev <= 1e-10, dev, 1e-10)


def check_symmetric_consistency(n):
    worst = 0.0
    for q in np.linspace(0.0, 0.5, n):
        a = rate_from_data(diagonal_data(1.0 - 2.0 * q), method="optimize").rate
        worst = max(worst, abs(a - symmetric_rate(q).rate))
    return CheckResult("symmetric_rate_consistency", worst <= 1e-6, worst, 1e-6)


def check_grid_agreement(rng, n, step):
    worst = 0.0
    for k in range(n):
        sigmas = (0.9, 0.9) if k == 0 else rng.uniform(0.0, 1.0, size=2)
        d = DataMatrix(np.diag([1.0, *sigmas]))
        bound, _ = general_adversary_bound(d)
        worst = max(worst, abs(bound - grid_oracle_bound(d, step=step)))
    return CheckResult("grid_vs_optimizer", worst <= 1e-4, worst, 1e-4)


def check_dominance(rng, n_mats, n_probes):
    opts = OptimizerOptions()
    violations = 0
    worst = 0.0
    for _ in range(n_mats):
        cfg = SimConfig(
            state=random_state(rng),
            alice=(random_measurement(rng), random_measurement(rng)),
            bob=(random_measurement(rng), random_measurement(rng)),
            rounds=1,
        )
        d = exact_data(cfg)
        bound, _ = general_adversary_bound(d, opts)
        for _ in range(n_probes):
            p = random_params(rng, x_max=opts.x_max)
            dbar = transform(d, p)
            if not feasible(dbar):
                continue
            val = binary_entropy((1.0 - min(abs(float(dbar[2, 2])), 1.0)) / 2.0)
            if val > bound:
                violations += 1
                worst = max(worst, val - bound)
    return CheckResult("optimizer_dominance", violations == 0, worst, 0.0, f"{violations} violations")


def check_monte_carlo(seeds, rounds):
    target = symmetric_rate(0.05).rate
    worst = 0.0
    for seed in seeds:
        est = run(SimConfig.werner(0.9, rounds, seed))
        worst = max(worst, abs(rate_from_data(est.d).rate - target))
    return CheckResult("monte_carlo_rate", worst <= 0.02, worst, 0.02)


def run_checks(deep=False, seed=20120901):
    rng = np.random.default_rng(seed)
    return [
        check_threshold(),
        check_printed_regression(rng, 5000 if deep else 200),
        check_roundtrip(rng, 500 if deep else 50),
        check_symmetric_consistency(100 if deep else 11),
        check_grid_agreement(rng, 20 if deep else 1, 1e-3 if deep else 5e-3),
        check_dominance(rng, 50 if deep else 5, 100 if deep else 20),
        check_monte_carlo(range(5) if deep else [0], 10**6 if deep else 2 * 10**5),
    ]
