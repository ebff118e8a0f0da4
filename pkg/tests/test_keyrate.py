import math

import numpy as np
import pytest

from robustbb84.calibration import CalibrationParams, DataMatrix, diagonal_data, feasible, transform
from robustbb84.entropy import binary_entropy
from robustbb84.errors import DomainError, InfeasibleError, UndefinedCellError
from robustbb84.keyrate import (
    KeyRateReport,
    OptimizerOptions,
    general_adversary_bound,
    rate_from_data,
    symmetric_adversary_bound,
    symmetric_rate,
    threshold_qber,
)
from robustbb84.qubit import MeasurementModel, X_AXIS, Z_AXIS, random_measurement, random_state, true_calibration
from robustbb84.simulation import SimConfig, exact_data
from robustbb84.verification import random_params

from conftest import brute_bound

# frozen from 30-digit mpmath evaluation
RATE_005 = 0.42720608576808774
RATE_025 = -0.6225562489182657
H2_005 = 0.28639695711595613
Q_STAR = 0.11002786443835955


@pytest.mark.parametrize(
    "q, rate", [(0.0, 1.0), (0.05, RATE_005), (0.25, RATE_025)]
)
def test_symmetric_rate(q, rate):
    r = symmetric_rate(q)
    assert r.rate == pytest.approx(rate, abs=1e-12)
    assert r.rate_clamped == max(0.0, r.rate)
    assert r.rate == r.mutual_info - r.adversary_bound
    assert r.qber == q


def test_symmetric_rate_spec_digits():
    assert abs(symmetric_rate(0.05).rate - 0.4272062) < 1e-6
    r = symmetric_rate(0.25)
    assert abs(r.rate + 0.6225562) < 1e-6 and r.rate_clamped == 0


@pytest.mark.parametrize("q", [-0.01, 0.51])
def test_symmetric_rate_domain(q):
    with pytest.raises(DomainError):
        symmetric_rate(q)


def test_symmetric_rate_strictly_decreasing():
    rates = [symmetric_rate(q).rate for q in np.linspace(0, 0.5, 501)]
    assert np.all(np.diff(rates) < 0)


@pytest.mark.parametrize("sigma, expected", [(1.0, 0.0), (0.0, 1.0), (0.9, H2_005)])
def test_symmetric_adversary_bound(sigma, expected):
    assert symmetric_adversary_bound(sigma) == pytest.approx(expected, abs=1e-12)


def test_report_rejects_bad_bound():
    with pytest.raises(DomainError):
        KeyRateReport(mutual_info=1.0, adversary_bound=1.5)


def test_general_bound_diagonal_vs_grid_oracle():
    d = diagonal_data(0.9)
    bound, trace = general_adversary_bound(d)
    assert abs(bound - 0.2863969) < 1e-6
    oracle = brute_bound(d.d, np.arange(1, 3 + 5e-4, 1e-3), np.linspace(0, math.pi, 3143)[1:-1])
    assert abs(bound - oracle) < 1e-4
    p = trace.best_params
    assert p.x4 * (1 / math.sin(p.theta)) == pytest.approx(1.0, abs=1e-9)


def test_general_bound_perfect_correlations():
    bound, _ = general_adversary_bound(diagonal_data(1.0))
    assert bound == pytest.approx(0.0, abs=1e-12)


def unsharp_config(rounds=1):
    alice = (MeasurementModel(Z_AXIS, 0.8, 0.1), MeasurementModel.sharp(X_AXIS))
    return SimConfig.werner(0.95, rounds, alice=alice)


def test_general_bound_dominates_true_calibration():
    cfg = unsharp_config()
    d = exact_data(cfg)
    p = true_calibration(*cfg.alice)
    dbar = transform(d, p)
    assert feasible(dbar)
    at_truth = binary_entropy((1 - dbar[2, 2]) / 2)
    bound, _ = general_adversary_bound(d)
    assert bound >= at_truth


def near_bb84_data(rng):
    def tilt(axis):
        v = np.asarray(axis) + rng.normal(scale=0.1, size=3)
        return tuple(v / np.linalg.norm(v))

    def meas(axis):
        eta = rng.uniform(0.85, 1.0)
        return MeasurementModel(tilt(axis), eta, rng.uniform(-1, 1) * min(0.05, 1 - eta))

    cfg = SimConfig.werner(
        rng.uniform(0.85, 1.0), 1, alice=(meas(Z_AXIS), meas(X_AXIS)), bob=(meas(Z_AXIS), meas(X_AXIS))
    )
    return exact_data(cfg)


def test_general_bound_matches_3d_brute_force(rng):
    for _ in range(3):
        d = near_bb84_data(rng)
        bound, _ = general_adversary_bound(d, OptimizerOptions(x_max=3.0))
        assert bound < 1.0
        oracle = brute_bound(
            d.d, np.linspace(1, 3, 101), np.linspace(0, math.pi, 602)[1:-1], np.linspace(-1, 1, 21)
        )
        assert bound >= oracle - 1e-12
        assert bound - oracle < 1e-4


def test_general_bound_saturates_at_one():
    # E(XY') large enough that a rotation cancels E(X'Y') entirely
    d = DataMatrix([[1, 0, 0], [0, 0.6, 0.5], [0, 0.1, 0.3]])
    bound, trace = general_adversary_bound(d)
    assert bound == 1.0
    assert trace.min_abs_correlation <= 1e-12
    assert feasible(transform(d, trace.best_params))
    assert abs(transform(d, trace.best_params)[2, 2]) < 1e-9


def test_general_bound_probes_are_dominated(rng):
    d = exact_data(unsharp_config())
    probes = [random_params(rng) for _ in range(50)]
    bound, _ = general_adversary_bound(d, probes=probes)
    for p in probes:
        dbar = transform(d, p)
        if feasible(dbar):
            assert bound >= binary_entropy((1 - min(abs(dbar[2, 2]), 1)) / 2)


def test_general_bound_best_params_feasible(rng):
    for _ in range(10):
        cfg = SimConfig(
            state=random_state(rng),
            alice=(random_measurement(rng), random_measurement(rng)),
            bob=(random_measurement(rng), random_measurement(rng)),
            rounds=1,
        )
        d = exact_data(cfg)
        bound, trace = general_adversary_bound(d)
        dbar = transform(d, trace.best_params)
        assert feasible(dbar)
        assert trace.feasibility_margin >= -1e-9
        assert bound == pytest.approx(binary_entropy((1 - min(abs(dbar[2, 2]), 1)) / 2), abs=1e-9) or bound == 1.0


def test_general_bound_rejects_infeasible():
    with pytest.raises(InfeasibleError):
        general_adversary_bound(DataMatrix([[1, 0.9, 0], [-0.9, 0.9, 0], [0, 0, 0.5]]))
    with pytest.raises(UndefinedCellError):
        general_adversary_bound(DataMatrix([[1, 0, 0], [0, math.nan, 0], [0, 0, 0.5]]))


def test_theta_stays_inside_safe_interval(rng):
    opts = OptimizerOptions()
    for sigma in (0.0, 0.3, 0.9, 1.0):
        _, trace = general_adversary_bound(diagonal_data(sigma), opts)
        lo, hi = trace.theta_range
        assert lo >= opts.eps and hi <= math.pi - opts.eps
        assert opts.eps <= trace.best_params.theta <= math.pi - opts.eps


def test_deterministic(rng):
    cfg = SimConfig(
        state=random_state(rng),
        alice=(random_measurement(rng), random_measurement(rng)),
        bob=(random_measurement(rng), random_measurement(rng)),
        rounds=1,
    )
    d = exact_data(cfg)
    a = general_adversary_bound(d)
    b = general_adversary_bound(d)
    assert a == b


@pytest.mark.parametrize("sigma, rate", [(0.9, RATE_005), (1.0, 1.0)])
def test_rate_from_data(sigma, rate):
    for method in ("auto", "analytic", "optimize"):
        r = rate_from_data(diagonal_data(sigma), method=method)
        assert r.rate == pytest.approx(rate, abs=1e-9)
    assert rate_from_data(diagonal_data(0.9), method="optimize").rate == pytest.approx(
        symmetric_rate(0.05).rate, abs=1e-6
    )


def test_rate_from_data_no_correlation():
    d = DataMatrix([[1, 0.1, 0], [0.2, 0.02, 0.1], [0, 0.05, 0.4]])
    r = rate_from_data(d)
    assert r.mutual_info == pytest.approx(0.0, abs=1e-12)
    assert r.rate <= 0


def test_rate_from_data_auto_uses_optimizer_off_diagonal():
    d = DataMatrix([[1, 0, 0], [0, 0.9, 1e-6], [0, 0, 0.9]])
    assert rate_from_data(d).optimizer_trace is not None
    assert rate_from_data(diagonal_data(0.9)).optimizer_trace is None
    with pytest.raises(DomainError):
        rate_from_data(d, method="analytic")


def test_consistency_on_grid():
    for sigma in np.linspace(0, 1, 100):
        got = rate_from_data(diagonal_data(sigma), method="optimize").rate
        assert abs(got - symmetric_rate((1 - sigma) / 2).rate) < 1e-6


def test_noise_never_increases_rate(rng):
    mats = [diagonal_data(0.95).d]
    for _ in range(5):
        cfg = SimConfig.werner(
            rng.uniform(0.85, 1.0), 1,
            alice=(random_measurement(rng, Z_AXIS), random_measurement(rng, X_AXIS)),
        )
        mats.append(exact_data(cfg).d)
    for d in mats:
        base = rate_from_data(DataMatrix(d), method="optimize").rate
        for lam in (0.99, 0.9, 0.7):
            scaled = d.copy()
            scaled[1:] *= lam
            assert rate_from_data(DataMatrix(scaled), method="optimize").rate <= base + 1e-12


def test_threshold_qber():
    q = threshold_qber()
    assert abs(q - 0.1100279) < 1e-6
    assert q == pytest.approx(Q_STAR, abs=2e-9)
    assert abs(binary_entropy(q) - 0.5) < 1e-6
    assert symmetric_rate(q - 0.01).rate > 0
    assert symmetric_rate(q + 0.01).rate < 0
