"""Calibration-robust key-rate bounds for entanglement-based BB84.

Only Alice's device is assumed to measure a qubit; her measurements may be
unsharp, biased and not mutually unbiased.  The package maps observed
correlation data to the data of ideal measurements, maximises the
adversary's conditional entropy over all consistent calibrations and
returns the one-way key rate.
"""
from .calibration import (
    CalibrationParams,
    DataMatrix,
    SymmetricObservation,
    diagonal_data,
    feasible,
    r_matrix,
    s_matrix,
    transform,
)
from .entropy import (
    CorrelationTriple,
    JointDistribution,
    binary_entropy,
    conditional_entropy,
    disagreement_entropy_bound,
    joint_from_correlations,
    mutual_information,
)
from .errors import (
    DegenerateMeasurementError,
    DomainError,
    InfeasibleError,
    SingularAngleError,
    UndefinedCellError,
)
from .keyrate import (
    KeyRateReport,
    OptimizerOptions,
    general_adversary_bound,
    rate_from_data,
    symmetric_adversary_bound,
    symmetric_rate,
    threshold_qber,
)
from .qubit import (
    MeasurementModel,
    TwoQubitState,
    expectation,
    outcome_distribution,
    true_calibration,
    werner_state,
)
from .simulation import EstimatedDataMatrix, SimConfig, exact_data, run

__version__ = "0.1.0"
