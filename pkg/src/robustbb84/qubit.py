"""Two-qubit states and dichotomic qubit POVMs.

A measurement with Bloch axis ``n``, sharpness ``eta`` and bias ``b`` has
effects ``E(+/-) = ((1 +/- b) I +/- eta n.sigma) / 2`` and observable
``E(+) - E(-) = b I + eta n.sigma``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationParams
from .entropy import JointDistribution, SIGNS
from .errors import DegenerateMeasurementError, DomainError, SingularAngleError

I2 = np.eye(2, dtype=complex)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)

_PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class TwoQubitState:
    """Density matrix of a qubit pair, Alice's qubit first."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise DomainError(f"expected a 4x4 density matrix, got shape {rho.shape}")
        if not np.allclose(rho, rho.conj().T, rtol=0, atol=1e-12):
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise DomainError(f"density matrix has trace {np.trace(rho).real!r}")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise DomainError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def eigenvalues(self):
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.rho)[::-1]


@dataclass(frozen=True)
class MeasurementModel:
    """Two-outcome qubit POVM; valid iff ``sharpness + |bias| <= 1``."""

    axis: tuple = Z_AXIS
    sharpness: float = 1.0
    bias: float = 0.0

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise DomainError(f"axis must be a unit 3-vector, got {self.axis!r}")
        if not 0.0 <= self.sharpness <= 1.0:
            raise DomainError(f"sharpness must lie in [0, 1], got {self.sharpness!r}")
        if self.sharpness + abs(self.bias) > 1.0 + 1e-12:
            raise DomainError(
                f"sharpness + |bias| = {self.sharpness + abs(self.bias)!r} exceeds 1"
            )
        object.__setattr__(self, "axis", tuple(float(a) for a in axis))

    @classmethod
    def sharp(cls, axis):
        return cls(axis=axis, sharpness=1.0, bias=0.0)

    def observable(self):
        return self.bias * I2 + self.sharpness * np.einsum("i,ijk->jk", self.axis, PAULI)

    def effects(self):
        """The pair (E+, E-) of POVM elements."""
        obs = self.observable()
        return (I2 + obs) / 2.0, (I2 - obs) / 2.0


def _observable(m):
    return I2 if m is None else m.observable()


def werner_state(visibility: float) -> TwoQubitState:
    """v |Phi+><Phi+| + (1 - v) I/4."""
    if not 0.0 <= visibility <= 1.0:
        raise DomainError(f"visibility must lie in [0, 1], got {visibility!r}")
    phi = np.outer(_PHI_PLUS, _PHI_PLUS.conj())
    return TwoQubitState(visibility * phi + (1.0 - visibility) * np.eye(4) / 4.0)


def expectation(state: TwoQubitState, ma: MeasurementModel | None, mb: MeasurementModel | None) -> float:
    """tr[rho (A x B)]; pass ``None`` on either side for the identity (marginals)."""
    op = np.kron(_observable(ma), _observable(mb))
    return float(np.real(np.trace(state.rho @ op)))


def outcome_distribution(state: TwoQubitState, ma: MeasurementModel, mb: MeasurementModel) -> JointDistribution:
    """p(a, b) = tr[rho (E_a x F_b)] for a, b in (+1, -1)."""
    ea, fb = ma.effects(), mb.effects()
    p = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            p[i, j] = np.real(np.trace(state.rho @ np.kron(ea[i], fb[j])))
    # rounding can leave -1e-17 on an exactly zero cell
    p = np.clip(p, 0.0, None)
    return JointDistribution(p / p.sum())


def true_calibration(ma: MeasurementModel, ma_prime: MeasurementModel):
    """Calibration parameters realised by Alice's measurement pair.

    Sharpening ``A = b + eta * A_sharp`` gives ``x1 = -b/eta``, ``x2 = 1/eta``
    (likewise x3, x4 for the primed measurement); theta is the angle between
    the two Bloch axes.
    """
    for m in (ma, ma_prime):
        if m.sharpness == 0.0:
            raise DegenerateMeasurementError("zero-sharpness measurement has no calibration")
    cos_t = float(np.clip(np.dot(ma.axis, ma_prime.axis), -1.0, 1.0))
    theta = float(np.arccos(cos_t))
    if np.sin(theta) < 1e-12:
        raise SingularAngleError(f"measurement axes are (anti)parallel, theta = {theta!r}")
    return CalibrationParams(
        x1=-ma.bias / ma.sharpness,
        x2=1.0 / ma.sharpness,
        x3=-ma_prime.bias / ma_prime.sharpness,
        x4=1.0 / ma_prime.sharpness,
        theta=theta,
    )


def complementary_axis(axis, partner):
    """Unit vector orthogonal to ``axis`` in its plane with ``partner``, on partner's side."""
    a = np.asarray(axis, dtype=float)
    perp = np.asarray(partner, dtype=float) - np.dot(partner, a) * a
    norm = np.linalg.norm(perp)
    if norm < 1e-12:
        raise SingularAngleError("axes are (anti)parallel")
    return tuple(perp / norm)


def random_pure_state(rng, dim=4):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_state(rng, rank=4) -> TwoQubitState:
    """Dirichlet-weighted mixture of ``rank`` random pure states."""
    weights = rng.dirichlet(np.ones(rank))
    rho = np.zeros((4, 4), dtype=complex)
    for w in weights:
        psi = random_pure_state(rng)
        rho += w * np.outer(psi, psi.conj())
    rho = (rho + rho.conj().T) / 2.0
    return TwoQubitState(rho / np.trace(rho).real)


def random_axis(rng):
    v = rng.normal(size=3)
    return tuple(v / np.linalg.norm(v))


def random_measurement(rng, axis=None) -> MeasurementModel:
    """Random valid POVM: eta in (0.05, 1], |b| <= 1 - eta."""
    eta = rng.uniform(0.05, 1.0)
    bias = rng.uniform(-1.0, 1.0) * (1.0 - eta)
    return MeasurementModel(axis=random_axis(rng) if axis is None else axis, sharpness=eta, bias=bias)

