"""Data-matrix algebra for calibration-robust BB84.

The data matrix collects every expectation value the two parties observe::

    [[1,      E(Y),    E(Y')  ],
     [E(X),   E(XY),   E(XY') ],
     [E(X'),  E(X'Y),  E(X'Y')]]

Alice's rows can be mapped to those of hypothetical sharp, mutually
unbiased measurements by the lower-triangular matrices ``S`` (unsharpness)
and ``R`` (relative angle).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .entropy import CLAMP_TOL, CorrelationTriple, SIGNS
from .errors import DomainError, InfeasibleError, SingularAngleError, UndefinedCellError

#: slack when checking the x2 >= 1 + |x1| style constraints
PARAM_TOL = 1e-12

PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class CalibrationParams:
    x1: float
    x2: float
    x3: float
    x4: float
    theta: float

    def __post_init__(self):
        if self.x2 < 1.0 + abs(self.x1) - PARAM_TOL:
            raise DomainError(f"need x2 >= 1 + |x1|, got x1={self.x1!r}, x2={self.x2!r}")
        if self.x4 < 1.0 + abs(self.x3) - PARAM_TOL:
            raise DomainError(f"need x4 >= 1 + |x3|, got x3={self.x3!r}, x4={self.x4!r}")
        if not 0.0 < self.theta < math.pi or math.sin(self.theta) <= 0.0:
            raise SingularAngleError(f"theta must lie in (0, pi), got {self.theta!r}")

    @classmethod
    def identity(cls):
        return cls(0.0, 1.0, 0.0, 1.0, math.pi / 2)

    def astuple(self):
        return (self.x1, self.x2, self.x3, self.x4, self.theta)


@dataclass(frozen=True)
class SymmetricObservation:
    """Symmetric bit error with uncorrelated cross-basis outcomes."""

    sigma: float

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 1.0:
            raise DomainError(f"sigma must lie in [0, 1], got {self.sigma!r}")

    @property
    def qber(self):
        return (1.0 - self.sigma) / 2.0


@dataclass(frozen=True)
class DataMatrix:
    """3x3 expectation table; only ``d[0, 0] == 1`` is enforced on construction.

    Transformed matrices may leave [-1, 1]; use :func:`feasible` to check.
    Undefined (unsampled) cells are NaN.
    """

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.shape != (3, 3):
            raise DomainError(f"data matrix must be 3x3, got shape {d.shape}")
        if d[0, 0] != 1.0:
            raise DomainError(f"d[0][0] must equal 1, got {d[0, 0]!r}")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def __getitem__(self, idx):
        return self.d[idx]

    def triple(self, i, j) -> CorrelationTriple:
        """(E(A_i), E(B_j), E(A_i B_j)) for Alice row i and Bob column j, both in {1, 2}."""
        return CorrelationTriple(float(self.d[i, 0]), float(self.d[0, j]), float(self.d[i, j]))

    @property
    def has_undefined(self):
        return bool(np.any(np.isnan(self.d)))

    def is_diagonal(self, tol=1e-9):
        off = self.d - np.diag(np.diag(self.d))
        return not self.has_undefined and bool(np.all(np.abs(off) <= tol))

    def to_dict(self):
        return {"d": [[None if math.isnan(v) else float(v) for v in row] for row in self.d]}

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict) or "d" not in obj:
            raise DomainError('data matrix JSON needs an object with key "d"')
        rows = obj["d"]
        if not isinstance(rows, list) or len(rows) != 3 or any(
            not isinstance(r, list) or len(r) != 3 for r in rows
        ):
            raise DomainError('"d" must be a 3x3 array')
        try:
            d = [[math.nan if v is None else float(v) for v in r] for r in rows]
        except (TypeError, ValueError) as exc:
            raise DomainError(f'non-numeric entry in "d": {exc}') from None
        return cls(np.array(d))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from None
        return cls.from_dict(obj)


def s_matrix(p: CalibrationParams) -> np.ndarray:
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [p.x1, p.x2, 0.0],
            [p.x3, 0.0, p.x4],
        ]
    )


def r_matrix(theta: float) -> np.ndarray:
    s = math.sin(theta)
    if not 0.0 < theta < math.pi or s <= 0.0:
        raise SingularAngleError(f"R is singular at theta = {theta!r}")
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -math.cos(theta) / s, 1.0 / s],
        ]
    )


def transform(d: DataMatrix, p: CalibrationParams, order: str = "printed") -> DataMatrix:
    """Map observed data to the hypothetical sharp, unbiased-basis data matrix.

    ``order="printed"`` computes ``S @ R @ D`` so that ``diag(1, s, s)`` maps to
    rows ``(x1, s x2, 0)`` and ``(x3, -s x4 cot, s x4 csc)``.  ``order="literal"``
    computes ``R @ S @ D``, which sharpens first and then rotates; it is the
    physically exact map for arbitrary axes.  The two agree at theta = pi/2.
    """
    if order == "printed":
        out = s_matrix(p) @ r_matrix(p.theta) @ d.d
    elif order == "literal":
        out = r_matrix(p.theta) @ s_matrix(p) @ d.d
    else:
        raise ValueError(f"unknown order {order!r}")
    # row 0 passes through both matrices untouched
    out[0] = d.d[0]
    return DataMatrix(out)


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    reason: str = ""
    cell: tuple | None = None
    sign_pair: tuple | None = None
    margin: float = 0.0

    def __bool__(self):
        return self.ok


def feasibility_margin(d: DataMatrix) -> float:
    """Smallest slack over the box and cell-probability constraints (>= 0 when feasible)."""
    free = np.abs(d.d).ravel()[1:]  # d[0, 0] == 1 is fixed
    slack = [1.0 - np.max(free)]
    for i, j in PAIRS:
        slack.append(float(np.min(d.triple(i, j).cell_values())) / 4.0)
    return float(min(slack))


def feasible(dbar: DataMatrix) -> Feasibility:
    """Whether every entry is in [-1, 1] and all four pairwise joints are distributions.

    The diagnostic names the first violated cell (1-based row, col) or the
    pair of observables and outcome signs.
    """
    d = dbar.d
    if np.any(np.isnan(d)):
        r, c = np.argwhere(np.isnan(d))[0]
        return Feasibility(False, f"cell (row {r + 1}, col {c + 1}) is undefined", cell=(r + 1, c + 1))
    for r in range(3):
        for c in range(3):
            if abs(d[r, c]) > 1.0 + CLAMP_TOL:
                return Feasibility(
                    False,
                    f"cell (row {r + 1}, col {c + 1}) = {d[r, c]:.6g} outside [-1, 1]",
                    cell=(r + 1, c + 1),
                )
    for i, j in PAIRS:
        p = dbar.triple(i, j).cell_values() / 4.0
        a, b = np.unravel_index(np.argmin(p), p.shape)
        if p[a, b] < -CLAMP_TOL:
            pair = (SIGNS[a], SIGNS[b])
            return Feasibility(
                False,
                f"joint of (row {i + 1}, col {j + 1}) has p{pair} = {p[a, b]:.3g} < 0",
                cell=(i + 1, j + 1),
                sign_pair=pair,
            )
    return Feasibility(True, margin=feasibility_margin(dbar))


def require_feasible(d: DataMatrix) -> None:
    """Raise unless ``d`` is a fully defined, feasible data matrix."""
    if d.has_undefined:
        raise UndefinedCellError("data matrix has undefined cells (no samples)")
    f = feasible(d)
    if not f:
        raise InfeasibleError(f.reason, sign_pair=f.sign_pair, cell=f.cell)


def diagonal_data(sigma) -> DataMatrix:
    """diag(1, sigma, sigma): symmetric bit error, no cross-basis correlations."""
    if not isinstance(sigma, SymmetricObservation):
        sigma = SymmetricObservation(float(sigma))
    return DataMatrix(np.diag([1.0, sigma.sigma, sigma.sigma]))
