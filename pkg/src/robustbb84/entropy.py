"""Shannon quantities for pairs of dichotomic (+1/-1) random variables.

All entropies are in bits.  Outcome index 0 stands for +1, index 1 for -1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError

#: a reconstructed probability may dip this far below zero before the
#: triple is rejected; milder violations are clamped (finite statistics)
CLAMP_TOL = 1e-9

SIGNS = (1, -1)


def binary_entropy(x):
    """Binary entropy h2(x) in bits, with 0 log 0 = 0.

    Accepts a scalar or an array.  Raises :class:`DomainError` for values
    outside [0, 1].

    >>> float(binary_entropy(0.5))
    1.0
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f"binary_entropy needs 0 <= x <= 1, got {x!r}")
    inner = (arr > 0.0) & (arr < 1.0)
    safe = np.where(inner, arr, 0.5)
    out = np.where(inner, -safe * np.log2(safe) - (1.0 - safe) * np.log2(1.0 - safe), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def _shannon(probs):
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True)
class CorrelationTriple:
    """Expectations E(A), E(B), E(AB) of two +/-1 variables."""

    ex: float
    ey: float
    exy: float

    def cell_values(self):
        """Unnormalised 4p(a, b) = 1 + a ex + b ey + ab exy as a 2x2 array."""
        s = np.array(SIGNS, dtype=float)
        return 1.0 + s[:, None] * self.ex + s[None, :] * self.ey + np.outer(s, s) * self.exy

    def is_valid(self, tol=CLAMP_TOL):
        return bool(np.all(self.cell_values() / 4.0 >= -tol))


@dataclass(frozen=True)
class JointDistribution:
    """2x2 table ``p[i, j]`` of P(A = SIGNS[i], B = SIGNS[j])."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(2, 2)
        if np.any(p < 0.0):
            raise InfeasibleError(f"negative probability in {p.tolist()}")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InfeasibleError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def prob(self, a, b):
        return float(self.p[SIGNS.index(a), SIGNS.index(b)])

    def marginal_a(self):
        return self.p.sum(axis=1)

    def marginal_b(self):
        return self.p.sum(axis=0)

    def correlations(self):
        """Recompute the CorrelationTriple this distribution realises."""
        s = np.array(SIGNS, dtype=float)
        return CorrelationTriple(
            ex=float(self.marginal_a() @ s),
            ey=float(self.marginal_b() @ s),
            exy=float(np.sum(self.p * np.outer(s, s))),
        )

    def entropy_a(self):
        return _shannon(self.marginal_a())

    def entropy_b(self):
        return _shannon(self.marginal_b())

    def joint_entropy(self):
        return _shannon(self.p)


def joint_from_correlations(c: CorrelationTriple) -> JointDistribution:
    """Rebuild the joint distribution from expectation values.

    Uses p(a, b) = (1 + a ex + b ey + ab exy) / 4.  Cells in
    [-CLAMP_TOL, 0) are clamped to zero and the table renormalised; anything
    more negative raises :class:`InfeasibleError` naming the sign pair.
    """
    p = c.cell_values() / 4.0
    i, j = np.unravel_index(np.argmin(p), p.shape)
    if p[i, j] < -CLAMP_TOL:
        pair = (SIGNS[i], SIGNS[j])
        raise InfeasibleError(
            f"triple {c} gives p{pair} = {p[i, j]:.3g} < 0", sign_pair=pair
        )
    if np.any(p < 0.0):
        p = np.clip(p, 0.0, None)
    return JointDistribution(p / p.sum())


def mutual_information(j: JointDistribution) -> float:
    """I(A:B) = H(A) + H(B) - H(A,B), floored at zero against rounding."""
    return max(0.0, j.entropy_a() + j.entropy_b() - j.joint_entropy())


def conditional_entropy(j: JointDistribution) -> float:
    """H(A|B) = H(A,B) - H(B)."""
    return max(0.0, j.joint_entropy() - j.entropy_b())


def disagreement_entropy_bound(c: CorrelationTriple) -> float:
    """Fano-type upper bound h2(P(A != B)) = h2((1 - E(AB)) / 2) on H(A|B)."""
    if not -1.0 <= c.exy <= 1.0:
        raise DomainError(f"E(AB) must lie in [-1, 1], got {c.exy!r}")
    return binary_entropy((1.0 - c.exy) / 2.0)
