"""One-way key rate bounds for calibration-robust entanglement-based BB84.

The rate is ``I(X:Y) - max H(Xbar'|Y')`` where the maximum runs over every
calibration of Alice's qubit measurements consistent with the observed data
matrix, and ``H(Xbar'|Y')`` is bounded by ``h2((1 - E(Xbar'Y')) / 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .calibration import (
    CalibrationParams,
    DataMatrix,
    SymmetricObservation,
    feasibility_margin,
    feasible,
    require_feasible,
    transform,
)
from .entropy import (
    CLAMP_TOL,
    binary_entropy,
    disagreement_entropy_bound,
    joint_from_correlations,
    mutual_information,
)
from .errors import DomainError, InfeasibleError


@dataclass(frozen=True)
class OptimizerOptions:
    """Settings for :func:`general_adversary_bound`.

    ``x_max`` caps x4 (and so |x3| <= x_max - 1); theta is searched on
    ``theta_points`` grid points in ``(eps, pi - eps)`` and the best
    ``refine_starts`` local minima are refined by golden-section search.
    """

    x_max: float = 8.0
    theta_points: int = 721
    refine_starts: int = 5
    refine_tol: float = 1e-12
    eps: float = 1e-6
    zero_tol: float = 1e-12

    def __post_init__(self):
        if self.x_max < 1.0:
            raise DomainError("x_max must be >= 1")
        if self.theta_points < 3:
            raise DomainError("theta_points must be >= 3")
        if not 0.0 < self.eps < math.pi / 4:
            raise DomainError("eps must lie in (0, pi/4)")


@dataclass(frozen=True)
class OptimizerTrace:
    iterations: int
    best_params: CalibrationParams
    feasibility_margin: float
    min_abs_correlation: float
    theta_range: tuple


@dataclass(frozen=True)
class KeyRateReport:
    mutual_info: float
    adversary_bound: float
    qber: float | None = None
    optimizer_trace: OptimizerTrace | None = None
    rate: float = field(init=False)
    rate_clamped: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.adversary_bound <= 1.0:
            raise DomainError(f"adversary bound {self.adversary_bound!r} outside [0, 1]")
        rate = self.mutual_info - self.adversary_bound
        object.__setattr__(self, "rate", rate)
        object.__setattr__(self, "rate_clamped", max(0.0, rate))

    def to_dict(self):
        out = {
            "mutual_info": self.mutual_info,
            "adversary_bound": self.adversary_bound,
            "rate": self.rate,
            "rate_clamped": self.rate_clamped,
            "qber": self.qber,
            "optimizer": None,
        }
        t = self.optimizer_trace
        if t is not None:
            out["optimizer"] = {
                "iterations": t.iterations,
                "best_params": dict(zip(("x1", "x2", "x3", "x4", "theta"), t.best_params.astuple())),
                "feasibility_margin": t.feasibility_margin,
                "min_abs_correlation": t.min_abs_correlation,
                "theta_range": list(t.theta_range),
            }
        return out


def symmetric_rate(q: float) -> KeyRateReport:
    """Closed form 1 - 2 h2(Q) for symmetric data with QBER ``q``."""
    if not 0.0 <= q <= 0.5:
        raise DomainError(f"QBER must lie in [0, 1/2], got {q!r}")
    h = binary_entropy(q)
    return KeyRateReport(mutual_info=1.0 - h, adversary_bound=h, qber=q)


def symmetric_adversary_bound(sigma) -> float:
    """max over x4 >= 1, csc(theta) >= 1 of h2((1 - sigma x4 csc) / 2), i.e. h2((1 - sigma) / 2)."""
    if not isinstance(sigma, SymmetricObservation):
        sigma = SymmetricObservation(float(sigma))
    return binary_entropy(sigma.qber)


# ---------------------------------------------------------------------------
# general data matrices
#
# In S @ R @ D the third row is x3 * D[0] + x4 * u(theta) with
# u = -cot(theta) D[1] + csc(theta) D[2].  Row 1 only depends on (x1, x2) and
# (0, 1) reproduces D[1], which is feasible whenever D is, so the search is
# over (x3, x4, theta).  For fixed theta every constraint and the objective
# E(Xbar'Y') are linear in z = (x3, x4): the inner problem is solved exactly
# on the vertices of the feasible polygon.

_PAIRS = list(combinations(range(18), 2))
_PI = np.array([p[0] for p in _PAIRS])
_PJ = np.array([p[1] for p in _PAIRS])


def _constraints(d, thetas, x_max):
    """Return (G, h) with G of shape (n, 18, 2) and h of shape (18,): G z <= h."""
    n = len(thetas)
    cot = np.cos(thetas) / np.sin(thetas)
    csc = 1.0 / np.sin(thetas)
    u = -cot[:, None] * d[1] + csc[:, None] * d[2]  # (n, 3)
    # coefficient rows of (x3, x4) for the entries of the new third row
    e = np.empty((n, 3, 2))
    e[:, :, 0] = d[0]
    e[:, :, 1] = u
    G = np.empty((n, 18, 2))
    h = np.empty(18)
    G[:, 0] = (0.0, -1.0)
    h[0] = -1.0
    G[:, 1] = (0.0, 1.0)
    h[1] = x_max
    G[:, 2] = (1.0, -1.0)
    h[2] = -1.0
    G[:, 3] = (-1.0, -1.0)
    h[3] = -1.0
    for k in range(3):
        G[:, 4 + 2 * k] = e[:, k]
        G[:, 5 + 2 * k] = -e[:, k]
        h[4 + 2 * k] = h[5 + 2 * k] = 1.0
    row = 10
    for j in (1, 2):
        for a in (1, -1):
            for b in (1, -1):
                # 1 + a e0 + b D[0, j] + ab e_j >= -4 tol
                G[:, row] = -a * e[:, 0] - a * b * e[:, j]
                h[row] = 1.0 + b * d[0, j] + 4.0 * CLAMP_TOL
                row += 1
    return G, h, e[:, 2]


def _inner(d, thetas, x_max, with_point=False):
    """Exact min |E(Xbar'Y')| over (x3, x4) for each theta.

    Returns best |t| per theta (+inf where the polygon is empty); with
    ``with_point`` the optimal (x3, x4) of the first theta is returned too.
    """
    G, h, obj = _constraints(d, np.atleast_1d(thetas), x_max)
    g1, g2 = G[:, _PI], G[:, _PJ]
    h1, h2 = h[_PI], h[_PJ]
    det = g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]
    ok = np.abs(det) > 1e-14
    sdet = np.where(ok, det, 1.0)
    x3 = (h1 * g2[..., 1] - h2 * g1[..., 1]) / sdet
    x4 = (g1[..., 0] * h2 - g2[..., 0] * h1) / sdet
    lhs = G[:, None, :, 0] * x3[..., None] + G[:, None, :, 1] * x4[..., None]
    ok &= np.all(lhs <= h + 1e-12, axis=-1)
    t = obj[:, None, 0] * x3 + obj[:, None, 1] * x4
    lo = np.where(ok, t, np.inf).min(axis=1)
    hi = np.where(ok, t, -np.inf).max(axis=1)
    best = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    best = np.where(np.isfinite(lo), best, np.inf)
    if not with_point:
        return best
    if not np.isfinite(lo[0]):
        return best, (math.nan, math.nan)
    t0, ok0, a, b = t[0], ok[0], x3[0], x4[0]
    if lo[0] < 0.0 < hi[0]:
        # zero crossing on the segment between the extreme vertices
        i = int(np.argmin(np.where(ok0, t0, np.inf)))
        k = int(np.argmax(np.where(ok0, t0, -np.inf)))
        lam = hi[0] / (hi[0] - lo[0])
        return best, (lam * a[i] + (1 - lam) * a[k], lam * b[i] + (1 - lam) * b[k])
    # optimal vertex, ties to the lexicographically smallest (x3, x4)
    absval = np.where(ok0, np.abs(t0), np.inf)
    cand = np.flatnonzero(absval == absval.min())
    k = cand[np.lexsort((b[cand], a[cand]))[0]]
    return best, (float(a[k]), float(b[k]))


def _golden(f, a, b, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    dd = a + invphi * (b - a)
    fc, fd = f(c), f(dd)
    n = 2
    while b - a > tol:
        if fc <= fd:
            b, dd, fd = dd, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, dd, fd
            dd = a + invphi * (b - a)
            fd = f(dd)
        n += 1
    return (c, fc, n) if fc <= fd else (dd, fd, n)


def _objective(d: DataMatrix, p: CalibrationParams) -> float:
    c = transform(d, p).triple(2, 2)
    # feasible matrices may overshoot |E| = 1 by the clamp tolerance
    c = type(c)(c.ex, c.ey, float(np.clip(c.exy, -1.0, 1.0)))
    return disagreement_entropy_bound(c)


def general_adversary_bound(d: DataMatrix, opts: OptimizerOptions | None = None, probes=()):
    """Maximise h2((1 - E(Xbar'Y')) / 2) over feasible calibrations of ``d``.

    Returns ``(bound, trace)``.  Any feasible ``probes`` are evaluated too, so
    the result is never below the objective at a supplied point.  Raises
    :class:`InfeasibleError` if ``d`` is invalid or no calibration is feasible.
    """
    opts = opts or OptimizerOptions()
    require_feasible(d)
    dm = d.d
    lo, hi = opts.eps, math.pi - opts.eps
    grid = np.linspace(lo, hi, opts.theta_points)
    vals = _inner(dm, grid, opts.x_max)
    evaluated = [float(grid[0]), float(grid[-1])]
    n_eval = len(grid)
    if not np.any(np.isfinite(vals)):
        raise InfeasibleError("no feasible calibration for this data matrix")

    # ties between grid points go to the smallest theta (argmin takes the first)
    best_i = int(np.argmin(vals))
    best = (float(vals[best_i]), float(grid[best_i]))

    interior = np.arange(1, len(grid) - 1)
    is_min = (vals[interior] <= vals[interior - 1]) & (vals[interior] <= vals[interior + 1])
    starts = interior[is_min & np.isfinite(vals[interior])]
    starts = starts[np.argsort(vals[starts], kind="stable")][: opts.refine_starts]

    def scalar(th):
        evaluated.append(th)
        return float(_inner(dm, th, opts.x_max)[0])

    for i in starts:
        if best[0] <= opts.zero_tol:
            break
        th, val, n = _golden(scalar, grid[i - 1], grid[i + 1], opts.refine_tol)
        n_eval += n
        if val < best[0]:
            best = (val, float(th))

    tmin, theta = best
    _, (x3, x4) = _inner(dm, theta, opts.x_max, with_point=True)
    x4 = max(x4, 1.0)
    x3 = float(np.clip(x3, -(x4 - 1.0), x4 - 1.0))
    params = CalibrationParams(0.0, 1.0, x3, x4, theta)
    bound = 1.0 if tmin <= opts.zero_tol else binary_entropy((1.0 - min(tmin, 1.0)) / 2.0)

    for p in probes:
        if feasible(transform(d, p)):
            val = _objective(d, p)
            if val > bound:
                bound, params = val, p
                tmin = abs(float(transform(d, p)[2, 2]))

    trace = OptimizerTrace(
        iterations=n_eval,
        best_params=params,
        feasibility_margin=feasibility_margin(transform(d, params)),
        min_abs_correlation=tmin,
        theta_range=(min(evaluated), max(evaluated)),
    )
    return bound, trace


def rate_from_data(d: DataMatrix, opts: OptimizerOptions | None = None, method: str = "auto") -> KeyRateReport:
    """Key rate bound from a data matrix.

    ``method`` is ``"auto"`` (closed form when ``d`` is diagonal within 1e-9,
    optimiser otherwise), ``"analytic"`` or ``"optimize"``.
    """
    if method not in ("auto", "analytic", "optimize"):
        raise ValueError(f"unknown method {method!r}")
    require_feasible(d)
    mi = mutual_information(joint_from_correlations(d.triple(1, 1)))
    qber = (1.0 - float(d[1, 1])) / 2.0
    diagonal = d.is_diagonal(1e-9)
    if method == "analytic" and not diagonal:
        raise DomainError("closed-form bound needs a diagonal data matrix")
    if method == "analytic" or (method == "auto" and diagonal):
        bound = binary_entropy((1.0 - min(abs(float(d[2, 2])), 1.0)) / 2.0)
        return KeyRateReport(mutual_info=mi, adversary_bound=bound, qber=qber)
    bound, trace = general_adversary_bound(d, opts)
    return KeyRateReport(mutual_info=mi, adversary_bound=bound, qber=qber, optimizer_trace=trace)


def threshold_qber(tol: float = 1e-9) -> float:
    """Root of 1 - 2 h2(Q) on (0, 1/2) by bisection."""
    lo, hi = 1e-6, 0.5 - 1e-6
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 1.0 - 2.0 * binary_entropy(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
