"""Monte Carlo sampling of the measurement stage of entanglement-based BB84.

Each round Alice picks one of her two measurements and Bob one of his,
uniformly and independently, and the outcome pair is drawn from the exact
quantum distribution.  Rounds are split into fixed-size blocks; block ``k``
draws from a Philox stream keyed by ``(seed, k)``, so the estimate does not
depend on how blocks are scheduled across workers.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calibration import DataMatrix
from .entropy import SIGNS
from .errors import DomainError
from .qubit import (
    MeasurementModel,
    TwoQubitState,
    X_AXIS,
    Z_AXIS,
    expectation,
    outcome_distribution,
    werner_state,
)

BLOCK_SIZE = 1 << 16

_S = np.array(SIGNS, dtype=float)


def ideal_pair():
    """Sharp Z and X measurements; on |Phi+> both give correlation +1."""
    return (MeasurementModel.sharp(Z_AXIS), MeasurementModel.sharp(X_AXIS))


@dataclass(frozen=True)
class SimConfig:
    state: TwoQubitState
    alice: tuple
    bob: tuple
    rounds: int
    seed: int = 0
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise DomainError(f"rounds must be a positive integer, got {self.rounds!r}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.block_size < 1:
            raise DomainError("block_size must be positive")
        for pair in (self.alice, self.bob):
            if len(pair) != 2 or not all(isinstance(m, MeasurementModel) for m in pair):
                raise DomainError("each party needs exactly two MeasurementModel instances")

    @classmethod
    def werner(cls, visibility, rounds, seed=0, alice=None, bob=None, **kw):
        return cls(
            state=werner_state(visibility),
            alice=tuple(alice) if alice is not None else ideal_pair(),
            bob=tuple(bob) if bob is not None else ideal_pair(),
            rounds=rounds,
            seed=seed,
            **kw,
        )


@dataclass(frozen=True)
class EstimatedDataMatrix:
    """Sample-mean data matrix with per-cell standard errors.

    ``counts[i, j]`` is the number of rounds in which Alice used her
    measurement ``i`` and Bob his measurement ``j``.  Cells without samples
    are NaN.
    """

    d: DataMatrix
    counts: np.ndarray
    stderr: np.ndarray

    def to_dict(self):
        out = self.d.to_dict()
        out["counts"] = [[int(c) for c in row] for row in self.counts]
        out["stderr"] = [[None if math.isnan(v) else float(v) for v in row] for row in self.stderr]
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def _outcome_cdfs(config):
    cdf = np.empty((2, 2, 4))
    for i, ma in enumerate(config.alice):
        for j, mb in enumerate(config.bob):
            cdf[i, j] = np.cumsum(outcome_distribution(config.state, ma, mb).p.ravel())
    cdf[..., -1] = 1.0
    return cdf


def _block_tally(config, cdf, k):
    """Counts indexed [alice basis, bob basis, alice outcome, bob outcome] for block ``k``."""
    n = min(config.block_size, config.rounds - k * config.block_size)
    ss = np.random.SeedSequence(config.seed, spawn_key=(k,))
    rng = np.random.Generator(np.random.Philox(ss))
    ia = rng.integers(0, 2, size=n)
    ib = rng.integers(0, 2, size=n)
    u = rng.random(n)
    c = cdf[ia, ib]
    outcome = (u[:, None] >= c[:, :3]).sum(axis=1)
    flat = ia * 8 + ib * 4 + outcome
    return np.bincount(flat, minlength=16).reshape(2, 2, 2, 2)


def tally(config: SimConfig, workers: int = 1) -> np.ndarray:
    cdf = _outcome_cdfs(config)
    blocks = range(math.ceil(config.rounds / config.block_size))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _block_tally(config, cdf, k), blocks))
    else:
        parts = [_block_tally(config, cdf, k) for k in blocks]
    # integer sum: independent of block order
    return np.sum(parts, axis=0)


def estimate_from_tally(t: np.ndarray) -> EstimatedDataMatrix:
    """Sample means of every cell of the data matrix.

    Products E(A_i B_j) use the rounds of basis pair (i, j).  Marginals
    E(A_i) and E(B_j) use the matched pairs (i, i) and (j, j), so that the
    key-like pairs always reconstruct to an exact empirical distribution.
    """
    counts = t.sum(axis=(2, 3))
    d = np.full((3, 3), np.nan)
    se = np.full((3, 3), np.nan)
    d[0, 0], se[0, 0] = 1.0, 0.0

    def put(r, c, mean, n):
        d[r, c] = mean
        se[r, c] = math.sqrt(max(0.0, 1.0 - mean * mean) / n)

    for i in range(2):
        for j in range(2):
            n = counts[i, j]
            if n:
                put(i + 1, j + 1, float(_S @ t[i, j] @ _S) / n, n)
        n = counts[i, i]
        if n:
            put(i + 1, 0, float(_S @ t[i, i].sum(axis=1)) / n, n)
            put(0, i + 1, float(_S @ t[i, i].sum(axis=0)) / n, n)
    return EstimatedDataMatrix(DataMatrix(d), counts, se)


def run(config: SimConfig, workers: int = 1) -> EstimatedDataMatrix:
    """Simulate ``config.rounds`` rounds and estimate the data matrix."""
    return estimate_from_tally(tally(config, workers))


def exact_data(config: SimConfig) -> DataMatrix:
    """Infinite-statistics data matrix from exact expectation values."""
    (a1, a2), (b1, b2) = config.alice, config.bob
    s = config.state
    d = np.empty((3, 3))
    d[0] = [1.0, expectation(s, None, b1), expectation(s, None, b2)]
    for r, ma in ((1, a1), (2, a2)):
        d[r] = [expectation(s, ma, None), expectation(s, ma, b1), expectation(s, ma, b2)]
    return DataMatrix(d)
