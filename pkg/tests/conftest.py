import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_valid_triples(rng, n):
    """Uniform-ish valid triples: sample a random 2x2 distribution, read off its moments."""
    p = rng.dirichlet(np.full(4, 0.7), size=n).reshape(n, 2, 2)
    s = np.array([1.0, -1.0])
    ex = p.sum(axis=2) @ s
    ey = p.sum(axis=1) @ s
    exy = np.einsum("nij,i,j->n", p, s, s)
    return ex, ey, exy


def brute_bound(d, x4_values, theta_values, x3_fracs=(0.0,)):
    """Max of h2((1 - E(Xbar'Y'))/2) over a parameter grid by explicit S @ R @ D products.

    ``x3_fracs`` are fractions s with x3 = s (x4 - 1).
    """
    from robustbb84.entropy import binary_entropy

    d = np.asarray(d, dtype=float)
    best = -np.inf
    x4 = np.asarray(x4_values, dtype=float)
    for th in theta_values:
        r = np.array([[1, 0, 0], [0, 1, 0], [0, -np.cos(th) / np.sin(th), 1 / np.sin(th)]])
        rd = r @ d
        for frac in x3_fracs:
            s = np.zeros((len(x4), 3, 3))
            s[:, 0, 0] = 1
            s[:, 1, 1] = 1
            s[:, 2, 0] = frac * (x4 - 1)
            s[:, 2, 2] = x4
            dbar = s @ rd
            ok = np.all(np.abs(dbar) <= 1 + 1e-9, axis=(1, 2))
            for i in (1, 2):
                for j in (1, 2):
                    for a in (1, -1):
                        for b in (1, -1):
                            ok &= 1 + a * dbar[:, i, 0] + b * dbar[:, 0, j] + a * b * dbar[:, i, j] >= -4e-9
            if ok.any():
                t = np.min(np.abs(dbar[ok, 2, 2]))
                best = max(best, float(binary_entropy((1 - min(t, 1.0)) / 2)))
    return best
