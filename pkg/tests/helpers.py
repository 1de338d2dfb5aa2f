"""Shared test fixtures/oracles."""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from loewner_lab.drivers import make_driver
from loewner_lab.rng import mix, stream


def random_pwl(seed: int, n: int, energy: float, nodes: int = 8):
    """Random PWL driver on [0,1] rescaled to the requested Dirichlet energy."""
    rng = stream(mix(seed, 0))
    coarse = np.concatenate([[0.0], np.cumsum(rng.standard_normal(nodes))])
    t = np.arange(n + 1) / n
    v = np.interp(t, np.linspace(0, 1, nodes + 1), coarse)
    e = 0.5 * np.sum(np.diff(v) ** 2) * n
    if e > 0:
        v = v * np.sqrt(energy / e)
    return make_driver(v, 1.0)


def sup_abs_brownian_tail(a: float, terms: int = 40) -> float:
    """P[sup_{[0,1]} |B| >= a] by the alternating reflection series."""
    ks = np.arange(-terms, terms + 1)
    inside = np.sum((-1.0) ** ks * (norm.cdf((2 * ks + 1) * a) - norm.cdf((2 * ks - 1) * a)))
    return float(1.0 - inside)


def brute_force_oscillation(values: np.ndarray, times: np.ndarray, delta: float) -> float:
    """Exhaustive pair search for sup |v_i - v_j| over |t_i - t_j| <= delta."""
    dt_ok = np.abs(times[:, None] - times[None, :]) <= delta * (1 + 1e-12)
    diffs = np.abs(values[:, None] - values[None, :])
    return float(np.max(diffs[dt_ok]))


def exhaustive_reparam_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Min over ALL monotone alignments of the max pointwise gap (tiny inputs only)."""
    na, nb = len(a), len(b)
    best = [np.inf]

    def walk(i, j, cur):
        cur = max(cur, abs(a[i] - b[j]))
        if cur >= best[0]:
            return
        if i == na - 1 and j == nb - 1:
            best[0] = cur
            return
        if i + 1 < na:
            walk(i + 1, j, cur)
        if j + 1 < nb:
            walk(i, j + 1, cur)
        if i + 1 < na and j + 1 < nb:
            walk(i + 1, j + 1, cur)

    walk(0, 0, 0.0)
    return best[0]
