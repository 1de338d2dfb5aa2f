"""Randomized batch verification of the deterministic bound suite.

Draws seeded families of drivers and evaluation geometries, runs every
check on each instance, and summarizes violations.  All draws are keyed by
(seed, check index, instance index), so a batch is reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

from .bounds import (
    check_continuity_bound,
    check_derivative_energy_bound,
    check_dyadic_implication,
    check_koebe,
    check_rectangle_distortion,
    check_tip_distance_bound,
)
from .drivers import Driver, dirichlet_energy, make_driver, sample_brownian_driver
from .forward import build_chain
from .rng import mix, stream

ALL_CHECKS = (
    "continuity",
    "derivative-energy",
    "tip-distance",
    "koebe",
    "rectangle-distortion",
    "dyadic-implication",
)


def random_pwl_driver(rng: np.random.Generator, n: int, energy: float, nodes: int = 8) -> Driver:
    """Random PWL driver on [0, 1] with Dirichlet energy exactly `energy`."""
    coarse = np.concatenate([[0.0], np.cumsum(rng.standard_normal(nodes))])
    t = np.arange(n + 1) / n
    v = np.interp(t, np.linspace(0.0, 1.0, nodes + 1), coarse)
    e = 0.5 * np.sum(np.diff(v) ** 2) * n
    if e > 0:
        v = v * np.sqrt(energy / e)
    return make_driver(v, 1.0)


def _instance_continuity(rng, grid, tag):
    d1 = random_pwl_driver(rng, grid, rng.uniform(0.1, 2.0))
    d2 = random_pwl_driver(rng, grid, rng.uniform(0.1, 2.0))
    # keep the driver gap at or below 1 as in the documented test family
    gap = np.max(np.abs(d1.values - d2.values))
    if gap > 1.0:
        d2 = make_driver(d1.values + (d2.values - d1.values) / gap, 1.0)
    t_grid = [0.25, 0.5, 0.75, 1.0]
    y_grid = [0.05, 0.12, 0.3, 0.7]
    return check_continuity_bound(d1, d2, y_grid, t_grid, driver_id=tag)


def _instance_derivative_energy(rng, grid, tag):
    d = random_pwl_driver(rng, grid, rng.uniform(0.05, 4.0))
    t_grid = [0.25, 0.5, 0.75, 1.0]
    y_grid = [0.05, 0.15, 0.4, 1.0]
    return check_derivative_energy_bound(d, y_grid, t_grid, driver_id=tag)


def _instance_tip_distance(rng, grid, tag):
    d = random_pwl_driver(rng, grid, rng.uniform(0.05, 2.0))
    y = rng.uniform(0.05, 0.5)
    return check_tip_distance_bound(d, dirichlet_energy(d), y, driver_id=tag)


def _instance_koebe(rng, grid, tag):
    d = random_pwl_driver(rng, grid, rng.uniform(0.05, 2.0))
    chain = build_chain(d)
    t = rng.integers(1, grid + 1) * d.dt
    z = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.0))
    r = rng.uniform(0.05, 0.9)
    theta = rng.uniform(0, 2 * np.pi)
    w = z + 0.999 * r * z.imag * rng.uniform(0, 1) * complex(np.cos(theta), np.sin(theta))
    return check_koebe(chain, t, z, w, r, driver_id=tag)


def _instance_rectangle(rng, grid, tag):
    d = random_pwl_driver(rng, grid, rng.uniform(0.05, 2.0))
    chain = build_chain(d)
    t = rng.integers(1, grid + 1) * d.dt
    y = rng.uniform(0.05, 0.9)
    z1 = complex(rng.uniform(-1, 1), rng.uniform(y, 1.0))
    z2 = complex(rng.uniform(-1, 1), rng.uniform(y, 1.0))
    return check_rectangle_distortion(chain, t, z1, z2, y, driver_id=tag)


def _instance_dyadic(rng, grid, tag):
    n_steps = max(256, grid - grid % 256)
    if rng.uniform() < 0.5:
        d = random_pwl_driver(rng, n_steps, rng.uniform(0.02, 1.0))
    else:
        d = sample_brownian_driver(0.4, 1.0, n_steps, int(rng.integers(0, 2**62)))
    beta = rng.uniform(0.6, 0.9)
    return check_dyadic_implication(d, beta, n_level=2, m_max=4, t_count=12, y_count=5, driver_id=tag)


_INSTANCES = {
    "continuity": _instance_continuity,
    "derivative-energy": _instance_derivative_energy,
    "tip-distance": _instance_tip_distance,
    "koebe": _instance_koebe,
    "rectangle-distortion": _instance_rectangle,
    "dyadic-implication": _instance_dyadic,
}


def run_bound_suite(instances: int, grid: int, seed: int, checks=None):
    """Run `instances` randomized cases of each named check.

    Returns one summary per check: instance count, pass count, the worst
    ratio over the batch with its witness, and the indices of failing
    instances (empty on a clean batch).
    """
    names = list(checks) if checks else list(ALL_CHECKS)
    for name in names:
        if name not in _INSTANCES:
            raise ValueError(f"unknown check {name!r}; expected one of {ALL_CHECKS}")
    summaries = []
    for ci, name in enumerate(names):
        make_instance = _INSTANCES[name]
        worst_ratio = 0.0
        worst_witness = None
        failures = []
        vacuous = 0
        for i in range(instances):
            rng = stream(mix(seed, (ci + 1) * 1_000_003 + i))
            report = make_instance(rng, grid, f"{name}[{i}]")
            if report.extras.get("hypothesis_satisfied") is False:
                vacuous += 1
            if report.worst_ratio > worst_ratio:
                worst_ratio = report.worst_ratio
                worst_witness = report.witness
            if not report.passed:
                failures.append(i)
        summaries.append(
            {
                "bound_id": name,
                "instances": instances,
                "passes": instances - len(failures),
                "worst_ratio": worst_ratio,
                "worst_witness": worst_witness,
                "failures": failures,
                "vacuous": vacuous,
            }
        )
    return summaries
