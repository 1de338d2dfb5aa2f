#!/usr/bin/env python3
"""Driving-function functionals and the deterministic inequality suite.

Shows the Dirichlet energy, oscillation, and mollification ops on a rough
driver, then runs a small randomized batch of every inequality check the
solver is expected to satisfy.
"""

import numpy as np

from loewner_lab import dirichlet_energy, make_driver, mollify, oscillation
from loewner_lab.suite import run_bound_suite

rng = np.random.default_rng(0)
n = 512
t = np.arange(n + 1) / n
values = np.interp(t, np.linspace(0, 1, 9), np.concatenate([[0], rng.normal(0, 0.4, 8)]))
lam = make_driver(values, 1.0)

print("energy I(lambda)      =", dirichlet_energy(lam))
print("oscillation, delta=.1 =", oscillation(lam, 0.1))

phi = mollify(lam, eps=0.25)
gap = dirichlet_energy(make_driver(lam.values - phi.values, 1.0))
print("mollify eps=0.25: energy gap", gap, "(must be < eps^2/2 =", 0.25**2 / 2, ")")
print("                  sup gap   ", np.max(np.abs(lam.values - phi.values)), "(must be <= eps)")

print("\nrandomized inequality batch (20 instances per check):")
for rep in run_bound_suite(instances=20, grid=128, seed=7):
    print(
        f"  {rep['bound_id']:22s} passes {rep['passes']}/{rep['instances']}"
        f"  worst ratio {rep['worst_ratio']:.3g}"
    )
