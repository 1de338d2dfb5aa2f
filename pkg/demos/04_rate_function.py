#!/usr/bin/env python3
"""Variational rate functions: energy minimization under trace constraints.

Computes inf { I(lambda) : trace(lambda) meets a constraint } by the
penalty method, then shows the tube-shrinking limit: the minimized energy
climbs toward the energy of the tube's center as the tube tightens.
"""

import numpy as np

from loewner_lab import make_driver
from loewner_lab.optimize import Endpoint, OptOptions, minimize_energy, neighborhood_limit

# reaching the geodesic tip costs nothing: the zero driver already does it
res = minimize_energy(Endpoint(2j, tolerance=0.05), m=16, opts=OptOptions(seed=0))
print(f"endpoint 2i: energy {res.energy:.2e}, residual {res.residual:.2e}, converged {res.converged}")

# shrinking tubes around the trace of lambda(t) = t  (its own energy is 0.5)
n = 256
lam0 = make_driver(np.arange(n + 1) / n, 1.0)
print("\ntube limit around trace(t -> t):")
for row in neighborhood_limit(lam0, [0.4, 0.2, 0.1, 0.05], m=32):
    print(f"  delta={row['delta']:4.2f}  minimized energy {row['energy']:.4f}")
print("  (center energy 0.5 is the delta -> 0 limit)")
