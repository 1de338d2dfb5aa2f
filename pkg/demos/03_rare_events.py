#!/usr/bin/env python3
"""Rare-event estimates at small kappa and their reference bounds.

Estimates the driver-sup event (the Schilder benchmark: rate a^2/2), the
chi-square law of the normalized approximation energy, and the oscillation
tail, comparing each against its arithmetic reference.
"""

import math

from loewner_lab.montecarlo import (
    DriverSupEvent,
    chi_square_energy,
    estimate_event,
    ldp_slope,
    oscillation_tail,
)

# kappa log p for sup |lambda| >= 1 should approach -1/2 as kappa drops
rows = ldp_slope(DriverSupEvent(level=1.0), [0.4, 0.2, 0.1], N=50_000, n=512, seed=3)
print("driver-sup slope (target -0.5):")
for r in rows:
    print(f"  kappa={r['kappa']:.2f}  p={r['p_hat']:.5f}  kappa log p = {r['kappa_log_p']:+.4f}")

# the normalized PWL energy is chi^2_m regardless of kappa
stats = chi_square_energy(kappa=4.0, m=20, N=20_000, seed=5)
print(f"\nchi-square law, m=20: mean {stats.mean:.3f} (target 20), var {stats.variance:.2f} (target 40)")

# oscillation tail vs c0 * delta^{(r/c0)^2/kappa}
res = oscillation_tail(kappa=1.0, delta=0.1, r=16.0, N=20_000, seed=8)
print(f"\noscillation tail: p_hat = {res.mc.p_hat:.2e}, bound = {res.bound:.2e} (c0 = {res.c0})")
