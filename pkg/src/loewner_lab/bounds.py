"""Deterministic inequality checks for the discrete Loewner solver.

Each check evaluates one inequality over a grid of points and returns a
BoundReport with the worst lhs/rhs ratio and its witness.  A ratio <= 1
means the inequality held everywhere.

Two tolerance classes are used.  The composed slit chain is itself an exact
conformal map (the Loewner flow of the piecewise-constant midpoint driver),
so distortion-theorem statements (Koebe, rectangle) hold for it in exact
arithmetic and get tol 1e-9.  Checks that quote properties of the flow of
the *piecewise-linear* driver (continuity in the driver, derivative-energy,
tip distance, dyadic implication) see first-order discretization error and
get tol 1e-2.

The inequalities checked:

  continuity       |f1_t(x+iy) - f2_t(x+iy)| <= ||l1 - l2||_inf sqrt(1 + 4/y^2)
  derivative-energy   log |fhat'_t(iy)| <= I(lambda) / 2
  tip distance     |gamma(t) - fhat_t(iy)| <= y e^{c/2}     for I(lambda) <= c
  koebe            (1-r)/(1+r)^3 <= |f'(w)|/|f'(z)| <= (1+r)/(1-r)^3,  |z-w| <= r Im z
  rectangle        |f'(z2)| <= c1 y^{-c2} |f'(z1)|  on the unit rectangle, c1 = 12^10,
                   c2 = 2 log2 12 (the r = 1/2 instance of the half-split estimate)
  dyadic           corner bounds |fhat'_{j/4^m}(i 2^-m)| <= 2^{beta m}  imply
                   |fhat'_t(iy)| <= Q(p(t,y)) y^{-beta},  Q(x) = c1 (1+x^2)^{c2}

The dyadic Q-constants are instantiated from the r = 1/2 rectangle estimate
(c1 = 12 e^10 * 12^10, c2 = log2 12); every report carries a note flagging
that instantiation, since only existence of such constants is asserted by
the theory.  Reports serialize to JSON as
{bound_id, points, worst_ratio, witness: {t, y, driver}, pass}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .drivers import Driver, anchored_sup_at, dirichlet_energy
from .forward import (
    MapChain,
    SingularityError,
    build_chain,
    evaluate_centered_derivative,
    evaluate_derivative,
    evaluate_map,
    map_profile,
    trace,
)

TOL_EXACT = 1e-9
TOL_SOLVER = 1e-2

# explicit constants of the r = 1/2 rectangle-distortion instance
RECT_C1 = 12.0**10
RECT_C2 = 2.0 * math.log2(12.0)

# dyadic implication constants assembled from the rectangle instance
DYADIC_C1 = 12.0 * math.exp(10.0) * RECT_C1
DYADIC_C2 = RECT_C2 / 2.0

CONSTANTS_NOTE = "c1,c2 instantiated from the r=1/2 rectangle distortion estimate"


def q_poly(x):
    """Q(x) = c1 (1 + x^2)^{c2}, the local-modulus factor of the dyadic bound."""
    return DYADIC_C1 * (1.0 + np.asarray(x, dtype=float) ** 2) ** DYADIC_C2


def psi(n: int) -> float:
    """Deterministic replacement psi(n) = c1 (1 + log n)^{c2} for the Q factor."""
    return DYADIC_C1 * (1.0 + math.log(n)) ** DYADIC_C2


@dataclass
class BoundReport:
    bound_id: str
    points: int
    worst_ratio: float
    witness: dict
    passed: bool
    tolerance: float
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "points": self.points,
            "worst_ratio": self.worst_ratio,
            "witness": self.witness,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "extras": self.extras,
        }


class _Worst:
    """Track the worst lhs/rhs ratio and the point where it happened."""

    def __init__(self):
        self.ratio = 0.0
        self.witness = {"t": None, "y": None, "driver": None}
        self.points = 0

    def update(self, lhs: float, rhs: float, t, y, driver) -> None:
        self.points += 1
        if rhs == math.inf:
            ratio = 0.0
        elif rhs > 0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs <= 0 else math.inf
        if ratio > self.ratio or self.points == 1:
            self.ratio = ratio
            self.witness = {"t": t, "y": y, "driver": driver}

    def report(self, bound_id: str, tol: float, extras: dict | None = None) -> BoundReport:
        return BoundReport(
            bound_id=bound_id,
            points=self.points,
            worst_ratio=float(self.ratio),
            witness=self.witness,
            passed=bool(self.ratio <= 1.0 + tol),
            tolerance=tol,
            extras=dict(extras or {}),
        )

    def failure(self, bound_id: str, tol: float, note: str, driver) -> BoundReport:
        return BoundReport(
            bound_id=bound_id,
            points=self.points,
            worst_ratio=math.inf,
            witness={"t": None, "y": None, "driver": driver},
            passed=False,
            tolerance=tol,
            extras={"error": note},
        )


def _sup_driver_distance(d1: Driver, d2: Driver) -> float:
    """Exact sup of |l1 - l2| for two PWL drivers (max over union of nodes)."""
    if len(d1.values) == len(d2.values):
        return float(np.max(np.abs(d1.values - d2.values)))
    t = np.union1d(d1.times(), d2.times())
    a = np.interp(t, d1.times(), d1.values)
    b = np.interp(t, d2.times(), d2.values)
    return float(np.max(np.abs(a - b)))


def check_continuity_bound(
    driver1: Driver,
    driver2: Driver,
    y_grid,
    t_grid,
    x_values=(0.0,),
    driver_id: str = "pair",
) -> BoundReport:
    """Map distance against driver distance (uniform in t and x)."""
    if driver1.horizon != driver2.horizon:
        raise ValueError("drivers must share the horizon")
    sup = _sup_driver_distance(driver1, driver2)
    c1, c2 = build_chain(driver1), build_chain(driver2)
    y_arr = np.asarray(y_grid, dtype=float)
    zs = (np.asarray(x_values, dtype=float)[None, :] + 1j * y_arr[:, None]).ravel()
    worst = _Worst()
    try:
        for t in t_grid:
            f1 = np.atleast_1d(evaluate_map(c1, t, zs))
            f2 = np.atleast_1d(evaluate_map(c2, t, zs))
            diff = np.abs(f1 - f2).reshape(len(y_arr), len(x_values))
            for yi, y in enumerate(y_arr):
                lhs = float(np.max(diff[yi]))
                rhs = sup * math.sqrt(1.0 + 4.0 / (y * y))
                worst.update(lhs, rhs, float(t), float(y), driver_id)
    except SingularityError as e:
        return worst.failure("continuity", TOL_SOLVER, f"singularity: {e}", driver_id)
    return worst.report("continuity", TOL_SOLVER, {"sup_driver_distance": sup})


def check_derivative_energy_bound(
    driver: Driver, y_grid, t_grid, driver_id: str = "driver"
) -> BoundReport:
    """log of the centered derivative against half the Dirichlet energy."""
    energy = dirichlet_energy(driver)
    if not math.isfinite(energy):
        raise ValueError("driver must have finite energy")
    chain = build_chain(driver)
    rhs = 0.5 * energy
    worst = _Worst()
    try:
        for t in t_grid:
            d = evaluate_centered_derivative(chain, t, 1j * np.asarray(y_grid, float))
            for y, dv in zip(y_grid, np.atleast_1d(d)):
                lhs = math.log(abs(dv))
                worst.update(lhs, rhs, float(t), float(y), driver_id)
    except SingularityError as e:
        return worst.failure("derivative-energy", TOL_SOLVER, f"singularity: {e}", driver_id)
    return worst.report("derivative-energy", TOL_SOLVER, {"energy": energy})


def check_tip_distance_bound(
    driver: Driver, c: float, y: float, driver_id: str = "driver"
) -> BoundReport:
    """Distance from the trace tip to the centered map at height y."""
    energy = dirichlet_energy(driver)
    if energy > c * (1.0 + 1e-12):
        raise ValueError(f"driver energy {energy} exceeds declared bound {c}")
    chain = build_chain(driver)
    worst = _Worst()
    try:
        gamma = trace(driver)
        z_at = driver.values[1:] + 1j * y
        fhat = map_profile(chain, z_at)
    except SingularityError as e:
        return worst.failure("tip-distance", TOL_SOLVER, f"singularity: {e}", driver_id)
    rhs = y * math.exp(0.5 * c)
    times = driver.times()
    for k in range(1, driver.n_steps + 1):
        lhs = abs(gamma.points[k] - fhat[k - 1])
        worst.update(lhs, rhs, float(times[k]), float(y), driver_id)
    return worst.report("tip-distance", TOL_SOLVER, {"energy_bound": c})


def check_koebe(
    chain: MapChain, t: float, z: complex, w: complex, r: float, driver_id: str = "driver"
) -> BoundReport:
    """Two-sided Koebe distortion for the composed map (exact arithmetic)."""
    if not (0 <= r < 1):
        raise ValueError(f"r must lie in [0, 1), got {r}")
    if abs(z - w) > r * z.imag * (1.0 + 1e-12):
        raise ValueError("need |z - w| <= r * dist(z, boundary) = r * Im z")
    worst = _Worst()
    try:
        dz = evaluate_derivative(chain, t, z)
        dw = evaluate_derivative(chain, t, w)
    except SingularityError as e:
        return worst.failure("koebe", TOL_EXACT, f"singularity: {e}", driver_id)
    rho = abs(dw) / abs(dz)
    lower = (1.0 - r) / (1.0 + r) ** 3
    upper = (1.0 + r) / (1.0 - r) ** 3
    lhs = max(rho / upper, (lower / rho) if rho > 0 else math.inf)
    worst.update(lhs, 1.0, float(t), float(z.imag), driver_id)
    return worst.report("koebe", TOL_EXACT, {"ratio": rho, "lower": lower, "upper": upper, "r": r})


def check_rectangle_distortion(
    chain: MapChain,
    t: float,
    z1: complex,
    z2: complex,
    y: float,
    scale: float = 1.0,
    offset: complex = 0j,
    driver_id: str = "driver",
) -> BoundReport:
    """|f'(z2)| <= c1 y^{-c2} |f'(z1)| on an affine copy of the unit rectangle.

    z1, z2 must sit inside scale*S + offset with S = [-1,1] x [0,1] and have
    rectangle height >= y; the open double rectangle must stay in the upper
    half-plane (Im offset >= 0).
    """
    if not (scale > 0 and offset.imag >= 0):
        raise ValueError("need scale > 0 and Im offset >= 0")
    if not (0 < y <= 1):
        raise ValueError(f"rectangle height parameter y must lie in (0, 1], got {y}")
    for zz in (z1, z2):
        wz = (zz - offset) / scale
        if not (-1 <= wz.real <= 1 and 0 <= wz.imag <= 1):
            raise ValueError(f"{zz} does not lie in the placed unit rectangle")
        if wz.imag < y * (1.0 - 1e-12):
            raise ValueError(f"{zz} sits below the declared height y = {y}")
    worst = _Worst()
    try:
        d1 = evaluate_derivative(chain, t, z1)
        d2 = evaluate_derivative(chain, t, z2)
    except SingularityError as e:
        return worst.failure("rectangle-distortion", TOL_EXACT, f"singularity: {e}", driver_id)
    rho = abs(d2) / abs(d1)
    rhs = RECT_C1 * y ** (-RECT_C2)
    worst.update(rho, rhs, float(t), float(y), driver_id)
    extras = {
        "empirical_c1": rho * y**RECT_C2,
        "c1": RECT_C1,
        "c2": RECT_C2,
        "constants_note": CONSTANTS_NOTE,
    }
    return worst.report("rectangle-distortion", TOL_EXACT, extras)


def check_dyadic_implication(
    driver: Driver,
    beta: float,
    n_level: int,
    m_max: int | None = None,
    t_count: int = 16,
    y_count: int = 6,
    driver_id: str = "driver",
) -> BoundReport:
    """Corner derivative bounds imply the Q(p) y^{-beta} bound on [2^-m_max, 2^-n].

    The driver must live on [0, 1] with a step count divisible by 4^m_max so
    that the dyadic corner times j/4^m land on the grid.  When a corner bound
    fails, the implication is vacuous: the report passes with
    extras["hypothesis_satisfied"] = False.
    """
    if not (0 < beta < 1):
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if abs(driver.horizon - 1.0) > 1e-12:
        raise ValueError("dyadic implication check requires horizon 1")
    if m_max is None:
        m_max = n_level + 4
    if m_max < n_level:
        raise ValueError("m_max must be >= the starting level")
    n_steps = driver.n_steps
    if n_steps % (4**m_max) != 0:
        raise ValueError(
            f"step count {n_steps} must be divisible by 4^m_max = {4 ** m_max}"
        )
    chain = build_chain(driver)
    dt = driver.dt
    worst = _Worst()
    extras = {
        "m_range": [n_level, m_max],
        "hypothesis_satisfied": True,
        "constants_note": CONSTANTS_NOTE,
        "truncated_at": 2.0 ** (-m_max),
    }

    try:
        # corner hypothesis at every dyadic corner of every level
        for m in range(n_level, m_max + 1):
            stride = n_steps // (4**m)
            z_at = driver.values[1:] + 1j * 2.0 ** (-m)
            _, deriv = map_profile(chain, z_at, with_derivative=True)
            corner = np.abs(deriv[stride - 1 :: stride])
            worst.points += len(corner)
            if np.any(corner > 2.0 ** (beta * m)):
                extras["hypothesis_satisfied"] = False
                j_bad = int(np.argmax(corner > 2.0 ** (beta * m))) + 1
                extras["failed_corner"] = {"m": m, "j": j_bad}
                return BoundReport(
                    bound_id="dyadic-implication",
                    points=worst.points,
                    worst_ratio=0.0,
                    witness={"t": j_bad / 4**m, "y": 2.0 ** (-m), "driver": driver_id},
                    passed=True,
                    tolerance=TOL_SOLVER,
                    extras=extras,
                )

        # conclusion on a (t, y) grid with y in [2^-m_max, 2^-n]
        y_grid = np.geomspace(2.0 ** (-m_max), 2.0 ** (-n_level), y_count)
        k_grid = np.unique(np.linspace(1, n_steps, t_count, dtype=int))
        t_grid = k_grid * dt
        p_mat = np.empty((len(k_grid), len(y_grid)))
        for yi, y in enumerate(y_grid):
            w_win = min(n_steps, int(math.floor(y * y / dt * (1.0 + 1e-12))))
            p_mat[:, yi] = anchored_sup_at(driver.values, k_grid, w_win) / y
        for ti, t in enumerate(t_grid):
            d = np.atleast_1d(evaluate_centered_derivative(chain, t, 1j * y_grid))
            rhs_vals = q_poly(p_mat[ti]) * y_grid ** (-beta)
            for y, dv, rhs in zip(y_grid, d, rhs_vals):
                worst.update(abs(dv), float(rhs), float(t), float(y), driver_id)
    except SingularityError as e:
        return worst.failure("dyadic-implication", TOL_SOLVER, f"singularity: {e}", driver_id)
    return worst.report("dyadic-implication", TOL_SOLVER, extras)
