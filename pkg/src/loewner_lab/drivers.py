"""Driving functions on uniform time grids.

A driver is a continuous real function lambda on [0, T] with lambda(0) = 0,
stored by its values at the uniform grid t_k = k*T/n and interpreted as
piecewise linear between nodes.  This module owns construction, Brownian
sampling, piecewise-linear coarsening, the Dirichlet energy

    I(lambda) = 1/2 * integral_0^T  lambda'(t)^2 dt
              = 1/2 * sum_k (lambda_k - lambda_{k-1})^2 / dt      (exact for PWL),

the oscillation  osc(lambda, delta) = sup { |lambda(t)-lambda(s)| : |t-s| <= delta },
and kernel mollification with an energy-gap guarantee.

Energies are plain nonnegative floats; math.inf is a valid value and
propagates through comparisons, so no wrapper type is used.

File format: CSV with header ``t,lambda``, rows in increasing t, first row
``0,0``; all floats at 17 significant digits so read/write round-trips are
bit exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d, maximum_filter1d, minimum_filter1d

from ._format import fmt
from .rng import stream


class MollifyError(RuntimeError):
    """Raised when no candidate smoothing meets the energy-gap target."""


@dataclass(frozen=True, eq=False)
class Driver:
    """Piecewise-linear driving function sampled on a uniform grid.

    values[k] is lambda(k*T/n); values[0] must be 0 and all entries finite.
    Immutable after construction; safe to share across threads.
    """

    values: np.ndarray
    horizon: float

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> np.ndarray:
        n = self.n_steps
        return np.arange(n + 1) * self.horizon / n

    def value_at(self, t: float) -> float:
        """Piecewise-linear evaluation at arbitrary t in [0, T]."""
        return float(np.interp(t, self.times(), self.values))


def make_driver(values, T: float) -> Driver:
    """Build a Driver from grid values over [0, T].

    A single-value input [0] denotes the zero function and is stored as the
    one-step PWL representation [0, 0].
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) == 0:
        raise ValueError("driver values must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(v)):
        raise ValueError("driver values must be finite")
    if v[0] != 0.0:
        raise ValueError(f"driver must start at 0, got lambda_0 = {v[0]}")
    if not (T > 0) or not math.isfinite(T):
        raise ValueError(f"horizon must be positive and finite, got {T}")
    if len(v) == 1:
        v = np.array([0.0, 0.0])
    v = v.copy()
    v.flags.writeable = False
    return Driver(values=v, horizon=float(T))


def sample_brownian_driver(kappa: float, T: float, n: int, seed: int) -> Driver:
    """Sample lambda = sqrt(kappa) * B on the n-step grid over [0, T].

    B is built from i.i.d. Gaussian increments of variance T/n drawn from
    the Philox stream keyed by `seed` (see rng.py), so the path is a
    deterministic function of (seed, n, T) and kappa only rescales it.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if n < 1:
        raise ValueError(f"need at least one step, got n = {n}")
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    g = stream(seed)
    inc = g.standard_normal(n) * math.sqrt(T / n)
    v = np.concatenate([[0.0], math.sqrt(kappa) * np.cumsum(inc)])
    return make_driver(v, T)


def pwl_approximation(driver: Driver, m: int) -> Driver:
    """Piecewise-linear interpolation of the driver through m+1 equispaced nodes.

    The result is resampled back onto the driver's own n-grid; m must divide
    n so that node times land on grid points.
    """
    n = driver.n_steps
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m}")
    if n % m != 0:
        raise ValueError(f"node count {m} does not divide step count {n}")
    r = n // m
    nodes = driver.values[::r]
    j = np.arange(n + 1) % r
    s = np.arange(n + 1) // r
    s_hi = np.minimum(s + 1, m)
    vals = nodes[s] + (nodes[s_hi] - nodes[s]) * (j / r)
    vals[-1] = nodes[-1]
    return make_driver(vals, driver.horizon)


def dirichlet_energy(driver: Driver) -> float:
    """Exact Dirichlet energy of the PWL interpolant: 1/2 sum (d lambda)^2 / dt."""
    d = np.diff(driver.values)
    return float(0.5 * np.sum(d * d) / driver.dt)


def _window_steps(delta: float, dt: float, n: int) -> int:
    # largest w with w*dt <= delta, guarded against float noise in delta/dt
    return min(n, int(math.floor(delta / dt * (1.0 + 1e-12))))


def anchored_sup_at(values: np.ndarray, indices, w: int) -> np.ndarray:
    """max over j in [k, k+w] of |values[..., j] - values[..., k]| at each k in indices.

    The forward window is truncated at the last grid node.  This is the grid
    version of the local modulus sup_{s in [0, delta]} |lambda(t+s) - lambda(t)|.
    """
    values = np.asarray(values, dtype=float)
    n_last = values.shape[-1]
    out = np.empty(values.shape[:-1] + (len(indices),))
    for col, k in enumerate(indices):
        hi = min(n_last, k + w + 1)
        seg = values[..., k:hi] - values[..., k : k + 1]
        out[..., col] = np.abs(seg).max(axis=-1)
    return out


def oscillation(driver: Driver, delta: float) -> float:
    """sup |lambda(t) - lambda(s)| over grid pairs with |t - s| <= delta.

    Evaluated on the grid: the continuous-time sup of a PWL function over a
    window is attained at nodes or window edges, so the grid answer is exact
    up to the grid resolution of delta.
    """
    if not (0 < delta <= driver.horizon):
        raise ValueError(f"delta must lie in (0, T], got {delta}")
    w = _window_steps(delta, driver.dt, driver.n_steps)
    if w == 0:
        return 0.0
    mx = maximum_filter1d(driver.values, size=w + 1, mode="nearest")
    mn = minimum_filter1d(driver.values, size=w + 1, mode="nearest")
    return float(np.max(mx - mn))


def oscillation_rows(values: np.ndarray, dt: float, delta: float) -> np.ndarray:
    """Row-wise grid oscillation for a (replicas, n+1) matrix of driver values."""
    n = values.shape[-1] - 1
    w = _window_steps(delta, dt, n)
    if w == 0:
        return np.zeros(values.shape[:-1])
    mx = maximum_filter1d(values, size=w + 1, mode="nearest", axis=-1)
    mn = minimum_filter1d(values, size=w + 1, mode="nearest", axis=-1)
    return (mx - mn).max(axis=-1)


def mollify(driver: Driver, eps: float) -> Driver:
    """Smooth the driver, keeping the energy gap I(lambda - phi) < eps^2 / 2.

    Candidates are tried from smoothest to roughest: the straight line
    through the endpoints, then Gaussian kernel smoothings with bandwidth
    shrinking by halves down to the grid scale, and finally the driver
    itself.  The first candidate that meets the gap target wins; phi(0) is
    pinned to 0 by subtracting phi(0).  The sup bound
    ||lambda - phi||_inf <= eps * sqrt(T) then follows by Cauchy-Schwarz and
    is asserted on the returned driver.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    v = driver.values
    n = driver.n_steps
    T = driver.horizon
    gap_target = 0.5 * eps * eps

    candidates = [np.linspace(0.0, v[-1], n + 1)]
    sigma = n / 2.0
    while sigma >= 0.5:
        candidates.append(gaussian_filter1d(v, sigma=sigma, mode="reflect"))
        sigma /= 2.0
    candidates.append(v.copy())

    for phi in candidates:
        phi = phi - phi[0]
        gap = 0.5 * np.sum(np.diff(v - phi) ** 2) / driver.dt
        if gap < gap_target:
            out = make_driver(phi, T)
            sup = float(np.max(np.abs(v - out.values)))
            if sup > eps * math.sqrt(T) * (1 + 1e-9):
                raise MollifyError(
                    f"sup gap {sup} exceeds eps*sqrt(T); energy gap was {gap}"
                )
            return out
    raise MollifyError(
        f"no smoothing met the energy-gap target {gap_target} at max resolution"
    )


def write_driver_csv(driver: Driver, path) -> None:
    t = driver.times()
    with open(path, "w", newline="") as f:
        f.write("t,lambda\n")
        for tk, vk in zip(t, driver.values):
            f.write(f"{fmt(tk)},{fmt(vk)}\n")


def read_driver_csv(path) -> Driver:
    with open(path, "r") as f:
        header = f.readline().strip()
        if header != "t,lambda":
            raise ValueError(f"expected header 't,lambda', got {header!r}")
        rows = [line.strip().split(",") for line in f if line.strip()]
    if not rows:
        raise ValueError("driver file has no data rows")
    t = np.array([float(r[0]) for r in rows])
    v = np.array([float(r[1]) for r in rows])
    if t[0] != 0.0 or v[0] != 0.0:
        raise ValueError("first row must be 0,0")
    if len(t) < 2:
        raise ValueError("driver file needs at least two rows")
    n = len(t) - 1
    T = float(t[-1])
    expected = np.arange(n + 1) * T / n
    if np.max(np.abs(t - expected)) > 1e-12 * max(1.0, T):
        raise ValueError("time column is not a uniform grid over [0, T]")
    return make_driver(v, T)
