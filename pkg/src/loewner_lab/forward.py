"""Forward Loewner transform: driving function -> curve in the half-plane.

The solver discretizes the inverse Loewner flow

    d/dt f_t(z) = -f'_t(z) * 2 / (z - lambda(t)),   f_0(z) = z,

by composing vertical-slit elementary maps, one per driver step.  Step k
uses the midpoint driver level u_k = (lambda_{k-1} + lambda_k)/2 and the
capacity increment dt = T/n:

    forward (g-direction):  z |-> u_k + sqrt((z - u_k)^2 + 4 dt)
    inverse (f-direction):  w |-> u_k + sqrt((w - u_k)^2 - 4 dt)

with the square root branch chosen to map into the (closed) upper half
plane, i.e. sqrt(r e^{i theta}) with theta in (0, 2pi).  Each elementary
inverse map adds half-plane capacity exactly 2 dt, so capacity time on the
composed chain is exact and the curve satisfies hcap(gamma[0, t_k]) = 2 t_k
by construction.

f_t for a grid time t = k dt is the composition e_1 o e_2 o ... o e_k of the
inverse maps, with e_k applied first; the composed map is itself an exact
Loewner flow (the one driven by the piecewise-constant driver at the
midpoint levels), which is why distortion-theorem checks hold on it in
exact arithmetic.

The traced point gamma(t_k) is the image of the k-th elementary slit tip
u_k + 2i sqrt(dt) under the first k-1 maps.  For the zero driver this
reproduces gamma(t) = 2i sqrt(t) exactly at the nodes.

Curve file format: CSV with header ``t,re,im``, floats at 17 significant
digits (bit-exact round trip).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._format import fmt
from .drivers import Driver, make_driver


class SingularityError(RuntimeError):
    """An orbit left the open upper half-plane (branch-cut crossing)."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"orbit left the upper half-plane at step {step}")


def sqrt_upper(z):
    """Square root with image in the closed upper half-plane."""
    s = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(s.imag < 0.0, -s, s)


@dataclass(frozen=True, eq=False)
class MapChain:
    """Composable elementary-slit realization of f_t = g_t^{-1}.

    levels[j] is the midpoint driver level of step j+1; dt is the constant
    capacity step; node_values keeps the driver's grid values so the
    centered map f_t(lambda(t) + z) can be evaluated without the Driver.
    Immutable and thread-safe.
    """

    levels: np.ndarray
    node_values: np.ndarray
    dt: float
    horizon: float

    @property
    def n_steps(self) -> int:
        return len(self.levels)

    def grid_index(self, t: float) -> int:
        k = int(round(t / self.dt))
        if k < 0 or k > self.n_steps or abs(t - k * self.dt) > 1e-9 * max(1.0, self.horizon):
            raise ValueError(f"t = {t} is not on the chain grid (dt = {self.dt})")
        return k


@dataclass(frozen=True, eq=False)
class Curve:
    """Capacity-parametrized trace: points[k] = gamma(k*T/n), points[0] = 0."""

    points: np.ndarray
    horizon: float

    @property
    def n_steps(self) -> int:
        return len(self.points) - 1

    def times(self) -> np.ndarray:
        n = self.n_steps
        return np.arange(n + 1) * self.horizon / n


def build_chain(driver: Driver) -> MapChain:
    v = driver.values
    levels = 0.5 * (v[:-1] + v[1:])
    levels.flags.writeable = False
    return MapChain(levels=levels, node_values=v, dt=driver.dt, horizon=driver.horizon)


def _apply_inverse(u: float, dt: float, w):
    return u + sqrt_upper((w - u) ** 2 - 4.0 * dt)


def evaluate_map(chain: MapChain, t: float, z):
    """f_t(z) for grid time t and z (scalar or array) with Im z > 0."""
    k = chain.grid_index(t)
    w = np.asarray(z, dtype=complex)
    if np.any(w.imag <= 0):
        raise ValueError("evaluation point must lie in the open upper half-plane")
    w = w.copy()
    for j in range(k - 1, -1, -1):
        w = _apply_inverse(chain.levels[j], chain.dt, w)
        if np.any(w.imag <= 0):
            raise SingularityError(j + 1)
    if np.isscalar(z) or np.ndim(z) == 0:
        return complex(w)
    return w


def evaluate_derivative(chain: MapChain, t: float, z):
    """f_t'(z) by the chain rule along the orbit of z."""
    k = chain.grid_index(t)
    w = np.asarray(z, dtype=complex)
    if np.any(w.imag <= 0):
        raise ValueError("evaluation point must lie in the open upper half-plane")
    w = w.copy()
    d = np.ones_like(w)
    for j in range(k - 1, -1, -1):
        u = chain.levels[j]
        s = sqrt_upper((w - u) ** 2 - 4.0 * chain.dt)
        d = d * (w - u) / s
        w = u + s
        if np.any(w.imag <= 0):
            raise SingularityError(j + 1)
    if np.isscalar(z) or np.ndim(z) == 0:
        return complex(d)
    return d


def evaluate_centered_map(chain: MapChain, t: float, z):
    """Centered map f_t(lambda(t) + z); zero is the preimage of the tip."""
    k = chain.grid_index(t)
    return evaluate_map(chain, t, chain.node_values[k] + np.asarray(z, dtype=complex))


def evaluate_centered_derivative(chain: MapChain, t: float, z):
    k = chain.grid_index(t)
    return evaluate_derivative(chain, t, chain.node_values[k] + np.asarray(z, dtype=complex))


def map_profile(chain: MapChain, z_at_time: np.ndarray, with_derivative: bool = False):
    """Evaluate f_{t_k}(z_at_time[k-1]) for every k = 1..n in one peeled sweep.

    All walks share elementary maps, so the whole profile costs the same
    O(n^2) as a single full-depth walk done n times would, but vectorized.
    """
    n = chain.n_steps
    w = np.asarray(z_at_time, dtype=complex)
    if w.shape[-1] != n:
        raise ValueError(f"need one evaluation point per step, got {w.shape[-1]} != {n}")
    if np.any(w.imag <= 0):
        raise ValueError("evaluation points must lie in the open upper half-plane")
    w = w.copy()
    d = np.ones_like(w) if with_derivative else None
    for j in range(n - 1, -1, -1):
        u = chain.levels[j]
        seg = w[..., j:]
        s = sqrt_upper((seg - u) ** 2 - 4.0 * chain.dt)
        if with_derivative:
            d[..., j:] = d[..., j:] * (seg - u) / s
        w[..., j:] = u + s
        if np.any(w[..., j:].imag <= 0):
            raise SingularityError(j + 1)
    return (w, d) if with_derivative else w


def trace(driver: Driver) -> Curve:
    """Loewner transform L(driver): the capacity-parametrized trace.

    gamma(t_k) is the image of the k-th slit tip under the first k-1
    inverse maps; gamma(0) = 0.  Cost is O(n^2); singularities raise.
    """
    chain = build_chain(driver)
    n = chain.n_steps
    w = chain.levels.astype(complex) + 2j * math.sqrt(chain.dt)
    for j in range(n - 1, 0, -1):
        u = chain.levels[j - 1]
        w[j:] = _apply_inverse(u, chain.dt, w[j:])
        if np.any(w[j:].imag <= 0):
            raise SingularityError(j)
    pts = np.concatenate([[0j], w])
    pts.flags.writeable = False
    return Curve(points=pts, horizon=driver.horizon)


def trace_many(values: np.ndarray, T: float):
    """Vectorized traces for a batch of drivers (rows of `values`).

    Returns (points, bad): points has shape (replicas, n+1), and bad marks
    rows whose orbit left the half-plane (checked at the end; bad rows hold
    unusable data).  Used by Monte Carlo and the optimizer, where a failing
    replica is reported as indeterminate rather than raised.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[1] - 1
    dt = T / n
    u = 0.5 * (v[:, :-1] + v[:, 1:])
    w = u.astype(complex) + 2j * math.sqrt(dt)
    for j in range(n - 1, 0, -1):
        uu = u[:, j - 1 : j]
        seg = w[:, j:]
        w[:, j:] = uu + sqrt_upper((seg - uu) ** 2 - 4.0 * dt)
    pts = np.concatenate([np.zeros((v.shape[0], 1), complex), w], axis=1)
    with np.errstate(invalid="ignore"):
        bad = ~np.all(np.isfinite(pts[:, 1:]), axis=1)
        bad |= np.any(pts[:, 1:].imag <= 0, axis=1)
    return pts, bad


def sup_distance(a: Curve, b: Curve) -> float:
    """max_k |a(t_k) - b(t_k)| on the shared grid."""
    if a.n_steps != b.n_steps or a.horizon != b.horizon:
        raise ValueError("curves must share the same capacity grid")
    return float(np.max(np.abs(a.points - b.points)))


def reparam_distance(a: Curve, b: Curve) -> float:
    """Discrete infimum of sup distance over monotone reparametrizations.

    Dynamic program over monotone grid alignments with sup cost (discrete
    Frechet distance).  O(len(a) * len(b)); intended for modest grids.
    """
    pa, pb = a.points, b.points
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("curves must be nonempty")
    cost = np.abs(pa[:, None] - pb[None, :])
    na, nb = cost.shape
    d = np.empty((na, nb))
    d[0, 0] = cost[0, 0]
    for j in range(1, nb):
        d[0, j] = max(cost[0, j], d[0, j - 1])
    for i in range(1, na):
        d[i, 0] = max(cost[i, 0], d[i - 1, 0])
        prev = d[i - 1]
        row = d[i]
        for j in range(1, nb):
            row[j] = max(cost[i, j], min(prev[j], prev[j - 1], row[j - 1]))
    return float(d[-1, -1])


def scaled_driver(driver: Driver, a: float) -> Driver:
    """Brownian-scaling companion: t -> a * lambda(t / a^2) on [0, a^2 T]."""
    return make_driver(a * driver.values, a * a * driver.horizon)


def write_curve_csv(curve: Curve, path) -> None:
    t = curve.times()
    with open(path, "w", newline="") as f:
        f.write("t,re,im\n")
        for tk, zk in zip(t, curve.points):
            f.write(f"{fmt(tk)},{fmt(zk.real)},{fmt(zk.imag)}\n")


def read_curve_csv(path) -> Curve:
    with open(path, "r") as f:
        header = f.readline().strip()
        if header != "t,re,im":
            raise ValueError(f"expected header 't,re,im', got {header!r}")
        rows = [line.strip().split(",") for line in f if line.strip()]
    if len(rows) < 1:
        raise ValueError("curve file has no data rows")
    t = np.array([float(r[0]) for r in rows])
    pts = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    if pts[0] != 0:
        raise ValueError("curve must start at the origin")
    if np.any(pts.imag < 0):
        raise ValueError("curve points must lie in the closed upper half-plane")
    n = len(t) - 1
    T = float(t[-1])
    if n >= 1:
        expected = np.arange(n + 1) * T / n
        if np.max(np.abs(t - expected)) > 1e-12 * max(1.0, T):
            raise ValueError("time column is not a uniform grid over [0, T]")
    pts.flags.writeable = False
    return Curve(points=pts, horizon=T)
