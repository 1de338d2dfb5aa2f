"""Rate-function computation: minimize Dirichlet energy under trace constraints.

The rate of a curve family V is inf { I(lambda) : trace(lambda) in V }.  The
driver is parametrized by m PWL segments (lambda_0 = 0 fixed), the
constraint is softened by a quadratic penalty mu * violation^2 with mu
escalated x10 over six outer rounds, and each round runs gradient descent
with a backtracking line search.  Gradients are central finite differences
through the forward solver (all 2m perturbed drivers traced in one
vectorized batch).  Tube membership is measured in the sup distance on the
target's own grid, matching the uniform topology used everywhere else.

Multi-start: the zero driver, seeded Brownian-bridge style perturbations,
and optionally a caller-provided warm start (for tube constraints the
target's own driver is the natural one); the best feasible result wins.

The m-segment restriction biases the computed rate upward; report the
energy-vs-m refinement if that bias matters for an experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .drivers import Driver, make_driver
from .forward import Curve, trace, trace_many
from .rng import replica_stream


@dataclass(frozen=True, eq=False)
class TubeMembership:
    target: Curve
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def label(self) -> str:
        return f"tube(delta={self.delta:g})"


@dataclass(frozen=True)
class Endpoint:
    z_star: complex
    tolerance: float

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def label(self) -> str:
        return f"endpoint(z={self.z_star:g},tol={self.tolerance:g})"


@dataclass(frozen=True)
class AvoidDisk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def label(self) -> str:
        return f"avoid_disk(center={self.center:g},radius={self.radius:g})"


Constraint = TubeMembership | Endpoint | AvoidDisk


@dataclass(frozen=True)
class OptOptions:
    horizon: float = 1.0  # used when the constraint does not carry a grid
    n_trace: int = 256
    mu0: float = 10.0
    mu_factor: float = 10.0
    rounds: int = 6
    inner_iters: int = 60
    fd_step: float = 1e-4
    n_perturbed_starts: int = 4
    start_scale: float = 0.25
    seed: int = 0
    step0: float = 0.2
    grad_tol: float = 1e-7
    tol_residual: float = 1e-3
    warm_start: Driver | tuple[Driver, ...] | None = None


@dataclass(frozen=True)
class OptResult:
    driver: Driver
    energy: float
    residual: float
    iterations: int
    converged: bool
    infeasible: bool


class _Problem:
    """Penalty objective around the batched forward solver."""

    def __init__(self, constraint: Constraint, m: int, opts: OptOptions):
        if m < 2:
            raise ValueError("need at least 2 driver segments")
        self.constraint = constraint
        self.m = m
        if isinstance(constraint, TubeMembership):
            self.T = constraint.target.horizon
            self.n = constraint.target.n_steps
            if self.n % m != 0:
                raise ValueError(f"m = {m} must divide the target grid {self.n}")
        else:
            self.T = opts.horizon
            self.n = opts.n_trace - (opts.n_trace % m)
            if self.n < m:
                self.n = m
        # interpolation matrix: m+1 node values -> n+1 fine grid values
        tm = np.linspace(0.0, self.T, m + 1)
        tf = np.arange(self.n + 1) * self.T / self.n
        self.interp = np.empty((m + 1, self.n + 1))
        for i in range(m + 1):
            e = np.zeros(m + 1)
            e[i] = 1.0
            self.interp[i] = np.interp(tf, tm, e)

    def energies(self, x: np.ndarray) -> np.ndarray:
        d = np.diff(np.concatenate([np.zeros((len(x), 1)), x], axis=1), axis=1)
        return 0.5 * np.sum(d * d, axis=1) * (self.m / self.T)

    def violations(self, x: np.ndarray) -> np.ndarray:
        nodes = np.concatenate([np.zeros((len(x), 1)), x], axis=1)
        fine = nodes @ self.interp
        pts, bad = trace_many(fine, self.T)
        c = self.constraint
        with np.errstate(invalid="ignore"):
            if isinstance(c, TubeMembership):
                v = np.max(np.abs(pts - c.target.points[None, :]), axis=1) - c.delta
            elif isinstance(c, Endpoint):
                v = np.abs(pts[:, -1] - c.z_star) - c.tolerance
            else:
                v = c.radius - np.min(np.abs(pts - c.center), axis=1)
        v = np.maximum(v, 0.0)
        v[bad] = math.inf
        return v

    def objective(self, x: np.ndarray, mu: float):
        e = self.energies(x)
        v = self.violations(x)
        return e + mu * np.where(np.isfinite(v), v * v, math.inf), e, v


class _Incumbent:
    """Best feasible iterate seen so far (lowest energy with viol <= tol)."""

    def __init__(self, tol: float):
        self.tol = tol
        self.x = None
        self.energy = math.inf
        self.residual = math.inf

    def offer(self, x: np.ndarray, energy: float, viol: float) -> None:
        if viol <= self.tol and energy < self.energy:
            self.x = x.copy()
            self.energy = energy
            self.residual = viol


def _descend(prob: _Problem, x: np.ndarray, mu: float, opts: OptOptions, inc: _Incumbent):
    """Gradient descent with backtracking on the penalized objective."""
    m = prob.m
    h = opts.fd_step
    f, e, v = prob.objective(x[None, :], mu)
    f = float(f[0])
    inc.offer(x, float(e[0]), float(v[0]))
    step = opts.step0
    iters = 0
    for _ in range(opts.inner_iters):
        iters += 1
        batch = np.repeat(x[None, :], 2 * m, axis=0)
        idx = np.arange(m)
        batch[0::2, idx] += h
        batch[1::2, idx] -= h
        fb, _, _ = prob.objective(batch, mu)
        grad = (fb[0::2] - fb[1::2]) / (2.0 * h)
        if not np.all(np.isfinite(grad)):
            break
        gnorm2 = float(np.dot(grad, grad))
        if gnorm2 <= opts.grad_tol**2:
            break
        accepted = False
        s = step
        for _ in range(25):
            xn = x - s * grad
            fn, en, vn = prob.objective(xn[None, :], mu)
            fn = float(fn[0])
            if fn <= f - 1e-4 * s * gnorm2:
                x, f = xn, fn
                inc.offer(x, float(en[0]), float(vn[0]))
                step = min(s * 1.5, 1.0)
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break
    return x, f, iters


def _starts(prob: _Problem, opts: OptOptions):
    out = [np.zeros(prob.m)]
    warm = opts.warm_start
    if warm is not None:
        for w in (warm,) if isinstance(warm, Driver) else tuple(warm):
            if abs(w.horizon - prob.T) > 1e-12 * max(1.0, prob.T):
                raise ValueError("warm start horizon does not match the constraint")
            tm = np.linspace(0.0, prob.T, prob.m + 1)
            x = np.interp(tm, w.times(), w.values)[1:]
            out.append(x)
            # scaling sweep along the warm ray: the cheapest feasible
            # alpha * x is usually close to the constrained optimum and
            # costs one batched solve to find
            alphas = np.linspace(0.0, 1.0, 21)
            v = prob.violations(alphas[:, None] * x[None, :])
            feasible = np.nonzero(v <= opts.tol_residual)[0]
            if len(feasible):
                out.append(alphas[feasible[0]] * x)
    for s in range(opts.n_perturbed_starts):
        g = replica_stream(opts.seed, s)
        walk = np.cumsum(g.standard_normal(prob.m)) / math.sqrt(prob.m)
        out.append(opts.start_scale * walk)
    return out


def minimize_energy(constraint: Constraint, m: int, opts: OptOptions | None = None) -> OptResult:
    """Minimize the discrete Dirichlet energy subject to a trace constraint.

    Returns the best iterate across starts; `converged` means the residual
    met the declared tolerance, `infeasible` means the penalty saturated
    while the constraint stayed violated (no feasible driver found at this
    resolution).
    """
    opts = opts or OptOptions()
    prob = _Problem(constraint, m, opts)
    inc = _Incumbent(opts.tol_residual)
    best_infeasible = None  # (viol, x, energy) fallback when nothing is feasible
    saturated = False
    total_iters = 0
    for x0 in _starts(prob, opts):
        x = x0.copy()
        mu = opts.mu0
        viol_history = []
        for _ in range(opts.rounds):
            x, _, it = _descend(prob, x, mu, opts, inc)
            total_iters += it
            _, e_arr, v_arr = prob.objective(x[None, :], mu)
            e, v = float(e_arr[0]), float(v_arr[0])
            viol_history.append(v)
            if v <= 0.0:
                break
            mu *= opts.mu_factor
        if best_infeasible is None or v < best_infeasible[0]:
            best_infeasible = (v, x.copy(), e)
        if len(viol_history) >= 2 and math.isfinite(viol_history[-1]):
            saturated |= viol_history[-1] > 0.95 * viol_history[-2]
        elif not math.isfinite(v):
            saturated = True
    if inc.x is not None:
        driver = make_driver(np.concatenate([[0.0], inc.x]), prob.T)
        return OptResult(
            driver=driver,
            energy=inc.energy,
            residual=inc.residual,
            iterations=total_iters,
            converged=True,
            infeasible=False,
        )
    v, x, e = best_infeasible
    driver = make_driver(np.concatenate([[0.0], x]), prob.T)
    return OptResult(
        driver=driver,
        energy=e,
        residual=v,
        iterations=total_iters,
        converged=False,
        infeasible=saturated or not math.isfinite(v),
    )


def neighborhood_limit(
    target_driver: Driver,
    delta_list,
    m: int = 32,
    opts: OptOptions | None = None,
):
    """Minimized energy of shrinking tubes around the trace of target_driver.

    delta_list must be decreasing; each tube reuses the previous minimizer
    and the target's own driver as warm starts.  Returns rows of
    (delta, energy, OptResult); energies increase (up to optimizer noise) as
    the tube tightens and approach I(target_driver) from below.
    """
    deltas = list(delta_list)
    if not deltas:
        raise ValueError("delta_list must be nonempty")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta_list must be strictly decreasing")
    opts = opts or OptOptions()
    target = trace(target_driver)
    rows = []
    warm = (target_driver,)
    for d in deltas:
        res = minimize_energy(
            TubeMembership(target, d), m, replace(opts, warm_start=warm)
        )
        rows.append({"delta": d, "energy": res.energy, "result": res})
        # the target's own driver stays in the start set: it is feasible in
        # every tube, while the previous minimizer may not be in a tighter one
        warm = (res.driver, target_driver)
    return rows
