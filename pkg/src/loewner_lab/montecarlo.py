"""Rare-event Monte Carlo for SLE at small kappa.

Replica i of a run with master seed s draws its Brownian driver from the
stream keyed by mix(s, i) (see rng.py), so estimates are deterministic
given (seed, event, kappa, N, n) and independent of how replicas are
partitioned across threads: per-block hit counts are merged by integer
addition in block order.

Events:

  DriverSupEvent(a)        sup_{[0,T]} |lambda| >= a
  TubeEvent(target, d, c)  ||gamma - target||_inf <= d   (complement optional)
  OscillationEvent(d, r)   osc(lambda, d, [0,1]) >= r sqrt(d log(1/d))
  DerivativeEvent(...)     |fhat'_t(iy)| <= bound * y^{-beta} on a (t, y) grid,
                           with y up to 2^{-n} (dyadic scale) or 1/sqrt(n),
                           and bound either Q(p(t,y)) or the deterministic
                           psi(n) = c1 (1 + log n)^{c2}

Arithmetic reference bounds implemented alongside the estimators:

  complement of the dyadic derivative event:
      P <= 4^n / (1 - 4^{-(beta/kappa - 1)}) * 4^{-beta n / kappa}
  (the psi-form adds 2 e^{-log n / kappa}); the geometric series behind the
  closed form diverges for kappa >= beta, in which case the bound is
  reported as +inf and the comparison passes trivially.

  oscillation tail:  P[osc >= r sqrt(d log(1/d))] <= c0 * d^{(r/c0)^2 / kappa},
  with the absolute constant c0 configurable (default 8) and echoed in all
  output.

  PWL convergence:  P[||gamma - gamma_n||_inf >= n^{-zeta}]
      <= B(n, kappa) (n/2)^{-beta/kappa},
      B(n, kappa) = 2 + c0 + n / (1 - 4^{-(beta/kappa - 1)}).

Replicas whose trace leaves the half-plane are counted as indeterminate and
reported; a run fails if they reach 0.1% of N.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._format import fmt
from .bounds import psi as psi_factor
from .bounds import q_poly
from .drivers import (
    Driver,
    anchored_sup_at,
    dirichlet_energy,
    oscillation_rows,
    pwl_approximation,
    sample_brownian_driver,
)
from .forward import Curve, sqrt_upper, trace_many
from .rng import mix

DEFAULT_C0 = 8.0
INDETERMINACY_BUDGET = 1e-3

MC_CSV_HEADER = "event,kappa,N,hits,p_hat,se,kappa_log_p,seed,indeterminate"


class IndeterminacyError(RuntimeError):
    """Too many replicas hit solver singularities to trust the estimate."""


@dataclass(frozen=True)
class DriverSupEvent:
    level: float

    def __post_init__(self):
        if not self.level > 0:
            raise ValueError("level must be positive")

    def label(self) -> str:
        return f"driver_sup(a={self.level:g})"


@dataclass(frozen=True, eq=False)
class TubeEvent:
    target: Curve
    delta: float
    complement: bool = False

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def label(self) -> str:
        return f"tube(delta={self.delta:g},complement={int(self.complement)})"


@dataclass(frozen=True)
class OscillationEvent:
    delta: float
    threshold: float  # the r of the threshold r * sqrt(delta log(1/delta))

    def __post_init__(self):
        if not (0 < self.delta <= 1):
            raise ValueError("delta must lie in (0, 1]")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")

    def label(self) -> str:
        return f"osc(delta={self.delta:g},r={self.threshold:g})"


@dataclass(frozen=True)
class DerivativeEvent:
    beta: float
    n: int
    scale: str = "dyadic"  # "dyadic": y_max = 2^-n;  "sqrt": y_max = 1/sqrt(n)
    psi_form: bool = False
    t_count: int = 16
    y_count: int = 5
    depth: int = 4  # y grid reaches down to y_max / 2^depth

    def __post_init__(self):
        if not (0 < self.beta < 1):
            raise ValueError("beta must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.scale not in ("dyadic", "sqrt"):
            raise ValueError("scale must be 'dyadic' or 'sqrt'")

    def y_max(self) -> float:
        return 2.0 ** (-self.n) if self.scale == "dyadic" else 1.0 / math.sqrt(self.n)

    def label(self) -> str:
        return (
            f"derivative(beta={self.beta:g},n={self.n},scale={self.scale},"
            f"psi={int(self.psi_form)})"
        )


Event = DriverSupEvent | TubeEvent | OscillationEvent | DerivativeEvent


@dataclass(frozen=True)
class McResult:
    event: str
    kappa: float
    n_replicas: int
    hits: int
    p_hat: float
    se: float
    kappa_log_p: float
    seed: int
    indeterminate: int

    def csv_row(self) -> str:
        return ",".join(
            [
                self.event,
                fmt(self.kappa),
                str(self.n_replicas),
                str(self.hits),
                fmt(self.p_hat),
                fmt(self.se),
                fmt(self.kappa_log_p),
                str(self.seed),
                str(self.indeterminate),
            ]
        )


def write_mc_csv(results, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(MC_CSV_HEADER + "\n")
        for r in results:
            f.write(r.csv_row() + "\n")


def _finish(event_label, kappa, N, hits, seed, indet) -> McResult:
    if indet >= INDETERMINACY_BUDGET * N and indet > 0:
        raise IndeterminacyError(
            f"{indet} of {N} replicas indeterminate (budget {INDETERMINACY_BUDGET:g})"
        )
    n_eff = max(1, N - indet)
    p = hits / n_eff
    se = math.sqrt(p * (1.0 - p) / n_eff)
    klp = kappa * math.log(p) if hits > 0 else -math.inf
    return McResult(
        event=event_label,
        kappa=kappa,
        n_replicas=N,
        hits=hits,
        p_hat=p,
        se=se,
        kappa_log_p=klp,
        seed=seed,
        indeterminate=indet,
    )


def _blocks(N: int, block: int):
    return [(lo, min(lo + block, N)) for lo in range(0, N, block)]


def _run_blocks(N: int, block: int, worker, threads: int):
    """Run worker(lo, hi) over static blocks; results returned in block order."""
    spans = _blocks(N, block)
    if threads <= 1:
        return [worker(lo, hi) for lo, hi in spans]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda span: worker(*span), spans))


def _driver_values_block(kappa, T, n, seed, lo, hi) -> np.ndarray:
    """(hi-lo, n+1) matrix of driver values for replicas lo..hi-1."""
    out = np.empty((hi - lo, n + 1))
    for row, i in enumerate(range(lo, hi)):
        out[row] = sample_brownian_driver(kappa, T, n, mix(seed, i)).values
    return out


def _derivative_profile_sweep(vals: np.ndarray, T: float, k_grid, y_grid):
    """|fhat'_{t_k}(iy)| at all (replica, k in k_grid, y in y_grid).

    One backward sweep over the elementary maps; evaluation points for time
    index k join the active set when the sweep reaches step k.  Returns
    (absd, bad) with absd of shape (B, len(k_grid), len(y_grid)).
    """
    B, n1 = vals.shape
    n = n1 - 1
    dt = T / n
    levels = 0.5 * (vals[:, :-1] + vals[:, 1:])
    k_sorted = np.sort(np.asarray(k_grid, dtype=int))[::-1]
    order = np.argsort(np.asarray(k_grid, dtype=int))[::-1]  # output unshuffle
    n_t, n_y = len(k_sorted), len(y_grid)
    y_arr = np.asarray(y_grid, dtype=float)
    W = np.zeros((B, n_t, n_y), dtype=complex)
    D = np.ones((B, n_t, n_y), dtype=complex)
    act = 0
    for j in range(n, 0, -1):
        while act < n_t and k_sorted[act] == j:
            W[:, act, :] = vals[:, j][:, None] + 1j * y_arr[None, :]
            act += 1
        if act == 0:
            continue
        u = levels[:, j - 1][:, None, None]
        seg = W[:, :act, :]
        s = sqrt_upper((seg - u) ** 2 - 4.0 * dt)
        D[:, :act, :] *= (seg - u) / s
        W[:, :act, :] = u + s
    with np.errstate(invalid="ignore"):
        bad = np.any(W.imag <= 0, axis=(1, 2)) | ~np.all(np.isfinite(D), axis=(1, 2))
    absd = np.abs(D)
    unshuffle = np.empty(n_t, dtype=int)
    unshuffle[order] = np.arange(n_t)
    return absd[:, unshuffle, :], bad


def _derivative_event_grids(event: DerivativeEvent, n: int):
    y_max = event.y_max()
    y_lo = y_max / 2.0**event.depth
    y_grid = np.geomspace(y_lo, y_max, event.y_count)
    k_grid = np.unique(np.linspace(1, n, event.t_count, dtype=int))
    return k_grid, y_grid


def _derivative_event_pass(event: DerivativeEvent, vals: np.ndarray, T: float):
    """Per-replica flags: (Q-form bound holds, psi-form bound holds, bad)."""
    n = vals.shape[1] - 1
    k_grid, y_grid = _derivative_event_grids(event, n)
    absd, bad = _derivative_profile_sweep(vals, T, k_grid, y_grid)
    dt = T / n
    ok_q = np.ones(vals.shape[0], dtype=bool)
    ok_psi = np.ones(vals.shape[0], dtype=bool)
    psi_val = psi_factor(event.n)
    for yi, y in enumerate(y_grid):
        w = min(n, int(math.floor(y * y / dt * (1.0 + 1e-12))))
        p = anchored_sup_at(vals, k_grid, w) / y  # (B, n_t)
        rhs_q = q_poly(p) * y ** (-event.beta)
        rhs_psi = psi_val * y ** (-event.beta)
        ok_q &= np.all(absd[:, :, yi] <= rhs_q, axis=1)
        ok_psi &= np.all(absd[:, :, yi] <= rhs_psi, axis=1)
    return ok_q, ok_psi, bad


def estimate_event(
    event: Event, kappa: float, N: int, n: int, seed: int, threads: int = 1
) -> McResult:
    """Frequency estimate of P[event] over N independent SLE_kappa samples.

    n is the driver/trace grid resolution on [0, 1].  Deterministic given
    (seed, event, kappa, N, n) regardless of `threads`.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if N < 1 or n < 1:
        raise ValueError("N and n must be >= 1")
    T = 1.0
    if isinstance(event, TubeEvent):
        if event.target.n_steps != n:
            raise ValueError(
                f"tube target grid ({event.target.n_steps}) must match n = {n}"
            )
        target = event.target.points[None, :]

        def worker(lo, hi):
            vals = _driver_values_block(kappa, T, n, seed, lo, hi)
            pts, bad = trace_many(vals, T)
            with np.errstate(invalid="ignore"):
                sup = np.max(np.abs(pts - target), axis=1)
            inside = sup <= event.delta
            hit = (~inside if event.complement else inside) & ~bad
            return int(np.sum(hit)), int(np.sum(bad))

        block = 512
    elif isinstance(event, DriverSupEvent):

        def worker(lo, hi):
            vals = _driver_values_block(kappa, T, n, seed, lo, hi)
            hit = np.max(np.abs(vals), axis=1) >= event.level
            return int(np.sum(hit)), 0

        block = 2048
    elif isinstance(event, OscillationEvent):
        thr = event.threshold * math.sqrt(event.delta * math.log(1.0 / event.delta))

        def worker(lo, hi):
            vals = _driver_values_block(kappa, T, n, seed, lo, hi)
            osc = oscillation_rows(vals, T / n, event.delta)
            return int(np.sum(osc >= thr)), 0

        block = 2048
    elif isinstance(event, DerivativeEvent):

        def worker(lo, hi):
            vals = _driver_values_block(kappa, T, n, seed, lo, hi)
            ok_q, ok_psi, bad = _derivative_event_pass(event, vals, T)
            ok = ok_psi if event.psi_form else ok_q
            return int(np.sum(ok & ~bad)), int(np.sum(bad))

        block = 512
    else:
        raise TypeError(f"unknown event type {type(event).__name__}")

    parts = _run_blocks(N, block, worker, threads)
    hits = sum(p[0] for p in parts)
    indet = sum(p[1] for p in parts)
    return _finish(event.label(), kappa, N, hits, seed, indet)


def ldp_slope(
    event: Event, kappa_list, N: int, n: int, seed: int, threads: int = 1
):
    """Per-kappa estimates (kappa, p_hat, kappa log p_hat) for slope reading.

    kappa_list must be decreasing.  Rows with fewer than 50 hits are flagged
    (low_hits), rows with zero hits carry kappa_log_p = -inf.  No
    extrapolation is performed here.
    """
    ks = list(kappa_list)
    if not ks:
        raise ValueError("kappa_list must be nonempty")
    if any(b >= a for a, b in zip(ks, ks[1:])):
        raise ValueError("kappa_list must be strictly decreasing")
    rows = []
    for kappa in ks:
        r = estimate_event(event, kappa, N, n, seed, threads=threads)
        rows.append(
            {
                "kappa": kappa,
                "N": N,
                "hits": r.hits,
                "p_hat": r.p_hat,
                "se": r.se,
                "kappa_log_p": r.kappa_log_p,
                "indeterminate": r.indeterminate,
                "low_hits": r.hits < 50,
            }
        )
    return rows


@dataclass(frozen=True)
class ChiSquareEnergyStats:
    mean: float
    variance: float
    samples: np.ndarray


def chi_square_energy(kappa: float, m: int, N: int, seed: int) -> ChiSquareEnergyStats:
    """Statistics of (2/kappa) I(sqrt(kappa) B_m) over N replicas.

    The PWL energy of an m-node Brownian interpolation is m/2 times the sum
    of squared standard increments, so the normalized energy is chi^2_m
    distributed, independently of kappa.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    samples = np.empty(N)
    for i in range(N):
        d = sample_brownian_driver(kappa, 1.0, m, mix(seed, i))
        samples[i] = (2.0 / kappa) * dirichlet_energy(d)
    return ChiSquareEnergyStats(
        mean=float(samples.mean()), variance=float(samples.var(ddof=1)), samples=samples
    )


@dataclass(frozen=True)
class OscillationTailResult:
    mc: McResult
    bound: float
    c0: float
    passed: bool


def oscillation_tail(
    kappa: float,
    delta: float,
    r: float,
    N: int,
    seed: int,
    n: int = 2048,
    c0: float = DEFAULT_C0,
    threads: int = 1,
) -> OscillationTailResult:
    """Estimate P[osc(sqrt(k)B, delta) >= r sqrt(delta log(1/delta))] vs the tail bound."""
    if not r > c0:
        raise ValueError(f"r must exceed c0 = {c0}")
    mc = estimate_event(
        OscillationEvent(delta=delta, threshold=r), kappa, N, n, seed, threads=threads
    )
    bound = c0 * delta ** ((r / c0) ** 2 / kappa)
    passed = mc.p_hat - 3.0 * mc.se <= bound
    return OscillationTailResult(mc=mc, bound=bound, c0=c0, passed=passed)


def _geometric_tail_factor(beta: float, kappa: float) -> float:
    """1 / (1 - 4^{-(beta/kappa - 1)}), or +inf when the series diverges."""
    if kappa >= beta:
        return math.inf
    return 1.0 / (1.0 - 4.0 ** (-(beta / kappa - 1.0)))


def complement_arithmetic_bound(beta: float, kappa: float, n: int) -> float:
    """Closed-form bound on the dyadic-event complement probability."""
    g = _geometric_tail_factor(beta, kappa)
    if math.isinf(g):
        return math.inf
    return 4.0**n * g * 4.0 ** (-beta * n / kappa)


@dataclass(frozen=True)
class ComplementBoundResult:
    violation_freq_q: float
    violation_se_q: float
    bound_q: float
    violation_freq_psi: float
    violation_se_psi: float
    bound_psi: float
    n_replicas: int
    indeterminate: int
    passed: bool
    flagged_divergent: bool


def complement_bound_check(
    beta: float,
    kappa: float,
    n: int,
    N: int,
    seed: int,
    n_steps: int = 1024,
    threads: int = 1,
) -> ComplementBoundResult:
    """MC frequency of the dyadic derivative-event complement vs the bound.

    Checks the Q(p)-form event and the psi(n)-form variant in one pass.  For
    kappa >= beta both arithmetic bounds are +inf (divergent geometric
    series) and the comparison passes trivially, flagged in the result.
    """
    event = DerivativeEvent(beta=beta, n=n, scale="dyadic")

    def worker(lo, hi):
        vals = _driver_values_block(kappa, 1.0, n_steps, seed, lo, hi)
        ok_q, ok_psi, bad = _derivative_event_pass(event, vals, 1.0)
        viol_q = int(np.sum(~ok_q & ~bad))
        viol_psi = int(np.sum(~ok_psi & ~bad))
        return viol_q, viol_psi, int(np.sum(bad))

    parts = _run_blocks(N, 512, worker, threads)
    vq = sum(p[0] for p in parts)
    vp = sum(p[1] for p in parts)
    indet = sum(p[2] for p in parts)
    n_eff = max(1, N - indet)
    fq, fp = vq / n_eff, vp / n_eff
    se_q = math.sqrt(fq * (1 - fq) / n_eff)
    se_p = math.sqrt(fp * (1 - fp) / n_eff)
    bound_q = complement_arithmetic_bound(beta, kappa, n)
    bound_psi = (
        bound_q + 2.0 * float(n) ** (-1.0 / kappa) if math.isfinite(bound_q) else math.inf
    )
    passed = (fq - 3 * se_q <= bound_q) and (fp - 3 * se_p <= bound_psi)
    return ComplementBoundResult(
        violation_freq_q=fq,
        violation_se_q=se_q,
        bound_q=bound_q,
        violation_freq_psi=fp,
        violation_se_psi=se_p,
        bound_psi=bound_psi,
        n_replicas=N,
        indeterminate=indet,
        passed=passed,
        flagged_divergent=math.isinf(bound_q),
    )


def admissible_zeta_sup(beta: float) -> float:
    """Upper end of the admissible zeta interval for the PWL convergence bound."""
    return 0.5 * (1.0 - math.sqrt((1.0 + beta) / 2.0))


def convergence_bound(n: int, kappa: float, beta: float, c0: float = DEFAULT_C0) -> float:
    """B(n, kappa) (n/2)^{-beta/kappa}; +inf when the series behind B diverges."""
    g = _geometric_tail_factor(beta, kappa)
    if math.isinf(g):
        return math.inf
    B = 2.0 + c0 + n * g
    return B * (n / 2.0) ** (-beta / kappa)


def _resample_rows(vals: np.ndarray, m: int) -> np.ndarray:
    """Row-wise PWL interpolation through every (n/m)-th node (see drivers)."""
    n = vals.shape[1] - 1
    r = n // m
    nodes = vals[:, ::r]
    j = np.arange(n + 1) % r
    s = np.arange(n + 1) // r
    s_hi = np.minimum(s + 1, m)
    out = nodes[:, s] + (nodes[:, s_hi] - nodes[:, s]) * (j / r)
    out[:, -1] = nodes[:, -1]
    return out


def pwl_convergence(
    kappa: float,
    n_list,
    beta: float,
    zeta: float,
    N: int,
    seed: int,
    fine: int = 1024,
    c0: float = DEFAULT_C0,
    threads: int = 1,
):
    """Sup distance between SLE and its PWL-driver approximations.

    For each n in n_list: trace the fine-grid driver and the n-node PWL
    coarsening (resampled on the fine grid), record the sup distance, the
    frequency of {sup >= n^{-zeta}}, and the arithmetic bound.  Rows at
    kappa >= beta carry bound = +inf, flagged (outside the estimate's
    regime); small n may sit below the unquantified threshold of the bound
    and are never failed here, only compared.
    """
    zsup = admissible_zeta_sup(beta)
    if not (0 < zeta < zsup):
        raise ValueError(f"zeta must lie in (0, {zsup:.6g}), got {zeta}")
    n_list = list(n_list)
    for m in n_list:
        if fine % m != 0:
            raise ValueError(f"every n must divide the fine grid {fine}; got {m}")

    def worker(lo, hi):
        vals = _driver_values_block(kappa, 1.0, fine, seed, lo, hi)
        pts, bad = trace_many(vals, 1.0)
        sups = np.empty((hi - lo, len(n_list)))
        for col, m in enumerate(n_list):
            approx = _resample_rows(vals, m)
            pts_m, bad_m = trace_many(approx, 1.0)
            bad = bad | bad_m
            with np.errstate(invalid="ignore"):
                sups[:, col] = np.max(np.abs(pts - pts_m), axis=1)
        return sups, bad

    parts = _run_blocks(N, 256, worker, threads)
    sups = np.concatenate([p[0] for p in parts], axis=0)
    bad = np.concatenate([p[1] for p in parts])
    indet = int(np.sum(bad))
    if indet >= INDETERMINACY_BUDGET * N and indet > 0:
        raise IndeterminacyError(f"{indet} of {N} replicas indeterminate")
    good = sups[~bad]
    n_eff = max(1, len(good))
    rows = []
    for col, m in enumerate(n_list):
        errs = good[:, col]
        thresh = float(m) ** (-zeta)
        freq = float(np.mean(errs >= thresh))
        se = math.sqrt(freq * (1 - freq) / n_eff)
        bound = convergence_bound(m, kappa, beta, c0)
        rows.append(
            {
                "n": m,
                "median_sup_error": float(np.median(errs)),
                "violation_freq": freq,
                "violation_se": se,
                "threshold": thresh,
                "bound": bound,
                "flagged_divergent": math.isinf(bound),
                "N": N,
                "indeterminate": indet,
            }
        )
    return rows


@dataclass(frozen=True)
class MomentResult:
    mean: float
    se: float
    n_replicas: int
    indeterminate: int


def derivative_moment(
    kappa: float, y: float, t: float, N: int, n: int, seed: int, threads: int = 1
) -> MomentResult:
    """Sample mean of |fhat'_t(iy)|^{2/kappa} over N SLE_kappa replicas.

    The reference value is 1: the reverse-flow supermartingale argument
    bounds the expectation by 1 uniformly in t and y.
    """
    k = int(round(t * n))
    if k < 1 or abs(t * n - k) > 1e-9:
        raise ValueError(f"t = {t} must be a positive grid time of the n = {n} grid")

    def worker(lo, hi):
        vals = _driver_values_block(kappa, 1.0, n, seed, lo, hi)
        absd, bad = _derivative_profile_sweep(vals, 1.0, [k], [y])
        x = absd[:, 0, 0] ** (2.0 / kappa)
        x = x[~bad]
        return float(np.sum(x)), float(np.sum(x * x)), int(np.sum(bad))

    parts = _run_blocks(N, 1024, worker, threads)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    indet = sum(p[2] for p in parts)
    if indet >= INDETERMINACY_BUDGET * N and indet > 0:
        raise IndeterminacyError(f"{indet} of {N} replicas indeterminate")
    n_eff = N - indet
    mean = s1 / n_eff
    var = max(0.0, (s2 - n_eff * mean * mean) / max(1, n_eff - 1))
    return MomentResult(
        mean=mean, se=math.sqrt(var / n_eff), n_replicas=N, indeterminate=indet
    )
