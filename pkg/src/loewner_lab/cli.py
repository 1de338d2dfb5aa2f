"""Experiment runner: JSON config in, CSV/JSON artifacts + manifest out.

Subcommands mirror experiment kinds one to one:

    loewner-lab trace|zip|energy|verify-bounds|mc|ldp-slope|optimize|approx-converge
        --config PATH [--out DIR] [--seed N] [--threads N]

The output directory defaults to $LOEWNER_LAB_OUT, then ./out.  Exit codes:
0 success, 1 config/validation error, 2 runtime failure (singularity budget
exceeded, optimizer infeasible when the config asserted feasibility).
Errors are emitted as one JSON object on stderr.

Every run writes a manifest.json recording the config hash, effective seed,
thread count, package versions, and the produced files.  Timestamps appear
only in the manifest, so result payloads are byte-identical across reruns
with the same config and seed, for any --threads value.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._format import fmt
from .drivers import (
    Driver,
    dirichlet_energy,
    make_driver,
    read_driver_csv,
    sample_brownian_driver,
    write_driver_csv,
)
from .forward import Curve, read_curve_csv, trace, write_curve_csv
from .montecarlo import (
    DEFAULT_C0,
    DerivativeEvent,
    DriverSupEvent,
    IndeterminacyError,
    OscillationEvent,
    TubeEvent,
    chi_square_energy,
    complement_bound_check,
    derivative_moment,
    estimate_event,
    ldp_slope,
    oscillation_tail,
    pwl_convergence,
    write_mc_csv,
)
from .optimize import (
    AvoidDisk,
    Endpoint,
    OptOptions,
    TubeMembership,
    minimize_energy,
    neighborhood_limit,
)
from .zipper import capacity_profile, zip_curve

KINDS = (
    "trace",
    "zip",
    "energy",
    "verify-bounds",
    "mc",
    "ldp-slope",
    "optimize",
    "approx-converge",
)


class ConfigError(ValueError):
    pass


def _require_keys(obj: dict, where: str, required: dict, optional: dict | None = None):
    """Validate presence and rough types; unknown fields are rejected."""
    optional = optional or {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown fields {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing fields {sorted(missing)}")
    for key, types in {**required, **optional}.items():
        if key in obj and not isinstance(obj[key], types):
            raise ConfigError(f"{where}.{key}: expected {types}, got {type(obj[key]).__name__}")


_NUM = (int, float)


def _build_driver(spec: dict, where: str, default_seed: int) -> Driver:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an object")
    variants = [k for k in ("values", "file", "brownian") if k in spec]
    if len(variants) != 1:
        raise ConfigError(f"{where}: give exactly one of values/file/brownian")
    kind = variants[0]
    if kind == "values":
        _require_keys(spec, where, {"values": list, "T": _NUM}, {"resample_to": int})
        d = make_driver(np.asarray(spec["values"], dtype=float), float(spec["T"]))
    elif kind == "file":
        _require_keys(spec, where, {"file": str}, {"resample_to": int})
        d = read_driver_csv(spec["file"])
    else:
        _require_keys(spec, where, {"brownian": dict}, {"resample_to": int})
        b = spec["brownian"]
        _require_keys(
            b, f"{where}.brownian", {"kappa": _NUM, "n": int}, {"T": _NUM, "seed": int}
        )
        d = sample_brownian_driver(
            float(b["kappa"]),
            float(b.get("T", 1.0)),
            int(b["n"]),
            int(b.get("seed", default_seed)),
        )
    if "resample_to" in spec:
        n = int(spec["resample_to"])
        if n < 1:
            raise ConfigError(f"{where}.resample_to must be >= 1")
        t = np.arange(n + 1) * d.horizon / n
        d = make_driver(np.interp(t, d.times(), d.values), d.horizon)
    return d


def _build_curve(spec: dict, where: str, default_seed: int) -> Curve:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an object")
    if "file" in spec:
        _require_keys(spec, where, {"file": str})
        return read_curve_csv(spec["file"])
    if "driver" in spec:
        _require_keys(spec, where, {"driver": dict})
        return trace(_build_driver(spec["driver"], f"{where}.driver", default_seed))
    raise ConfigError(f"{where}: give one of file/driver")


def _build_event(spec: dict, where: str, n: int, default_seed: int):
    _require_keys(
        spec,
        where,
        {"type": str},
        {
            "a": _NUM,
            "target": dict,
            "delta": _NUM,
            "complement": bool,
            "r": _NUM,
            "beta": _NUM,
            "n": int,
            "scale": str,
            "psi_form": bool,
        },
    )
    t = spec["type"]
    if t == "driver-sup":
        _require_keys(spec, where, {"type": str, "a": _NUM})
        return DriverSupEvent(level=float(spec["a"]))
    if t == "tube":
        _require_keys(
            spec, where, {"type": str, "target": dict, "delta": _NUM}, {"complement": bool}
        )
        target = _build_curve(spec["target"], f"{where}.target", default_seed)
        return TubeEvent(
            target=target, delta=float(spec["delta"]), complement=bool(spec.get("complement", False))
        )
    if t == "oscillation":
        _require_keys(spec, where, {"type": str, "delta": _NUM, "r": _NUM})
        return OscillationEvent(delta=float(spec["delta"]), threshold=float(spec["r"]))
    if t == "derivative":
        _require_keys(
            spec,
            where,
            {"type": str, "beta": _NUM, "n": int},
            {"scale": str, "psi_form": bool},
        )
        return DerivativeEvent(
            beta=float(spec["beta"]),
            n=int(spec["n"]),
            scale=spec.get("scale", "dyadic"),
            psi_form=bool(spec.get("psi_form", False)),
        )
    raise ConfigError(f"{where}.type: unknown event type {t!r}")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _dict_rows_csv(path: Path, rows, columns) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for c in columns:
                v = row[c]
                if isinstance(v, bool):
                    cells.append(str(int(v)))
                elif isinstance(v, float):
                    cells.append(fmt(v))
                else:
                    cells.append(str(v))
            f.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# experiment runners; each returns the list of files written (payloads only)


def _run_trace(cfg, ctx):
    _require_keys(cfg, "config", {"kind": str, "driver": dict}, {"seed": int})
    d = _build_driver(cfg["driver"], "config.driver", ctx["seed"])
    curve = trace(d)
    out = ctx["out"] / "curve.csv"
    write_curve_csv(curve, out)
    return [out]


def _run_zip(cfg, ctx):
    _require_keys(cfg, "config", {"kind": str, "curve": dict}, {"seed": int})
    curve = _build_curve(cfg["curve"], "config.curve", ctx["seed"])
    result = zip_curve(curve)
    files = []
    if result.driver is not None:
        f = ctx["out"] / "recovered_driver.csv"
        write_driver_csv(result.driver, f)
        files.append(f)
    prof = ctx["out"] / "capacity_profile.csv"
    with open(prof, "w", newline="") as fh:
        fh.write("t,hcap\n")
        for t, h in capacity_profile(result):
            fh.write(f"{fmt(t)},{fmt(h)}\n")
    files.append(prof)
    summ = ctx["out"] / "zip_summary.json"
    _write_json(
        summ,
        {
            "horizon": result.horizon,
            "steps": len(result.dts),
            "residual": result.residual,
        },
    )
    files.append(summ)
    return files


def _run_energy(cfg, ctx):
    _require_keys(cfg, "config", {"kind": str, "driver": dict}, {"seed": int})
    d = _build_driver(cfg["driver"], "config.driver", ctx["seed"])
    out = ctx["out"] / "energy.json"
    _write_json(out, {"energy": dirichlet_energy(d), "n": d.n_steps, "T": d.horizon})
    return [out]


def _run_verify_bounds(cfg, ctx):
    from .suite import run_bound_suite  # heavy; import on demand

    _require_keys(
        cfg,
        "config",
        {"kind": str},
        {"seed": int, "instances": int, "grid": int, "checks": list},
    )
    reports = run_bound_suite(
        instances=int(cfg.get("instances", 100)),
        grid=int(cfg.get("grid", 128)),
        seed=ctx["seed"],
        checks=cfg.get("checks"),
    )
    out = ctx["out"] / "bounds_report.json"
    _write_json(out, reports)
    return [out]


def _run_mc(cfg, ctx):
    _require_keys(
        cfg,
        "config",
        {"kind": str, "op": str},
        {
            "seed": int,
            "event": dict,
            "kappa": _NUM,
            "N": int,
            "n": int,
            "m": int,
            "delta": _NUM,
            "r": _NUM,
            "c0": _NUM,
            "beta": _NUM,
            "n_steps": int,
            "y": _NUM,
            "t": _NUM,
        },
    )
    op = cfg["op"]
    seed, threads = ctx["seed"], ctx["threads"]
    if op == "event":
        for k in ("event", "kappa", "N", "n"):
            if k not in cfg:
                raise ConfigError(f"config.{k} required for op=event")
        n = int(cfg["n"])
        event = _build_event(cfg["event"], "config.event", n, seed)
        res = estimate_event(event, float(cfg["kappa"]), int(cfg["N"]), n, seed, threads)
        out = ctx["out"] / "mc.csv"
        write_mc_csv([res], out)
        return [out]
    if op == "chi-square":
        for k in ("kappa", "m", "N"):
            if k not in cfg:
                raise ConfigError(f"config.{k} required for op=chi-square")
        stats = chi_square_energy(float(cfg["kappa"]), int(cfg["m"]), int(cfg["N"]), seed)
        out = ctx["out"] / "chi_square.json"
        _write_json(
            out,
            {"mean": stats.mean, "variance": stats.variance, "N": int(cfg["N"]), "m": int(cfg["m"])},
        )
        return [out]
    if op == "osc-tail":
        for k in ("kappa", "delta", "r", "N"):
            if k not in cfg:
                raise ConfigError(f"config.{k} required for op=osc-tail")
        res = oscillation_tail(
            float(cfg["kappa"]),
            float(cfg["delta"]),
            float(cfg["r"]),
            int(cfg["N"]),
            seed,
            n=int(cfg.get("n", 2048)),
            c0=float(cfg.get("c0", DEFAULT_C0)),
            threads=threads,
        )
        out = ctx["out"] / "osc_tail.json"
        _write_json(
            out,
            {
                "p_hat": res.mc.p_hat,
                "se": res.mc.se,
                "hits": res.mc.hits,
                "bound": res.bound,
                "c0": res.c0,
                "passed": res.passed,
            },
        )
        return [out]
    if op == "complement":
        for k in ("beta", "kappa", "n", "N"):
            if k not in cfg:
                raise ConfigError(f"config.{k} required for op=complement")
        res = complement_bound_check(
            float(cfg["beta"]),
            float(cfg["kappa"]),
            int(cfg["n"]),
            int(cfg["N"]),
            seed,
            n_steps=int(cfg.get("n_steps", 1024)),
            threads=threads,
        )
        out = ctx["out"] / "complement.json"
        _write_json(out, res.__dict__)
        return [out]
    if op == "moment":
        for k in ("kappa", "y", "t", "N", "n"):
            if k not in cfg:
                raise ConfigError(f"config.{k} required for op=moment")
        res = derivative_moment(
            float(cfg["kappa"]), float(cfg["y"]), float(cfg["t"]),
            int(cfg["N"]), int(cfg["n"]), seed, threads,
        )
        out = ctx["out"] / "moment.json"
        _write_json(out, res.__dict__)
        return [out]
    raise ConfigError(f"config.op: unknown mc op {op!r}")


def _run_ldp_slope(cfg, ctx):
    _require_keys(
        cfg,
        "config",
        {"kind": str, "event": dict, "kappa_list": list, "N": int, "n": int},
        {"seed": int},
    )
    n = int(cfg["n"])
    event = _build_event(cfg["event"], "config.event", n, ctx["seed"])
    rows = ldp_slope(
        event, [float(k) for k in cfg["kappa_list"]], int(cfg["N"]), n,
        ctx["seed"], ctx["threads"],
    )
    out = ctx["out"] / "ldp_slope.csv"
    _dict_rows_csv(
        out, rows, ["kappa", "N", "hits", "p_hat", "se", "kappa_log_p", "low_hits"]
    )
    return [out]


def _build_constraint(spec: dict, where: str, seed: int):
    _require_keys(
        spec,
        where,
        {"type": str},
        {
            "target": dict,
            "delta": _NUM,
            "z": list,
            "tolerance": _NUM,
            "center": list,
            "radius": _NUM,
        },
    )
    t = spec["type"]
    if t == "tube":
        _require_keys(spec, where, {"type": str, "target": dict, "delta": _NUM})
        return TubeMembership(_build_curve(spec["target"], f"{where}.target", seed), float(spec["delta"]))
    if t == "endpoint":
        _require_keys(spec, where, {"type": str, "z": list, "tolerance": _NUM})
        return Endpoint(complex(spec["z"][0], spec["z"][1]), float(spec["tolerance"]))
    if t == "avoid-disk":
        _require_keys(spec, where, {"type": str, "center": list, "radius": _NUM})
        return AvoidDisk(complex(spec["center"][0], spec["center"][1]), float(spec["radius"]))
    raise ConfigError(f"{where}.type: unknown constraint type {t!r}")


def _run_optimize(cfg, ctx):
    _require_keys(
        cfg,
        "config",
        {"kind": str, "m": int},
        {
            "seed": int,
            "constraint": dict,
            "neighborhood": dict,
            "assert_feasible": bool,
            "opts": dict,
        },
    )
    opt_kwargs = dict(cfg.get("opts", {}))
    opt_kwargs["seed"] = ctx["seed"]
    try:
        opts = OptOptions(**opt_kwargs)
    except TypeError as e:
        raise ConfigError(f"config.opts: {e}") from None
    m = int(cfg["m"])
    if ("constraint" in cfg) == ("neighborhood" in cfg):
        raise ConfigError("config: give exactly one of constraint/neighborhood")
    if "neighborhood" in cfg:
        nb = cfg["neighborhood"]
        _require_keys(
            nb, "config.neighborhood", {"target_driver": dict, "delta_list": list}
        )
        target_driver = _build_driver(nb["target_driver"], "config.neighborhood.target_driver", ctx["seed"])
        rows = neighborhood_limit(target_driver, [float(d) for d in nb["delta_list"]], m, opts)
        out = ctx["out"] / "neighborhood.csv"
        _dict_rows_csv(
            out,
            [
                {"delta": r["delta"], "energy": r["energy"],
                 "residual": r["result"].residual, "converged": r["result"].converged}
                for r in rows
            ],
            ["delta", "energy", "residual", "converged"],
        )
        return [out]
    constraint = _build_constraint(cfg["constraint"], "config.constraint", ctx["seed"])
    res = minimize_energy(constraint, m, opts)
    if cfg.get("assert_feasible", False) and res.infeasible:
        raise RuntimeError("optimizer reported infeasible but config asserted feasibility")
    driver_file = ctx["out"] / "opt_driver.csv"
    write_driver_csv(res.driver, driver_file)
    out = ctx["out"] / "opt_result.json"
    _write_json(
        out,
        {
            "constraint": constraint.label(),
            "m": m,
            "energy": res.energy,
            "residual": res.residual,
            "iterations": res.iterations,
            "converged": res.converged,
            "infeasible": res.infeasible,
            "driver_file": driver_file.name,
        },
    )
    return [out, driver_file]


def _run_approx_converge(cfg, ctx):
    _require_keys(
        cfg,
        "config",
        {"kind": str, "kappa": _NUM, "n_list": list, "beta": _NUM, "zeta": _NUM, "N": int},
        {"seed": int, "fine": int, "c0": _NUM},
    )
    rows = pwl_convergence(
        float(cfg["kappa"]),
        [int(x) for x in cfg["n_list"]],
        float(cfg["beta"]),
        float(cfg["zeta"]),
        int(cfg["N"]),
        ctx["seed"],
        fine=int(cfg.get("fine", 1024)),
        c0=float(cfg.get("c0", DEFAULT_C0)),
        threads=ctx["threads"],
    )
    out = ctx["out"] / "convergence.csv"
    _dict_rows_csv(
        out,
        rows,
        [
            "n",
            "median_sup_error",
            "violation_freq",
            "violation_se",
            "threshold",
            "bound",
            "flagged_divergent",
        ],
    )
    return [out]


_RUNNERS = {
    "trace": _run_trace,
    "zip": _run_zip,
    "energy": _run_energy,
    "verify-bounds": _run_verify_bounds,
    "mc": _run_mc,
    "ldp-slope": _run_ldp_slope,
    "optimize": _run_optimize,
    "approx-converge": _run_approx_converge,
}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="loewner-lab", description=__doc__)
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    try:
        raw = Path(args.config).read_text()
    except OSError as e:
        return _fail(1, "config-io", str(e))
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as e:
        return _fail(1, "config-parse", f"malformed JSON: {e}")
    if not isinstance(cfg, dict):
        return _fail(1, "config-parse", "config must be a JSON object")
    if cfg.get("kind") != args.kind:
        return _fail(1, "config-validate", f"config kind {cfg.get('kind')!r} != subcommand {args.kind!r}")

    out_dir = Path(args.out or os.environ.get("LOEWNER_LAB_OUT", "out"))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    ctx = {"out": out_dir, "seed": seed, "threads": max(1, args.threads)}

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        files = _RUNNERS[args.kind](cfg, ctx)
    except ConfigError as e:
        return _fail(1, "config-validate", str(e))
    except (ValueError, OSError) as e:
        return _fail(1, "validation", str(e))
    except (IndeterminacyError, RuntimeError) as e:
        return _fail(2, "runtime", str(e))

    manifest = {
        "kind": args.kind,
        "config_sha256": hashlib.sha256(raw.encode()).hexdigest(),
        "seed": seed,
        "threads": ctx["threads"],
        "versions": {
            "loewner-lab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "outputs": [f.name for f in files],
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(out_dir / "manifest.json", manifest)
    print(json.dumps({"status": "ok", "outputs": [str(f) for f in files]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
