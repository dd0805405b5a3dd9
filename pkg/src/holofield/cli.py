"""Configuration-driven command line entry point.

One flat JSON config describes the model (space, window, kernel, potential),
the sampler run lengths, the evaluation points, and the verification battery.
Subcommands:

``sample``    run chains, write the thinned sample archive plus diagnostics
``estimate``  run chains, write moment/Laplace estimates with error bars
``oracle``    compute exact small-window values with certified bounds
``verify``    run the requested verification tests; exit 3 on failure
``report``    render estimates vs oracle values as text and CSV

Outputs are deterministic functions of (config, seed, build): no timestamps,
sorted JSON keys, fixed reduction orders regardless of worker count.  Exit
codes: 0 ok, 1 config/validation error, 2 numerical failure (cache drift or
non-finite results), 3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .configurations import TestFunction
from .geometry import GeometryError, Space, Window, box_window, euclidean_isometry
from .interaction import PotentialSpec, profile_from_config, verify_conditions
from .kernels import KernelDomainError, kernel_from_config
from .oracle import (
    OracleTailError,
    SeriesSpec,
    count_functional,
    expect,
    field_at,
    laplace_functional,
    moment_functional,
)
from .sampler import CacheDriftError, SamplerConfig, run_chains

_DEFAULTS = {
    "space": "euclidean",
    "dim": 1,
    "radius": 1.0,
    "window": [[0.0, 1.0]],
    "kernel": "gaussian",
    "epsilon": 0.5,
    "mass": 1.0,
    "quad_tol": 1e-8,
    "im_budget": 3.0,
    "re_budget": 24.0,
    "potential": "widom_rowlinson",
    "beta": 1.0,
    "charges": None,
    "grid_h": None,
    "pad_tol": 1e-8,
    "intensity": 1.0,
    "burnin": 1000,
    "thin": 5,
    "chains": 1,
    "samples": 10000,
    "drift_period": 10000,
    "seed": 0,
    "points": [],
    "laplace": None,
    "nmax": 12,
    "quad_nodes": 32,
    "tail_tol": 1e-8,
    "oracle_functionals": ["count"],
    "tests": ["conditions"],
    "trials": 1000,
    "verify_samples": 20000,
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(_DEFAULTS)
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        unknown = set(user) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    return cfg


def build_model(cfg: dict) -> PotentialSpec:
    try:
        space = Space(cfg["space"], int(cfg["dim"]), float(cfg["radius"]))
        if space.kind == "sphere":
            window = Window(space, np.asarray([[0.0, 1.0]] * space.dim, dtype=float))
        else:
            bounds = np.asarray(cfg["window"], dtype=float)
            if bounds.shape != (space.dim, 2):
                raise ConfigError(
                    f"window must be a {space.dim} x 2 bounds list, got {bounds.shape}"
                )
            window = box_window(space, bounds)
        kernel = kernel_from_config(cfg, space.dim, space.radius)
        profile = profile_from_config(cfg)
        return PotentialSpec.build(
            profile,
            kernel,
            float(cfg["beta"]),
            window,
            spacing=cfg["grid_h"],
            pad_tol=float(cfg["pad_tol"]),
        )
    except (ValueError, KeyError, GeometryError) as err:
        raise ConfigError(str(err)) from err


def sampler_config(cfg: dict) -> SamplerConfig:
    return SamplerConfig(
        intensity=float(cfg["intensity"]),
        burnin=int(cfg["burnin"]),
        thin=int(cfg["thin"]),
        drift_period=int(cfg["drift_period"]),
    )


def _parse_points(cfg: dict, dim: int):
    """Evaluation points: list of {re: [..], im: [..], conj: bool}."""
    zs, conj = [], []
    for rec in cfg["points"]:
        re = np.asarray(rec.get("re", [0.0] * dim), dtype=float)
        im = np.asarray(rec.get("im", [0.0] * dim), dtype=float)
        if re.shape != (dim,) or im.shape != (dim,):
            raise ConfigError(f"point needs {dim} re and im coordinates")
        zs.append(re + 1j * im)
        conj.append(bool(rec.get("conj", False)))
    return zs, conj


def _parse_laplace(cfg: dict, window: Window) -> TestFunction | None:
    rec = cfg["laplace"]
    if rec is None:
        return None
    center = rec.get("center", window.bounds.mean(axis=1).tolist())
    return TestFunction(
        np.asarray(center, dtype=float),
        float(rec.get("radius", 0.5)),
        float(rec.get("height", 1.0)),
    )


def _write_json(path: Path, payload) -> None:
    """Serialize deterministically; refuse non-finite values (exit code 2)."""
    text = json.dumps(payload, sort_keys=True, indent=1, allow_nan=False)
    path.write_text(text + "\n")


def _check_finite(obj) -> bool:
    if isinstance(obj, dict):
        return all(_check_finite(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return all(_check_finite(v) for v in obj)
    if isinstance(obj, float):
        return math.isfinite(obj)
    return True


def cmd_sample(cfg: dict, out: Path, workers: int) -> int:
    pot = build_model(cfg)
    samples, diags = run_chains(
        pot,
        sampler_config(cfg),
        int(cfg["samples"]),
        int(cfg["chains"]),
        int(cfg["seed"]),
        workers=workers,
    )
    out.mkdir(parents=True, exist_ok=True)
    samples.write_ndjson(out / "samples.ndjson")
    payload = {
        "config": cfg,
        "diagnostics": [d.to_jsonable() for d in diags],
        "n_samples": len(samples.points),
    }
    if not _check_finite(payload["diagnostics"]):
        print("error: non-finite diagnostics", file=sys.stderr)
        return 2
    _write_json(out / "diagnostics.json", payload)
    return 0


def cmd_estimate(cfg: dict, out: Path, workers: int) -> int:
    from .fields import estimate_laplace, estimate_moment

    pot = build_model(cfg)
    zs, conj = _parse_points(cfg, pot.window.space.ambient_dim)
    h = _parse_laplace(cfg, pot.window)
    samples, _ = run_chains(
        pot,
        sampler_config(cfg),
        int(cfg["samples"]),
        int(cfg["chains"]),
        int(cfg["seed"]),
        workers=workers,
    )
    records = []
    if zs:
        est = estimate_moment(samples, pot.kernel, zs, conj)
        records.append({"kind": "moment", **est.to_jsonable()})
    if h is not None:
        est = estimate_laplace(samples, h)
        records.append({"kind": "laplace", **est.to_jsonable()})
    payload = {"config": cfg, "estimates": records}
    if not _check_finite(payload["estimates"]):
        print("error: non-finite estimate", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "estimates.json", payload)
    return 0


def cmd_oracle(cfg: dict, out: Path) -> int:
    pot = build_model(cfg)
    spec = SeriesSpec(
        pot,
        intensity=float(cfg["intensity"]),
        nmax=int(cfg["nmax"]),
        quad_nodes=int(cfg["quad_nodes"]),
        tail_tol=float(cfg["tail_tol"]),
    )
    records = []
    for name in cfg["oracle_functionals"]:
        if name == "count":
            val = expect(spec, count_functional())
        elif name == "laplace":
            h = _parse_laplace(cfg, pot.window)
            if h is None:
                raise ConfigError("'laplace' oracle functional needs a laplace entry")
            val = expect(spec, laplace_functional(h))
        elif name == "field":
            center = tuple(pot.window.bounds.mean(axis=1))
            val = expect(spec, field_at(pot.kernel, center))
        elif name == "moment":
            zs, conj = _parse_points(cfg, pot.window.space.ambient_dim)
            if not zs:
                raise ConfigError("'moment' oracle functional needs points")
            val = expect(spec, moment_functional(pot.kernel, zs, conj))
        else:
            raise ConfigError(f"unknown oracle functional {name!r}")
        records.append({"functional": name, **val.to_jsonable()})
    payload = {"config": cfg, "oracle": records}
    if not _check_finite(payload["oracle"]):
        print("error: non-finite oracle value", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "oracle.json", payload)
    return 0


def cmd_verify(cfg: dict, out: Path, workers: int) -> int:
    from . import analysis
    from .configurations import bump

    pot = build_model(cfg)
    reports = []
    samples = None

    def get_samples():
        nonlocal samples
        if samples is None:
            samples, _ = run_chains(
                pot,
                sampler_config(cfg),
                int(cfg["verify_samples"]),
                int(cfg["chains"]),
                int(cfg["seed"]),
                workers=workers,
            )
        return samples

    for test in cfg["tests"]:
        if test == "conditions":
            rng = np.random.default_rng(int(cfg["seed"]) + 1)
            rep = verify_conditions(
                pot, trials=int(cfg["trials"]), rng=rng, intensity=float(cfg["intensity"])
            )
            reports.append(
                {
                    "name": "conditions",
                    "passed": bool(rep.ok),
                    "details": rep.to_jsonable(),
                }
            )
        elif test == "fkg":
            b = pot.window.bounds
            mid = b.mean(axis=1)
            left = tuple((lo, m) for (lo, _), m in zip(b, mid))
            right = tuple((m, hi) for (_, hi), m in zip(b, mid))

            def count_in(bounds):
                bb = np.asarray(bounds, dtype=float)
                return lambda p: (
                    float(np.all((p >= bb[:, 0]) & (p <= bb[:, 1]), axis=1).sum())
                    if p.shape[0]
                    else 0.0
                )

            rep = analysis.fkg_test(
                get_samples(), [count_in(left), count_in(right)], names=["N_left", "N_right"]
            )
            reports.append(rep.to_jsonable())
        elif test == "dominance":
            h = _parse_laplace(cfg, pot.window) or bump(
                tuple(pot.window.bounds.mean(axis=1)), 0.5, 1.0
            )
            rep = analysis.dominance_test(
                get_samples(),
                pot,
                float(cfg["intensity"]),
                [tuple(map(tuple, pot.window.bounds))],
                h=h,
            )
            reports.append(rep.to_jsonable())
        elif test == "laplace_monotonicity":
            h = _parse_laplace(cfg, pot.window) or bump(
                tuple(pot.window.bounds.mean(axis=1)), 0.5, 1.0
            )
            rep = analysis.laplace_monotonicity_test(
                pot,
                [0.5 * float(cfg["intensity"]), float(cfg["intensity"])],
                h,
                n_samples=int(cfg["verify_samples"]),
                seed=int(cfg["seed"]),
                config=sampler_config(cfg),
            )
            reports.append(rep.to_jsonable())
        elif test == "euclidean_invariance":
            b = pot.window.bounds
            shift = np.zeros(b.shape[0])
            shift[0] = 0.25 * (b[0, 1] - b[0, 0]) / 6.0
            g = euclidean_isometry(np.eye(b.shape[0]), shift)
            center = b.mean(axis=1)
            p2 = center.copy()
            p2[0] += 0.5
            rep = analysis.euclidean_invariance_test(
                get_samples(), pot, g, [center, p2], intensity=float(cfg["intensity"])
            )
            reports.append(rep.to_jsonable())
        else:
            raise ConfigError(f"unknown verification test {test!r}")
    payload = {"config": cfg, "reports": reports}
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", payload)
    all_pass = all(r["passed"] for r in reports)
    return 0 if all_pass else 3


def cmd_report(out: Path) -> int:
    est_path = out / "estimates.json"
    orc_path = out / "oracle.json"
    rows = []
    if est_path.exists():
        data = json.loads(est_path.read_text())
        for rec in data["estimates"]:
            rows.append(
                (
                    f"estimate/{rec['kind']}",
                    rec["value"]["re"],
                    rec["value"]["im"],
                    rec["stderr_re"],
                )
            )
    if orc_path.exists():
        data = json.loads(orc_path.read_text())
        for rec in data["oracle"]:
            val = rec["value"]
            re, im = (val["re"], val["im"]) if isinstance(val, dict) else (val, 0.0)
            rows.append(
                (
                    f"oracle/{rec['functional']}",
                    re,
                    im,
                    rec["tail_bound"] + rec["quad_bound"],
                )
            )
    if not rows:
        print("no artifacts found in", out)
        return 1
    header = f"{'record':<24}{'re':>18}{'im':>18}{'error':>14}"
    lines = [header, "-" * len(header)]
    for name, re, im, err in rows:
        lines.append(f"{name:<24}{re:>18.10f}{im:>18.10f}{err:>14.3e}")
    text = "\n".join(lines)
    print(text)
    with open(out / "report.csv", "w") as fh:
        fh.write("record,re,im,error\n")
        for name, re, im, err in rows:
            fh.write(f"{name},{re!r},{im!r},{err!r}\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="holofield",
        description="simulate interacting particle fields and verify their moment structure",
    )
    parser.add_argument("command", choices=["sample", "estimate", "oracle", "verify", "report"])
    parser.add_argument("--config", default=None, help="path to a JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="process pool size for chains")
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config, {"seed": args.seed})
        if args.command == "sample":
            return cmd_sample(cfg, out, args.workers)
        if args.command == "estimate":
            return cmd_estimate(cfg, out, args.workers)
        if args.command == "oracle":
            return cmd_oracle(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.workers)
        return cmd_report(out)
    except (ConfigError, OracleTailError, KernelDomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except CacheDriftError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
