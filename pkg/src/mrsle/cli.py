"""Command-line batch runner (``sle``).

Exit codes: 0 success (all gated checks passed), 1 a gated check failed,
2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import DomainError, SleError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

TRANSIENCE_GATED = {"verify transience"}
VERIFY_KINDS = ("martingale", "slice", "two-time", "resampling", "transience", "bessel", "fusion")


class ConfigError(Exception):
    pass


class ExperimentConfig(BaseModel):
    """Validated parameter block shared by every subcommand."""

    model_config = ConfigDict(extra="forbid")

    command: str | None = None
    kappa: float | None = Field(default=None, gt=0)
    mu: float = 0.0
    rho: list[float] = Field(default_factory=list)
    p: int | None = Field(default=None, ge=1)
    angles: list[float] | None = None
    dt: float = Field(default=1e-4, gt=0)
    steps: int | None = Field(default=None, ge=0)
    paths: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0)
    T: float | None = Field(default=None, ge=0)
    out: str | None = None
    threads: int | None = Field(default=None, ge=1)
    tolerance: float | None = Field(default=None, gt=0)
    alpha: float | None = Field(default=None, gt=0)
    x0: float | None = Field(default=None, gt=0)
    epsilons: list[float] | None = None
    n: int | None = Field(default=None, ge=1)
    horizon: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _rho_sign(self):
        if self.command in TRANSIENCE_GATED and any(r < 0 for r in self.rho):
            raise ValueError("rho: transience requires rho_j >= 0 for every force point")
        return self


def _format_validation(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "config"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def validate_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_validation(err)) from None


def load_config(path) -> ExperimentConfig:
    """Read a JSON config, apply defaults and validate; unknown keys are rejected."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"{path}: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return validate_config(data)


# ---------------------------------------------------------------- workers


def worker_count(requested: int | None = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("SLE_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"SLE_THREADS={cap!r} is not an integer") from None
    return max(1, n)


@contextmanager
def path_mapper(workers: int):
    """Ordered map over paths; a process pool when more than one worker is allowed."""
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        def pmap(fn, items):
            items = list(items)
            return ex.map(fn, items, chunksize=max(1, len(items) // (8 * workers)))

        yield pmap


# ---------------------------------------------------------------- helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _need(cfg: ExperimentConfig, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"{', '.join(missing)}: required for {cfg.command}")


def _write_json(obj, out):
    text = json.dumps(obj, indent=2, default=float)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _angles(cfg: ExperimentConfig) -> list[float]:
    if cfg.angles is not None:
        if cfg.p is not None and len(cfg.angles) != cfg.p:
            raise ConfigError(f"angles: {len(cfg.angles)} values for p={cfg.p}")
        return cfg.angles
    p = cfg.p or 1
    return [2 * math.pi * j / p for j in range(p)]


# ---------------------------------------------------------------- subcommands


def cmd_sample(cfg: ExperimentConfig, model: str) -> int:
    from .samplers import SleParams, sample_multiradial_common, sample_radial_sle, sample_radial_sle_rho

    _need(cfg, "kappa", "out")
    angles = _angles(cfg)
    p = len(angles)
    steps = cfg.steps if cfg.steps is not None else int(round((cfg.T or 1.0) / cfg.dt))
    if model == "auto":
        model = "radial" if p == 1 else ("rho" if cfg.rho else "multiradial")
    out = Path(cfg.out)
    conf = cfg.model_dump()
    for i in range(cfg.paths):
        if model == "radial":
            rec = sample_radial_sle(SleParams(cfg.kappa, cfg.mu), cfg.dt, steps, cfg.seed, angles[0], i)
        elif model == "rho":
            rec = sample_radial_sle_rho(SleParams(cfg.kappa, cfg.mu, tuple(cfg.rho), p), angles, cfg.dt, steps,
                                        cfg.seed, i)
        else:
            rec = sample_multiradial_common(SleParams(cfg.kappa, cfg.mu, (), p), angles, cfg.dt, steps, cfg.seed, i)
        rec.params["config"] = conf
        target = out if cfg.paths == 1 else out.with_name(f"{out.stem}_{i:04d}{out.suffix}")
        rec.to_csv(target)
    return EXIT_OK


def cmd_trace(cfg: ExperimentConfig, src: str, stride: int, coarsen: int) -> int:
    from .loewner import trace_curves
    from .samplers import DrivingRecord

    _need(cfg, "out")
    rec = DrivingRecord.from_csv(src)
    tr = trace_curves(rec, stride=stride, coarsen=coarsen)
    tr.to_csv(cfg.out)
    meta = {"source": str(src), "stride": stride, "coarsen": coarsen, "driving": rec.sidecar(),
            "config": cfg.model_dump()}
    Path(str(cfg.out) + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def cmd_partition(fn: str, cfg: ExperimentConfig, target: float | None, z: list[float] | None) -> int:
    from . import partition

    _need(cfg, "kappa")
    angles = _angles(cfg)
    if fn == "z_multiradial":
        val = partition.z_multiradial(cfg.kappa, cfg.mu, angles)
    elif fn == "z_radial_rho":
        val = partition.z_radial_rho(cfg.kappa, cfg.mu, cfg.rho or [2.0] * (len(angles) - 1), angles)
    elif fn == "z_fusion":
        if target is None:
            raise ConfigError("target: required for z_fusion")
        val = partition.z_fusion(cfg.kappa, angles, target)
    else:
        if z is None or len(z) != 2:
            raise ConfigError("z: give the interior point as re,im")
        val = partition.z_multiradial_at(cfg.kappa, angles, complex(z[0], z[1]))
    print(json.dumps({"fn": fn, "log_abs": val.log_abs, "phase": val.phase, "grad": [float(g) for g in val.grad]}))
    return EXIT_OK


def cmd_verify(kind: str, cfg: ExperimentConfig, mapper) -> int:
    from . import verify
    from .samplers import BesselParams

    n = cfg.paths
    if kind == "fusion":
        _need(cfg, "kappa")
        rep = verify.check_fusion_limit(cfg.n or 1, cfg.kappa, epsilons=cfg.epsilons or (0.1, 0.05, 0.025),
                                        tolerance=cfg.tolerance or 0.02)
    elif kind == "bessel":
        _need(cfg, "kappa", "alpha")
        bp = BesselParams(cfg.alpha, cfg.kappa, cfg.mu, cfg.x0 or 0.2)
        rep = verify.fit_hitting_exponent(bp, cfg.epsilons or (0.4, 0.2, 0.1), cfg.T or 2.0, n, cfg.seed,
                                          dt=cfg.dt, tolerance=cfg.tolerance or 0.15, mapper=mapper)
    else:
        _need(cfg, "kappa")
        angles = _angles(cfg)
        if kind == "martingale":
            rep = verify.check_spiral_martingale(cfg.kappa, cfg.mu, angles[0], cfg.T or 1.0, n, cfg.seed,
                                                 dt=cfg.dt, mapper=mapper)
        elif kind == "slice":
            rep = verify.check_slice_martingale(cfg.kappa, cfg.mu, len(angles), angles, cfg.T or 0.5, n, cfg.seed,
                                                dt=cfg.dt, mapper=mapper)
        elif kind == "two-time":
            rep = verify.check_two_time_martingale(cfg.kappa, cfg.mu, angles, n_paths=n, seed=cfg.seed,
                                                   tolerance=cfg.tolerance or 3.0, mapper=mapper)
        elif kind == "resampling":
            rep = verify.check_resampling_marginal(cfg.kappa, cfg.mu, len(angles), angles, cfg.T or 0.5, n,
                                                   cfg.seed, mapper=mapper)
        else:
            rep = verify.check_transience(cfg.kappa, cfg.mu, cfg.rho, angles, cfg.horizon or 5, n, cfg.seed,
                                          mapper=mapper)
    d = rep.to_dict()
    _write_json({"command": cfg.command, "config": cfg.model_dump(), "report": d}, cfg.out)
    return EXIT_OK if d["pass"] else EXIT_FAIL


def cmd_suite(preset: str, seed: int, out: str | None, only, mapper, workers: int) -> int:
    from .suite import PRESETS, run_suite

    if preset not in PRESETS:
        raise ConfigError(f"preset: unknown preset {preset!r} (choose from {sorted(PRESETS)})")
    results = run_suite(preset, seed, mapper, only=only,
                        progress=lambda r: print(r.line(), file=sys.stderr, flush=True))
    ok = all(r.passed for r in results)
    report = {"command": "suite", "config": {"preset": preset, "seed": seed, "only": only, "workers": workers},
              "pass": ok, "criteria": [r.to_dict() for r in results]}
    _write_json(report, out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- argument parsing


def _common(sp: argparse.ArgumentParser, *, paths: bool = True) -> None:
    s = argparse.SUPPRESS
    sp.add_argument("--config", help="JSON config; explicit flags override it")
    sp.add_argument("--kappa", type=float, default=s)
    sp.add_argument("--mu", type=float, default=s)
    sp.add_argument("--rho", type=_floats, default=s, help="comma-separated force-point weights")
    sp.add_argument("--p", type=int, default=s)
    sp.add_argument("--angles", type=_floats, default=s, help="comma-separated angles")
    sp.add_argument("--out", default=s)
    if paths:
        sp.add_argument("--dt", type=float, default=s)
        sp.add_argument("--steps", type=int, default=s)
        sp.add_argument("--T", type=float, default=s, help="horizon (capacity time)")
        sp.add_argument("--paths", type=int, default=s)
        sp.add_argument("--seed", type=int, default=s)
        sp.add_argument("--threads", type=int, default=s)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sle", description="Multiradial SLE sampling and verification")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("sample", help="sample driving functions to CSV")
    _common(sp)
    sp.add_argument("--model", choices=("auto", "radial", "rho", "multiradial"), default="auto")

    tp = sub.add_parser("trace", help="trace curves of a driving CSV")
    tp.add_argument("--in", dest="src", required=True)
    tp.add_argument("--out", required=True)
    tp.add_argument("--stride", type=int, default=16)
    tp.add_argument("--coarsen", type=int, default=1)

    pp = sub.add_parser("partition", help="evaluate partition functions")
    psub = pp.add_subparsers(dest="action", required=True)
    ev = psub.add_parser("eval")
    ev.add_argument("--fn", required=True, choices=("z_multiradial", "z_radial_rho", "z_fusion", "z_multiradial_at"))
    _common(ev, paths=False)
    ev.add_argument("--target", type=float)
    ev.add_argument("--z", type=_floats)

    vp = sub.add_parser("verify", help="run one verification check")
    vsub = vp.add_subparsers(dest="kind", required=True)
    for kind in VERIFY_KINDS:
        k = vsub.add_parser(kind)
        _common(k)
        s = argparse.SUPPRESS
        k.add_argument("--tolerance", type=float, default=s)
        if kind == "bessel":
            k.add_argument("--alpha", type=float, default=s)
            k.add_argument("--x0", type=float, default=s)
        if kind in ("bessel", "fusion"):
            k.add_argument("--epsilons", type=_floats, default=s)
        if kind == "fusion":
            k.add_argument("--n", type=int, default=s)
        if kind == "transience":
            k.add_argument("--horizon", type=int, default=s)
    for parent in (sub, vsub):
        su = parent.add_parser("suite", help="run the acceptance suite")
        su.add_argument("--preset", default="desk")
        su.add_argument("--seed", type=int, default=0)
        su.add_argument("--out")
        su.add_argument("--only", type=lambda t: [int(v) for v in t.split(",")], default=None,
                        help="comma-separated criterion numbers")
        su.add_argument("--threads", type=int, default=None)
    return ap


_CONFIG_KEYS = set(ExperimentConfig.model_fields)


def _merged_config(args: argparse.Namespace, command: str) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        data = load_config(args.config).model_dump(exclude_unset=True)
    for key, val in vars(args).items():
        if key in _CONFIG_KEYS:
            data[key] = val
    data["command"] = command
    return validate_config(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "suite" or getattr(args, "kind", None) == "suite":
            workers = worker_count(args.threads)
            with path_mapper(workers) as mapper:
                return cmd_suite(args.preset, args.seed, args.out, args.only, mapper, workers)
        if args.cmd == "trace":
            cfg = validate_config({"command": "trace", "out": args.out})
            return cmd_trace(cfg, args.src, args.stride, args.coarsen)
        if args.cmd == "partition":
            cfg = _merged_config(args, "partition eval")
            return cmd_partition(args.fn, cfg, args.target, args.z)
        if args.cmd == "sample":
            cfg = _merged_config(args, "sample")
            return cmd_sample(cfg, args.model)
        cfg = _merged_config(args, f"verify {args.kind}")
        with path_mapper(worker_count(cfg.threads)) as mapper:
            return cmd_verify(args.kind, cfg, mapper)
    except (ConfigError, DomainError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SleError as err:
        print(f"numeric error ({type(err).__name__}): {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
