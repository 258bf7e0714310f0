"""Command-line entry point: ``qrptomo <command> --config FILE --out DIR``.

Commands mirror the result units of the method: ``optimize`` (displacement
sets), ``learn`` (map errors across dimensions), ``reconstruct`` (kitten
fidelities) and ``observable-errors`` (per-observable square errors).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from .exceptions import ConfigError, QrpError

log = logging.getLogger("qrptomo")

COMMANDS = ("optimize", "learn", "reconstruct", "observable-errors")

# every accepted key with its default; nested mappings accept only the listed keys
DEFAULTS = {
    "D": None,
    "shots": 1000,
    "noise": True,
    "idealized": False,
    "ideal_displacement": False,
    "readout": {"p_e_given_g": 0.02, "p_g_given_e": 0.02},
    "degrade": None,
    "device": {},
    "timing": {},
    "displacements": "default",
    "optimizer": {"iters": 500, "restarts": 16, "step": 0.05, "radius": None},
    "nu": "holdout",
    "seed": 0,
    "test_seed": None,
    "bootstrap": 200,
    "mcmc": {"n_samples": 1024, "thinning": 128, "sigma_mode": "std", "n_chains": 8},
    "kitten_alpha": 1.0,
    "perturbation": {"chi_rel": 0.02, "higher_order_rel": 0.5},
    "out": None,
}


def _fail(key, msg):
    raise ConfigError(f"config field '{key}': {msg}")


def _check_mapping(key, value, allowed):
    if not isinstance(value, dict):
        _fail(key, "expected a mapping")
    unknown = set(value) - set(allowed)
    if unknown:
        _fail(key, f"unknown key(s) {sorted(unknown)}")


def _as_int(key, v, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(key, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        _fail(key, f"must be >= {minimum}")
    return v


def _as_float(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(key, f"expected a number, got {v!r}")
    return float(v)


def _as_bool(key, v):
    if not isinstance(v, bool):
        _fail(key, f"expected true/false, got {v!r}")
    return v


def validate_config(raw: dict | None, command: str) -> dict:
    """Fill defaults and check every field; unknown keys are rejected."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    cfg = {}
    for key, default in DEFAULTS.items():
        v = raw.get(key, default)
        if isinstance(default, dict) and key in raw:
            _check_mapping(key, v, default if default else _device_fields(key))
            v = {**default, **v}
        cfg[key] = v

    if cfg["D"] is None:
        if command in ("learn",):
            cfg["D"] = [2, 3, 4]
        elif command in ("reconstruct", "observable-errors"):
            cfg["D"] = 6
        else:
            _fail("D", "missing (required)")
    Ds = cfg["D"] if isinstance(cfg["D"], list) else [cfg["D"]]
    if not Ds:
        _fail("D", "empty list")
    for d in Ds:
        _as_int("D", d, 2)
    if command in ("reconstruct", "observable-errors") and len(Ds) != 1:
        _fail("D", f"'{command}' takes a single dimension")
    cfg["D"] = Ds

    if cfg["shots"] is not None:
        _as_int("shots", cfg["shots"], 1)
    for key in ("noise", "idealized", "ideal_displacement"):
        _as_bool(key, cfg[key])
    for k in ("p_e_given_g", "p_g_given_e"):
        p = _as_float(f"readout.{k}", cfg["readout"][k])
        if not 0 <= p <= 1:
            _fail(f"readout.{k}", "must lie in [0, 1]")
    if cfg["degrade"] is not None and _as_float("degrade", cfg["degrade"]) < 0:
        _fail("degrade", "must be >= 0")
    for k, v in cfg["device"].items():
        _as_float(f"device.{k}", v)
    for k, v in cfg["timing"].items():
        _as_float(f"timing.{k}", v)
    d = cfg["displacements"]
    if not isinstance(d, str):
        _fail("displacements", "expected 'default', 'optimize' or a path")
    if d not in ("default", "optimize") and "{D}" not in d and not Path(d).exists():
        _fail("displacements", f"file not found: {d}")
    opt = cfg["optimizer"]
    _as_int("optimizer.iters", opt["iters"], 0)
    _as_int("optimizer.restarts", opt["restarts"], 1)
    _as_float("optimizer.step", opt["step"])
    if opt["radius"] is not None and _as_float("optimizer.radius", opt["radius"]) <= 0:
        _fail("optimizer.radius", "must be > 0")
    if cfg["nu"] not in ("holdout", "cv") and _as_float("nu", cfg["nu"]) < 0:
        _fail("nu", "must be 'holdout', 'cv' or a number >= 0")
    _as_int("seed", cfg["seed"], 0)
    if cfg["test_seed"] is not None:
        _as_int("test_seed", cfg["test_seed"], 0)
    b = _as_int("bootstrap", cfg["bootstrap"], 0)
    if 0 < b < 100:
        _fail("bootstrap", "use 0 (off) or at least 100 resamples")
    m = cfg["mcmc"]
    _as_int("mcmc.n_samples", m["n_samples"], 1)
    _as_int("mcmc.thinning", m["thinning"], 1)
    _as_int("mcmc.n_chains", m["n_chains"], 1)
    if m["sigma_mode"] not in ("std", "variance"):
        _fail("mcmc.sigma_mode", "must be 'std' or 'variance'")
    _as_float("kitten_alpha", cfg["kitten_alpha"])
    _as_float("perturbation.chi_rel", cfg["perturbation"]["chi_rel"])
    _as_float("perturbation.higher_order_rel", cfg["perturbation"]["higher_order_rel"])
    return cfg


def _device_fields(key):
    import dataclasses

    from . import dynamics as dyn

    cls = dyn.DeviceParams if key == "device" else dyn.SequenceTiming
    return [f.name for f in dataclasses.fields(cls)]


def config_hash(cfg: dict) -> str:
    """Short SHA-256 of the validated config (the output directory excluded)."""
    body = {k: v for k, v in cfg.items() if k != "out"}
    blob = json.dumps(body, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path, command: str, seed_override=None, out_override=None) -> dict:
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from None
    cfg = validate_config(raw, command)
    if seed_override is not None:
        cfg["seed"] = _as_int("seed", seed_override, 0)
    if out_override is not None:
        cfg["out"] = str(out_override)
    if cfg["out"] is None:
        cfg["out"] = "results"
    return cfg


def _limit_threads(n):
    # must run before numpy loads a BLAS
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrptomo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="YAML experiment config")
        s.add_argument("--out", type=Path, help="output directory (overrides config)")
        s.add_argument("--seed", type=int, help="base seed (overrides config)")
        s.add_argument("--threads", type=int, help="BLAS threads")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        _limit_threads(args.threads)
    try:
        cfg = load_config(args.config, args.command, args.seed, args.out)
        from . import runner

        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        runner.RUNNERS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QrpError, ArithmeticError, ValueError) as exc:  # LinAlgError is a ValueError
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
