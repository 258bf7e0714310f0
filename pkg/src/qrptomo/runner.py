"""Command implementations behind :mod:`qrptomo.cli`.

Every output embeds the config hash and seed: CSV files start with a
``#``-comment line, JSON files carry a ``run`` object.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from . import design, experiments, fock, learn
from . import dynamics as dyn
from . import reconstruct as rc
from .cli import config_hash
from .exceptions import ConfigError

log = logging.getLogger("qrptomo")


# ---------------------------------------------------------------------------
# config -> objects
# ---------------------------------------------------------------------------

def device_of(cfg) -> dyn.DeviceParams:
    return dyn.DeviceParams.from_mapping(cfg["device"])


def settings_of(cfg) -> learn.AcquisitionSettings:
    degrade = learn.DEFAULT_DEGRADE_STRENGTH if cfg["degrade"] is None else float(cfg["degrade"])
    timing = dyn.SequenceTiming(**{k: float(v) for k, v in cfg["timing"].items()})
    return learn.AcquisitionSettings(
        noise=cfg["noise"], idealized=cfg["idealized"], ideal_displacement=cfg["ideal_displacement"],
        shots=cfg["shots"], readout=dyn.ReadoutErrorModel(**cfg["readout"]), degrade=degrade,
        timing=timing)


def mcmc_of(cfg, seed) -> rc.McmcConfig:
    return rc.McmcConfig(seed=seed, **cfg["mcmc"])


def optimize(cfg, D: int) -> design.OptimizationResult:
    o = cfg["optimizer"]
    return design.optimize_displacements(D, iters=o["iters"], restarts=o["restarts"], step=o["step"],
                                         seed=cfg["seed"], radius=o["radius"])


def displacements_for(cfg, D: int) -> design.DisplacementSet:
    src = cfg["displacements"]
    if src == "default":
        try:
            return design.default_displacements(D)
        except ValueError as exc:
            raise ConfigError(f"config field 'displacements': {exc}; use 'optimize' or a path") from None
    if src == "optimize":
        return optimize(cfg, D).displacements
    path = Path(src.replace("{D}", str(D)))
    try:
        ds = design.DisplacementSet.load(path)
    except OSError as exc:
        raise ConfigError(f"config field 'displacements': {exc}") from None
    if ds.dim != D:
        raise ConfigError(f"config field 'displacements': {path} holds a D={ds.dim} set, need D={D}")
    return ds


def held_out_seed(cfg) -> int:
    return cfg["seed"] + 1 if cfg["test_seed"] is None else cfg["test_seed"]


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def provenance(cfg, command: str) -> dict:
    return {"command": command, "config_hash": config_hash(cfg), "seed": cfg["seed"],
            "test_seed": held_out_seed(cfg)}


def write_csv(path: Path, header, rows, cfg, command):
    p = provenance(cfg, command)
    with open(path, "w", newline="") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in p.items()) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    log.info("wrote %s", path)


def write_json(path: Path, obj: dict, cfg, command):
    with open(path, "w") as fh:
        json.dump({**obj, "run": provenance(cfg, command)}, fh, indent=1, sort_keys=True)
    log.info("wrote %s", path)


def read_csv(path) -> list[dict]:
    """Rows of a CSV written by this module (provenance comment skipped)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_optimize(cfg, out: Path):
    for D in cfg["D"]:
        res = optimize(cfg, D)
        obj = res.displacements.to_json()
        obj["settings"] = {**cfg["optimizer"], "seed": cfg["seed"]}
        obj["best_restart"] = res.best_restart
        write_json(out / f"displacements_D{D}.json", obj, cfg, "optimize")
        write_csv(out / f"kappa_trajectory_D{D}.csv", ["step", "kappa"], enumerate(res.trajectory),
                  cfg, "optimize")
        log.info("D=%d kappa=%.4f", D, res.kappa)


def run_learn(cfg, out: Path):
    device, settings = device_of(cfg), settings_of(cfg)
    rows = []
    for D in cfg["D"]:
        ds = displacements_for(cfg, D)
        st = experiments.learn_map(D, ds.alphas, device, settings, cfg["seed"], cfg["nu"],
                                   cfg["bootstrap"] or 100)
        rows.append([D, st.mse, st.stderr, st.nu, design.condition_number(st.beta_I.M),
                     design.condition_number(st.beta_L.M)])
        write_json(out / f"beta_I_D{D}.json", st.beta_I.to_json(), cfg, "learn")
        write_json(out / f"beta_L_D{D}.json", st.beta_L.to_json(), cfg, "learn")
        scatter = [[i, j, st.beta_I.beta[i, j], st.beta_L.beta[i, j]]
                   for i in range(st.beta_I.beta.shape[0]) for j in range(st.beta_I.beta.shape[1])]
        write_csv(out / f"beta_scatter_D{D}.csv", ["row", "col", "beta_I", "beta_L"], scatter, cfg, "learn")
        st.training.meta["run"] = provenance(cfg, "learn")
        st.training.write(out / f"training_D{D}.csv", out / f"training_D{D}.json")
        log.info("D=%d map_mse=%.3g +- %.2g (nu=%g)", D, st.mse, st.stderr, st.nu)
    write_csv(out / "map_mse.csv", ["D", "mse", "stderr", "nu", "kappa_idealised", "kappa_learnt"],
              rows, cfg, "learn")
    return rows


def _single_study(cfg):
    (D,) = cfg["D"]
    device, settings = device_of(cfg), settings_of(cfg)
    ds = displacements_for(cfg, D)
    st = experiments.learn_map(D, ds.alphas, device, settings, cfg["seed"], cfg["nu"], 100)
    results = experiments.measure_test_states(st, device, settings, held_out_seed(cfg), cfg["kitten_alpha"])
    return st, device, settings, results


def run_reconstruct(cfg, out: Path):
    st, device, settings, results = _single_study(cfg)
    pert = cfg["perturbation"]
    sim = experiments.simulated_band(st.D, st.alphas, device, settings, pert["chi_rel"],
                                     pert["higher_order_rel"], cfg["seed"], cfg["nu"])
    experiments.reconstruction_study(st, results, sim, mcmc_of(cfg, cfg["seed"]), settings.shots or 1000,
                                     cfg["bootstrap"], cfg["seed"])
    rows, dumps = [], {}
    for r in results:
        for mode in ("idealised", "learnt", "simulated"):
            lo, hi = r.band if mode == "simulated" else (np.nan, np.nan)
            rows.append([r.name, mode, r.fidelity[mode], r.stderr.get(mode, np.nan), lo, hi])
        dumps[r.name] = {"target": fock.matrix_to_json(r.target),
                         **{m: fock.matrix_to_json(rho) for m, rho in r.rho.items()}}
    write_csv(out / "fidelities.csv", ["state", "map", "fidelity", "stderr", "band_min", "band_max"],
              rows, cfg, "reconstruct")
    write_json(out / "density_matrices.json", {"D": st.D, "states": dumps}, cfg, "reconstruct")
    write_json(out / "reconstruction_reports.json",
               {"reports": [rep for r in results for rep in r.reports.values()]}, cfg, "reconstruct")
    return results


def run_observable_errors(cfg, out: Path):
    st, device, settings, results = _single_study(cfg)
    experiments.observable_study(st, results, cfg["bootstrap"] or 100, cfg["seed"])
    order = np.argsort(np.abs(st.alphas), kind="stable")
    rows, summary = [], []
    for r in results:
        for k in order:
            a = st.alphas[k]
            rows.append([r.name, int(k), a.real, a.imag, abs(a), r.obs_errors["idealised"][k],
                         r.obs_errors["learnt"][k]])
        rho_I = experiments.spearman(np.abs(st.alphas), r.obs_errors["idealised"])
        summary.append([r.name, np.mean(r.obs_errors["idealised"]), r.obs_mse_stderr["idealised"],
                        np.mean(r.obs_errors["learnt"]), r.obs_mse_stderr["learnt"], rho_I])
    write_csv(out / "observable_errors.csv",
              ["state", "k", "alpha_re", "alpha_im", "abs_alpha", "sq_err_idealised", "sq_err_learnt"],
              rows, cfg, "observable-errors")
    write_csv(out / "observable_summary.csv",
              ["state", "mse_idealised", "stderr_idealised", "mse_learnt", "stderr_learnt",
               "spearman_idealised_vs_abs_alpha"], summary, cfg, "observable-errors")
    return results


RUNNERS = {
    "optimize": run_optimize,
    "learn": run_learn,
    "reconstruct": run_reconstruct,
    "observable-errors": run_observable_errors,
}
