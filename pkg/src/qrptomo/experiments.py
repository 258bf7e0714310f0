"""End-to-end studies built from the library pieces: map learning across
dimensions, kitten-state reconstruction and per-observable errors.

These are shared by the command-line interface and the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import design, fock, learn
from . import dynamics as dyn
from . import reconstruct as rc
from .exceptions import RankDeficiencyError

# Cheaper sampler used inside bootstrap loops.
BOOTSTRAP_MCMC = rc.McmcConfig(n_samples=64, thinning=32)


HOLDOUT_NU_GRID = (0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1)
NU_POLICIES = ("holdout", "cv")


@dataclass
class ValidationSet:
    """Known states outside the training family, measured like the training set."""

    states: list
    X: np.ndarray


def acquire_validation_set(D: int, alphas, device: dyn.DeviceParams, settings: learn.AcquisitionSettings,
                           seed: int, operators=None, n: int | None = None) -> ValidationSet:
    """``n`` (default ``2 D^2``) random pure states, prepared and measured with fresh seeds."""
    n = 2 * D * D if n is None else n
    rng = np.random.default_rng([seed, 7])
    states = learn.prepare([fock.random_density_matrix(D, rng, rank=1) for _ in range(n)], device, settings)
    X, _ = learn.measure_states(states, alphas, device, settings, seed + 7919, operators)
    return ValidationSet(states, X)


def holdout_scores(ts: learn.TrainingSet, val: ValidationSet, grid=HOLDOUT_NU_GRID) -> dict:
    """Mean fidelity of eigenvalue-clipped linear inversions of the validation states, per ``nu``."""
    scores = {}
    for nu in grid:
        beta = learn.ridge_fit(ts, nu)
        try:
            F = [fock.fidelity(rc._clip_eigenvalues(rc.linear_invert(beta, x).rho_LS, 0.0), rho)
                 for x, rho in zip(val.X, val.states)]
        except RankDeficiencyError:
            F = [-np.inf]
        scores[float(nu)] = float(np.mean(F))
    return scores


def select_nu_holdout(ts: learn.TrainingSet, val: ValidationSet, grid=HOLDOUT_NU_GRID, tol: float = 1e-9) -> float:
    """Ridge parameter maximising hold-out reconstruction fidelity; near-ties go to smaller ``nu``.

    Unlike k-fold CV this stays informative when ``N_tr = D^2``, where every
    fold leaves the regression underdetermined.
    """
    scores = holdout_scores(ts, val, sorted(grid))
    best = max(scores.values())
    return min(nu for nu, s in scores.items() if s >= best - tol)


def fit_learnt_map(ts: learn.TrainingSet, nu_policy="holdout", validation: ValidationSet | None = None,
                   seed: int = 0):
    """Ridge fit with ``nu`` fixed, chosen on a validation set (``"holdout"``) or by k-fold CV (``"cv"``)."""
    if nu_policy == "holdout":
        if validation is None:
            raise ValueError("nu_policy='holdout' needs a validation set")
        nu = select_nu_holdout(ts, validation)
    elif nu_policy == "cv":
        nu = learn.select_nu(ts, seed=seed)
    else:
        nu = float(nu_policy)
    return learn.ridge_fit(ts, nu), nu


@dataclass
class MapStudy:
    D: int
    alphas: np.ndarray
    beta_I: design.AffineMap
    beta_L: design.AffineMap
    training: learn.TrainingSet
    nu: float
    mse: float
    stderr: float
    operators: np.ndarray = field(repr=False, default=None)


def learn_map(D: int, alphas, device: dyn.DeviceParams = dyn.DeviceParams(),
              settings: learn.AcquisitionSettings = learn.AcquisitionSettings(), seed: int = 0,
              nu_policy="holdout", B: int = 200) -> MapStudy:
    """Learn ``beta_L`` for one dimension and compare it with ``beta_I``.

    The standard error of ``map_mse`` comes from refitting ``beta_L`` on
    shot-resampled training data (``B`` resamples; skipped on the
    expectation-value path, where it is 0). ``nu_policy`` is a number,
    ``"holdout"`` or ``"cv"``; the resampled fits reuse the selected ``nu``.
    """
    alphas = np.asarray(alphas, dtype=complex)
    ops = learn.observable_operators(D, alphas, device, settings)
    ts = learn.acquire_training_set(D, alphas, device, settings, seed, ops)
    val = None
    if nu_policy == "holdout":
        val = acquire_validation_set(D, alphas, device, settings, seed, ops)
    beta_L, nu = fit_learnt_map(ts, nu_policy, val, seed)
    beta_I = design.build_idealised_map(alphas, D)
    mse = learn.map_mse(beta_I, beta_L)
    se = 0.0
    if ts.records:
        draws = rc.resample_estimates(ts.records, B, seed).reshape(B, ts.n, -1)
        boot = [learn.map_mse(beta_I, learn.ridge_beta(ts.Y, x, nu)) for x in draws]
        se = float(np.std(boot, ddof=1))
    return MapStudy(D, alphas, beta_I, beta_L, ts, nu, mse, se, ops)


@dataclass
class StateResult:
    name: str
    target: np.ndarray
    X: np.ndarray
    records: list
    fidelity: dict = field(default_factory=dict)  # mode -> fidelity
    stderr: dict = field(default_factory=dict)
    band: tuple = (np.nan, np.nan)
    rho: dict = field(default_factory=dict)
    obs_errors: dict = field(default_factory=dict)  # mode -> per-observable squared errors
    obs_mse_stderr: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)  # mode -> reconstruction report


def _report(name, mode, fid, lin, res, seed) -> dict:
    return {"target_id": name, "map_provenance": mode, "fidelity": fid, "min_eig_LS": lin.min_eigenvalue,
            "n_samples": res.n_samples, "acceptance_rate": res.acceptance_rate, "seed": seed}


def kitten_targets(D: int, device: dyn.DeviceParams, settings: learn.AcquisitionSettings,
                   alpha: complex = 1.0) -> dict:
    """Prepared (degraded) kitten states, the out-of-training test suite."""
    kittens = learn.kitten_states(D, alpha)
    prepared = learn.prepare(list(kittens.values()), device, settings)
    return dict(zip(kittens, prepared))


def measure_test_states(study: MapStudy, device: dyn.DeviceParams, settings: learn.AcquisitionSettings,
                        seed: int, alpha: complex = 1.0) -> list[StateResult]:
    targets = kitten_targets(study.D, device, settings, alpha)
    X, records = learn.measure_states(list(targets.values()), study.alphas, device, settings, seed,
                                      study.operators, state_ids=list(targets))
    n_obs = len(study.alphas)
    out = []
    for i, (name, rho) in enumerate(targets.items()):
        out.append(StateResult(name, rho, X[i], records[i * n_obs:(i + 1) * n_obs]))
    return out


def observable_study(study: MapStudy, results: list[StateResult], B: int = 200, seed: int = 0):
    """Per-observable squared errors of both maps, with bootstrap stderr of their means."""
    par = fock.build_parametrization(study.D)
    for r in results:
        Y = par.param_of(r.target)
        for mode, beta in (("idealised", study.beta_I), ("learnt", study.beta_L)):
            r.obs_errors[mode] = learn.observable_errors(r.X, beta, Y)
            if r.records:
                draws = rc.resample_estimates(r.records, B, seed)
                boot = [learn.observable_mse(x, beta, Y) for x in draws]
                r.obs_mse_stderr[mode] = float(np.std(boot, ddof=1))
            else:
                r.obs_mse_stderr[mode] = 0.0
    return results


def reconstruction_study(study: MapStudy, results: list[StateResult], sim_maps=(),
                         mcmc: rc.McmcConfig = rc.McmcConfig(), shots: int = 1000, B: int = 0,
                         seed: int = 0, boot_mcmc: rc.McmcConfig = BOOTSTRAP_MCMC):
    """Fidelity of the reconstructed test states under each map.

    ``sim_maps`` is a sequence of simulated maps whose fidelities form the
    band ``(min, max)``. With ``B > 0`` the idealised and learnt fidelities
    get bootstrap standard errors from shot-resampled test data, each
    resample reconstructed with the cheaper ``boot_mcmc`` sampler.
    """
    maps = {"idealised": study.beta_I, "learnt": study.beta_L}
    for r in results:
        for mode, beta in maps.items():
            rho, lin, res = rc.reconstruct_state(beta, r.X, mcmc, shots)
            r.rho[mode] = rho
            r.fidelity[mode] = fock.fidelity(rho, r.target)
            r.reports[mode] = _report(r.name, mode, r.fidelity[mode], lin, res, mcmc.seed)
            r.stderr[mode] = 0.0
            if B and r.records:
                draws = rc.resample_estimates(r.records, B, seed)
                fids = [fock.fidelity(rc.reconstruct_state(beta, x, boot_mcmc, shots)[0], r.target)
                        for x in draws]
                r.stderr[mode] = float(np.std(fids, ddof=1))
        band = []
        for i, m in enumerate(sim_maps):
            rho, lin, res = rc.reconstruct_state(m, r.X, mcmc, shots)
            band.append(fock.fidelity(rho, r.target))
            if i == 0:  # unperturbed model
                r.rho["simulated"] = rho
                r.fidelity["simulated"] = band[0]
                r.reports["simulated"] = _report(r.name, "simulated", band[0], lin, res, mcmc.seed)
        if band:
            r.band = (min(band), max(band))
    return results


def simulated_band(D: int, alphas, device: dyn.DeviceParams, settings: learn.AcquisitionSettings,
                   chi_rel: float = 0.02, higher_order_rel: float = 0.5, seed: int = 0, nu_policy="holdout"):
    """Simulated maps for the unperturbed model and every sign combination.

    The model data are noise-free, so a named ``nu_policy`` falls back to k-fold CV.
    """
    maps = []
    for c, h in learn.perturbation_combos(chi_rel, higher_order_rel):
        nu = None if nu_policy in NU_POLICIES else float(nu_policy)
        maps.append(learn.simulated_map(D, alphas, device, c, h, settings, seed, nu=nu))
    return maps


def spearman(x, y) -> float:
    from scipy.stats import spearmanr

    return float(spearmanr(x, y).statistic)
