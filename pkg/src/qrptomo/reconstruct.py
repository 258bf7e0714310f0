"""State estimation: linear inversion, Bayesian mean estimation and
bootstrap error bars."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import fock
from .design import AffineMap, condition_number, pseudoinverse
from .dynamics import MeasurementRecord
from .exceptions import ConvergenceError, RankDeficiencyError


@dataclass
class LinearEstimate:
    Y_est: np.ndarray
    rho_LS: np.ndarray
    min_eigenvalue: float
    kappa: float


def linear_invert(beta: AffineMap, X, rcond: float = 1e-12) -> LinearEstimate:
    """``Y = M^-1 (X - V)`` (left pseudoinverse when there are extra observables).

    ``rho_LS`` is Hermitian with unit trace but need not be positive.
    """
    X = np.asarray(X, dtype=float)
    if X.shape != (beta.n_obs,):
        raise ValueError(f"expected {beta.n_obs} observables, got shape {X.shape}")
    kappa = condition_number(beta.M)
    if not kappa < 1 / rcond:
        raise RankDeficiencyError(f"map is too ill-conditioned to invert (kappa={kappa:.3g})", kappa)
    if beta.n_obs == beta.M.shape[1]:
        Y = np.linalg.solve(beta.M, X - beta.V)
    else:
        Y = pseudoinverse(beta.M, rcond) @ (X - beta.V)
    rho = fock.hermitize(fock.build_parametrization(beta.dim).state_of(Y))
    return LinearEstimate(Y, rho, float(np.linalg.eigvalsh(rho)[0]), kappa)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    idx = np.arange(1, len(v) + 1)
    r = idx[u - css / idx > 0][-1]
    return np.maximum(v - css[r - 1] / r, 0.0)


def project_to_density(rho: np.ndarray) -> np.ndarray:
    """Closest density matrix in Frobenius norm."""
    w, v = np.linalg.eigh(fock.hermitize(np.asarray(rho, dtype=complex)))
    return (v * project_to_simplex(w)) @ v.conj().T


@dataclass(frozen=True)
class McmcConfig:
    """Sampler knobs.

    ``sigma`` overrides the width derived from ``N_effective``;
    ``sigma_mode`` says whether ``1/N`` is the standard deviation (``"std"``)
    or the variance (``"variance"``) of the pseudo-likelihood.
    """

    n_samples: int = 2**10
    thinning: int = 2**7
    sigma: float | None = None
    sigma_mode: str = "std"
    seed: int = 0
    n_chains: int = 8
    burn_fraction: float = 0.25
    target_acceptance: float = 0.3

    def __post_init__(self):
        if self.n_samples < 1 or self.thinning < 1 or self.n_chains < 1:
            raise ValueError("sample counts must be positive")
        if self.sigma_mode not in ("std", "variance"):
            raise ValueError("sigma_mode must be 'std' or 'variance'")
        if not 0 <= self.burn_fraction < 1:
            raise ValueError("burn_fraction must lie in [0, 1)")

    def width(self, n_effective: float) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        return 1 / n_effective if self.sigma_mode == "std" else 1 / math.sqrt(n_effective)


@dataclass
class BayesResult:
    rho: np.ndarray
    acceptance_rate: float
    step: float
    n_samples: int
    sigma: float


def _rho_of(G):
    rho = G @ np.conj(np.swapaxes(G, -1, -2))
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[..., None, None]


def bayesian_mean(rho_LS: np.ndarray, N_effective: float, cfg: McmcConfig = McmcConfig()) -> BayesResult:
    """Posterior mean under a Hilbert-Schmidt prior and Gaussian pseudo-likelihood.

    The posterior is ``prior(rho) exp(-||rho - rho_LS||_F^2 / (2 sigma^2))``
    with ``rho = G G^+ / tr(G G^+)`` and ``G`` a complex Ginibre matrix.
    Sampling uses preconditioned Crank-Nicolson proposals
    ``G' = sqrt(1 - b^2) G + b xi``, which leave the prior invariant, so the
    acceptance ratio is the likelihood ratio. ``b`` is adapted during
    burn-in toward ``cfg.target_acceptance``.
    """
    rho_LS = fock.hermitize(np.asarray(rho_LS, dtype=complex))
    if abs(np.trace(rho_LS) - 1) > 1e-8:
        raise ValueError("rho_LS must have unit trace")
    D = rho_LS.shape[0]
    sigma = cfg.width(N_effective)
    inv2s2 = 1 / (2 * sigma**2)
    rng = np.random.default_rng(cfg.seed)
    C = cfg.n_chains

    # start every chain at the closest physical state, kept full rank
    w, v = np.linalg.eigh(project_to_density(rho_LS))
    w = np.maximum(w, 1e-3 * sigma)
    G0 = (v * np.sqrt(w / w.sum())) * math.sqrt(2.0) * D
    G = np.repeat(G0[None], C, axis=0)

    def loglik(G):
        diff = _rho_of(G) - rho_LS
        return -inv2s2 * np.sum(np.abs(diff) ** 2, axis=(-2, -1))

    ll = loglik(G)
    per_chain = math.ceil(cfg.n_samples / C)
    sampling_steps = per_chain * cfg.thinning
    burn = math.ceil(sampling_steps * cfg.burn_fraction / (1 - cfg.burn_fraction))
    log_b = math.log(min(0.5, 10 * sigma))

    def step(G, ll, b):
        xi = rng.standard_normal((C, D, D)) + 1j * rng.standard_normal((C, D, D))
        prop = math.sqrt(1 - b * b) * G + b * xi
        llp = loglik(prop)
        accept = np.log(rng.uniform(size=C)) < llp - ll
        G = np.where(accept[:, None, None], prop, G)
        ll = np.where(accept, llp, ll)
        return G, ll, accept

    for t in range(burn):
        G, ll, acc = step(G, ll, math.exp(log_b))
        gain = 1.0 / math.sqrt(t + 1)
        log_b = min(math.log(0.999), log_b + gain * (acc.mean() - cfg.target_acceptance))

    b = math.exp(log_b)
    total = np.zeros((D, D), dtype=complex)
    kept = 0
    n_acc = 0
    for t in range(sampling_steps):
        G, ll, acc = step(G, ll, b)
        n_acc += int(acc.sum())
        if (t + 1) % cfg.thinning == 0:
            total += _rho_of(G).sum(axis=0)
            kept += C
    rate = n_acc / (sampling_steps * C)
    if not 0.05 <= rate <= 0.8:
        raise ConvergenceError(f"MCMC acceptance rate {rate:.3f} outside [0.05, 0.8]")
    mean = fock.hermitize(total / kept)
    mean = _clip_eigenvalues(mean, -1e-12)
    return BayesResult(mean, rate, b, kept, sigma)


def _clip_eigenvalues(rho, floor):
    w, v = np.linalg.eigh(rho)
    if w[0] >= floor:
        return rho
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.conj().T
    return out / np.trace(out).real


def reconstruct_state(beta: AffineMap, X, cfg: McmcConfig = McmcConfig(), shots: int = 1000):
    """Linear inversion followed by Bayesian mean estimation.

    The pseudo-likelihood width uses ``N = shots * (D^2 - 1)``.
    Returns ``(rho_BME, LinearEstimate, BayesResult)``.
    """
    lin = linear_invert(beta, X)
    N = shots * (beta.dim**2 - 1)
    res = bayesian_mean(lin.rho_LS, N, cfg)
    return res.rho, lin, res


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------

STATISTICS: dict[str, Callable[[np.ndarray], float]] = {
    "mean": lambda x: float(np.mean(x)),
    "first": lambda x: float(x[0]),
}


def _flatten(records) -> list[MeasurementRecord]:
    out = []
    for r in records:
        if isinstance(r, MeasurementRecord):
            out.append(r)
        else:
            out.extend(_flatten(r))
    return out


def resample_estimates(records: Sequence[MeasurementRecord], B: int, seed: int = 0) -> np.ndarray:
    """``(B, n_records)`` resampled shot averages.

    Resampling the per-shot outcomes of a record with replacement draws the
    excited count from ``Binomial(shots, count / shots)``.
    """
    recs = _flatten(records)
    shots = np.array([r.shots for r in recs])
    counts = np.array([r.count if r.count >= 0 else round((r.estimate + 1) / 2 * r.shots) for r in recs])
    p = counts / shots
    rng = np.random.default_rng(seed)
    draws = rng.binomial(shots[None, :], p[None, :], size=(B, len(recs)))
    return 2 * draws / shots[None, :] - 1


def bootstrap(records, B: int = 200, statistic="mean", seed: int = 0, return_samples: bool = False):
    """Bootstrap mean and standard error of ``statistic``.

    ``statistic`` is a name from :data:`STATISTICS` or a callable that maps
    the flat array of resampled record estimates to a number.
    """
    if B < 100:
        raise ValueError("bootstrap needs B >= 100 resamples")
    fn = STATISTICS[statistic] if isinstance(statistic, str) else statistic
    samples = np.array([fn(x) for x in resample_estimates(records, B, seed)])
    mean, se = float(np.mean(samples)), float(np.std(samples, ddof=1))
    if return_samples:
        return mean, se, samples
    return mean, se
