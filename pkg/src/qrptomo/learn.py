"""Training data, ridge-regression map learning, error metrics and
process-map extraction."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import dynamics as dyn
from . import fock
from .design import AffineMap, DisplacementSet, pseudoinverse
from .exceptions import RankDeficiencyError

DEFAULT_NU_GRID = (0.0, 1e-8, 1e-6, 1e-4, 1e-2)
PREP_WINDOW = 2e-6
# Chosen so the mean fidelity of the degraded D=6 training states to their
# ideal kets is 0.970 with the default device (see calibrate_degrade_strength).
DEFAULT_DEGRADE_STRENGTH = 6.69


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def training_kets(D: int) -> list[np.ndarray]:
    if D < 2:
        raise ValueError("D must be >= 2")
    kets = []
    for n in range(D):
        v = np.zeros(D, dtype=complex)
        v[n] = 1
        kets.append(v)
    for l, m in itertools.combinations(range(D), 2):
        for phase in (1, 1j):
            v = np.zeros(D, dtype=complex)
            v[l] = 1 / math.sqrt(2)
            v[m] = phase / math.sqrt(2)
            kets.append(v)
    return kets


def training_states(D: int) -> list[np.ndarray]:
    """Fock states, then ``(|l> + e^{i phi}|m>)/sqrt2`` for ``l < m``, ``phi`` in {0, pi/2}."""
    return [fock.ket2dm(v) for v in training_kets(D)]


def kitten_states(D: int, alpha: complex = 1.0) -> dict[str, np.ndarray]:
    return {v: fock.kitten_state(alpha, v, D) for v in fock.KITTEN_VARIANTS}


def _cavity_decay_generator(device: dyn.DeviceParams, D: int) -> np.ndarray:
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    a = fock.annihilation(D)
    eye = np.eye(D)
    rate = 1 / device.T_c1
    ada = a.conj().T @ a
    return rate * (np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))


def degrade_state(rho: np.ndarray, device: dyn.DeviceParams = dyn.DeviceParams(),
                  strength: float = DEFAULT_DEGRADE_STRENGTH, window: float = PREP_WINDOW) -> np.ndarray:
    """Imperfect preparation: cavity decay for ``strength * window`` seconds.

    With the qubit in ``|g>`` only the cavity-decay jump acts, so the
    channel is the exact exponential of its Liouvillian on ``D`` levels.
    """
    rho = np.asarray(rho, dtype=complex)
    if strength == 0 or math.isinf(device.T_c1):
        return rho.copy()
    if strength < 0:
        raise ValueError("strength must be >= 0")
    D = rho.shape[0]
    prop = expm(_cavity_decay_generator(device, D) * strength * window)
    return fock.hermitize((prop @ rho.ravel()).reshape(D, D))


def calibrate_degrade_strength(target: float = 0.97, D: int = 6,
                               device: dyn.DeviceParams = dyn.DeviceParams()) -> float:
    from scipy.optimize import brentq

    kets = training_kets(D)

    def gap(s):
        return np.mean([fock.fidelity(fock.ket2dm(k), degrade_state(fock.ket2dm(k), device, s))
                        for k in kets]) - target

    return float(brentq(gap, 0.0, 1000.0, xtol=1e-6))


# ---------------------------------------------------------------------------
# acquisition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AcquisitionSettings:
    """How observables are produced.

    ``shots=None`` selects the infinite-shot (expectation-value) path.
    ``idealized`` uses instantaneous perfect operations; ``noise`` toggles
    the decoherence channels.
    """

    noise: bool = True
    idealized: bool = False
    ideal_displacement: bool = False
    shots: int | None = 1000
    readout: dyn.ReadoutErrorModel = dyn.ReadoutErrorModel()
    degrade: float = DEFAULT_DEGRADE_STRENGTH
    timing: dyn.SequenceTiming = dyn.DEFAULT_TIMING

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    @classmethod
    def ideal(cls) -> "AcquisitionSettings":
        return cls(noise=False, idealized=True, shots=None,
                   readout=dyn.PERFECT_READOUT, degrade=0.0)


IDEAL = AcquisitionSettings.ideal()


@dataclass
class TrainingSet:
    dim: int
    Y: np.ndarray  # (N, D^2-1)
    X: np.ndarray  # (N, n_obs)
    provenance: str = "simulated-noisy"
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if self.Y.shape[1] != self.dim**2 - 1:
            raise ValueError(f"Y rows must have {self.dim**2 - 1} entries")
        if self.Y.shape[0] != self.X.shape[0]:
            raise ValueError("Y and X must have the same number of rows")
        if np.any(np.abs(self.X) > 1 + 1e-9):
            raise ValueError("observables must lie in [-1, 1]")

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    def subset(self, idx) -> "TrainingSet":
        return TrainingSet(self.dim, self.Y[idx], self.X[idx], self.provenance, [], dict(self.meta))

    def write(self, csv_path, sidecar_path=None) -> None:
        """One CSV row per ``(n, k)`` plus a JSON sidecar."""
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "k", "X"] + [f"Y{j}" for j in range(self.Y.shape[1])])
            for n in range(self.n):
                for k in range(self.X.shape[1]):
                    w.writerow([n, k, repr(float(self.X[n, k]))] + [repr(float(y)) for y in self.Y[n]])
        if sidecar_path is not None:
            with open(sidecar_path, "w") as fh:
                json.dump({"D": self.dim, "n_states": self.n, "n_obs": int(self.X.shape[1]),
                           "provenance": self.provenance, "ordering": "rows (n, k), n-major",
                           **self.meta}, fh, indent=1, default=str)

    @classmethod
    def read(cls, csv_path, sidecar_path) -> "TrainingSet":
        with open(sidecar_path) as fh:
            side = json.load(fh)
        D, N, nobs = side["D"], side["n_states"], side["n_obs"]
        Y = np.zeros((N, D * D - 1))
        X = np.zeros((N, nobs))
        with open(csv_path, newline="") as fh:
            for row in csv.DictReader(fh):
                n, k = int(row["n"]), int(row["k"])
                X[n, k] = float(row["X"])
                Y[n] = [float(row[f"Y{j}"]) for j in range(D * D - 1)]
        meta = {k: v for k, v in side.items() if k not in ("D", "n_states", "n_obs", "provenance", "ordering")}
        return cls(D, Y, X, side["provenance"], [], meta)


def observable_operators(D: int, alphas, device: dyn.DeviceParams, settings: AcquisitionSettings):
    return dyn.effective_observables(
        device, list(np.asarray(alphas).ravel()), D, noise=settings.noise,
        ideal_displacement=settings.ideal_displacement, idealized=settings.idealized,
        timing=settings.timing)


def measure_states(states: Sequence[np.ndarray], alphas, device: dyn.DeviceParams,
                   settings: AcquisitionSettings, seed: int = 0, operators=None,
                   state_ids=None):
    """Observables for each state; returns ``(X, records)``.

    ``records`` is empty on the expectation-value path. Each ``(state, k)``
    draw owns a child seed derived from ``(seed, state index, k)``.
    """
    alphas = np.asarray(alphas.alphas if isinstance(alphas, DisplacementSet) else alphas).ravel()
    D = states[0].shape[0]
    if operators is None:
        operators = observable_operators(D, alphas, device, settings)
    rhos = np.asarray(states)
    X_true = np.einsum("kij,nji->nk", operators, rhos).real
    X_true = np.clip(X_true, -1.0, 1.0)
    if settings.shots is None:
        return dyn.expected_observable(X_true, settings.readout), []
    ids = list(range(len(states))) if state_ids is None else list(state_ids)
    X = np.empty_like(X_true)
    records = []
    for n in range(X_true.shape[0]):
        for k in range(X_true.shape[1]):
            s = dyn.record_seed(seed, n, k)
            rec = dyn.sample_observable(X_true[n, k], settings.shots, settings.readout, s,
                                        k=k, state_id=ids[n], alpha=alphas[k])
            X[n, k] = rec.estimate
            records.append(rec)
    return X, records


def prepare(states: Sequence[np.ndarray], device: dyn.DeviceParams, settings: AcquisitionSettings):
    if settings.degrade == 0:
        return [np.asarray(s, dtype=complex) for s in states]
    return [degrade_state(s, device, settings.degrade) for s in states]


def acquire_training_set(D: int, alphas, device: dyn.DeviceParams = dyn.DeviceParams(),
                         settings: AcquisitionSettings = AcquisitionSettings(), seed: int = 0,
                         operators=None) -> TrainingSet:
    """Prepare (and degrade) the training states, then measure every observable.

    ``Y_n`` is read off the prepared (degraded) density matrix.
    """
    prepared = prepare(training_states(D), device, settings)
    X, records = measure_states(prepared, alphas, device, settings, seed, operators)
    Y = fock.build_parametrization(D).param_of(np.asarray(prepared))
    prov = "ideal" if settings.idealized and not settings.noise else "simulated-noisy"
    return TrainingSet(D, Y, X, prov, records,
                       {"seed": seed, "settings": settings.to_dict(), "device": device.to_dict()})


# ---------------------------------------------------------------------------
# ridge regression
# ---------------------------------------------------------------------------

def _design(Y) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return np.vstack([np.ones(Y.shape[0]), Y.T])  # (D^2, N)


def ridge_beta(Y, X, nu: float = 0.0) -> np.ndarray:
    """``X_mat Y_mat^T (Y_mat Y_mat^T + nu I)^-1`` with ``Y_mat`` rows ``[1; Y_n]``."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    Ym = _design(Y)
    Xm = np.atleast_2d(np.asarray(X, dtype=float)).T
    p, N = Ym.shape
    if nu == 0 and N < p:
        raise RankDeficiencyError(f"{N} training states cannot determine {p} map columns (need >= {p})")
    G = Ym @ Ym.T + nu * np.eye(p)
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] <= 1e-13 * s[0]:
        raise RankDeficiencyError("normal matrix is singular", math.inf if s[-1] == 0 else s[0] / s[-1])
    return np.linalg.solve(G, Ym @ Xm.T).T


def ridge_fit(ts: TrainingSet, nu: float = 0.0) -> AffineMap:
    beta = ridge_beta(ts.Y, ts.X, nu)
    return AffineMap.from_beta(beta, ts.dim, "learnt", {"nu": nu})


def _folds(n: int, k: int, seed: int):
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, min(k, n))


def cv_scores(ts: TrainingSet, grid=DEFAULT_NU_GRID, folds: int = 4, seed: int = 0) -> dict:
    """Mean held-out observable MSE per ``nu`` (``inf`` when a fold is singular)."""
    parts = _folds(ts.n, folds, seed)
    scores = {}
    for nu in grid:
        errs = []
        for test in parts:
            train = np.setdiff1d(np.arange(ts.n), test)
            try:
                beta = ridge_beta(ts.Y[train], ts.X[train], nu)
            except RankDeficiencyError:
                errs = [math.inf]
                break
            pred = _design(ts.Y[test]).T @ beta.T
            errs.append(np.mean((ts.X[test] - pred) ** 2))
        scores[float(nu)] = float(np.mean(errs))
    return scores


def select_nu(ts: TrainingSet, grid=DEFAULT_NU_GRID, folds: int = 4, seed: int = 0) -> float:
    """k-fold cross-validated choice of the ridge parameter; ties go to smaller ``nu``."""
    if len(grid) == 0:
        raise ValueError("empty nu grid")
    scores = cv_scores(ts, sorted(grid), folds, seed)
    best = min(scores.values())
    return min(nu for nu, s in scores.items() if s == best)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _beta(m) -> np.ndarray:
    return m.beta if isinstance(m, AffineMap) else np.asarray(m, dtype=float)


def map_mse(beta_a, beta_b) -> float:
    """Element-wise MSE ``sum (a - b)^2 / (D^2 (D^2 - 1))``."""
    a, b = _beta(beta_a), _beta(beta_b)
    if a.shape != b.shape:
        raise ValueError(f"map shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def observable_errors(X, beta, Y) -> np.ndarray:
    """Per-observable squared errors ``(X - beta [1; Y])_j^2``."""
    b = _beta(beta)
    pred = b @ np.concatenate([[1.0], np.asarray(Y, dtype=float)])
    return (np.asarray(X, dtype=float) - pred) ** 2


def observable_mse(X, beta, Y) -> float:
    return float(np.mean(observable_errors(X, beta, Y)))


# ---------------------------------------------------------------------------
# simulated maps
# ---------------------------------------------------------------------------

def simulated_map(D: int, alphas, device: dyn.DeviceParams = dyn.DeviceParams(),
                  chi_rel: float = 0.0, higher_order_rel: float = 0.0,
                  settings: AcquisitionSettings = AcquisitionSettings(), seed: int = 0,
                  grid=DEFAULT_NU_GRID, nu: float | None = None) -> AffineMap:
    """Map learnt from noiseless-readout expectation values of a model device.

    The model's ``chi_cq`` is scaled by ``1 + chi_rel`` and its self-Kerr and
    second-order dispersive terms by ``1 + higher_order_rel``. The model
    knows nothing of the readout assignment errors.
    """
    model = device.perturbed(chi_rel, higher_order_rel)
    sim = AcquisitionSettings(noise=settings.noise, idealized=settings.idealized,
                              ideal_displacement=settings.ideal_displacement, shots=None,
                              readout=dyn.PERFECT_READOUT, degrade=settings.degrade,
                              timing=settings.timing)
    ts = acquire_training_set(D, alphas, model, sim, seed)
    if nu is None:
        nu = select_nu(ts, grid, seed=seed)
    m = ridge_fit(ts, nu)
    m.provenance = "simulated"
    m.meta.update({"chi_rel": chi_rel, "higher_order_rel": higher_order_rel})
    return m


def perturbation_combos(chi_rel: float = 0.02, higher_order_rel: float = 0.5):
    """The unperturbed point and all four sign combinations."""
    combos = [(0.0, 0.0)]
    combos += [(s1 * chi_rel, s2 * higher_order_rel) for s1 in (1, -1) for s2 in (1, -1)]
    return combos


# ---------------------------------------------------------------------------
# process maps
# ---------------------------------------------------------------------------

@dataclass
class ProcessMap:
    """``X = matrix @ vec(rho) + offset`` for trace-one ``rho``.

    ``matrix = M K^+``; ``offset = V - matrix @ C``. :meth:`linear` folds the
    offset into the matrix through the trace functional.
    """

    dim: int
    matrix: np.ndarray
    offset: np.ndarray

    def predict(self, rho) -> np.ndarray:
        return (self.matrix @ np.asarray(rho).ravel()).real + self.offset

    def linear(self) -> np.ndarray:
        tr = np.eye(self.dim).ravel()
        return self.matrix + np.outer(self.offset, tr)


def process_map(beta: AffineMap, parametrization: fock.Parametrization | None = None) -> ProcessMap:
    par = parametrization or fock.build_parametrization(beta.dim)
    K = par.K
    if np.linalg.matrix_rank(K) < K.shape[1]:
        raise RankDeficiencyError("parametrization matrix K lacks full column rank")
    Kp = np.linalg.pinv(K)
    mat = beta.M @ Kp
    offset = beta.V - (mat @ par.C).real
    return ProcessMap(beta.dim, mat, offset)


def learn_dynamics_map(known_beta: AffineMap, Y, X_t, nu: float = 0.0):
    """Recover ``Y_t = Phi Y + Q`` from observables measured after the process.

    Fits ``X_t = Gamma Y + R`` by ridge regression, then
    ``Phi = M^+ Gamma`` and ``Q = M^+ (R - V)``.
    """
    Mp = pseudoinverse(known_beta.M)
    beta = ridge_beta(Y, X_t, nu)
    R, Gamma = beta[:, 0], beta[:, 1:]
    return Mp @ Gamma, Mp @ (R - known_beta.V)
