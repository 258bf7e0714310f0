"""Idealised displaced-parity map and displacement-set optimization."""

from __future__ import annotations

import json
import math
from importlib import resources
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .exceptions import RankDeficiencyError

PROVENANCES = ("idealised", "learnt", "simulated")


@dataclass
class DisplacementSet:
    dim: int
    alphas: np.ndarray
    kappa: float | None = None

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=complex).ravel()
        if self.alphas.size != self.dim**2 - 1:
            raise ValueError(f"D={self.dim} needs {self.dim**2 - 1} displacements, got {self.alphas.size}")
        if not np.all(np.isfinite(self.alphas)):
            raise ValueError("displacements must be finite")

    def to_json(self) -> dict:
        return {
            "D": self.dim,
            "alphas": [[float(a.real), float(a.imag)] for a in self.alphas],
            "kappa": None if self.kappa is None else float(self.kappa),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DisplacementSet":
        alphas = np.array([complex(re, im) for re, im in obj["alphas"]])
        return cls(int(obj["D"]), alphas, obj.get("kappa"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "DisplacementSet":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class AffineMap:
    """``X = V + M @ Y``; ``beta = [V, M]`` has shape ``(n_obs, D**2)``."""

    dim: int
    V: np.ndarray
    M: np.ndarray
    provenance: str = "idealised"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=float).ravel()
        self.M = np.asarray(self.M, dtype=float)
        if self.M.shape != (self.V.size, self.dim**2 - 1):
            raise ValueError(f"M has shape {self.M.shape}, expected ({self.V.size}, {self.dim**2 - 1})")
        if not (np.all(np.isfinite(self.V)) and np.all(np.isfinite(self.M))):
            raise ValueError("map entries must be finite")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")

    @property
    def n_obs(self) -> int:
        return self.V.size

    @property
    def beta(self) -> np.ndarray:
        return np.column_stack([self.V, self.M])

    @classmethod
    def from_beta(cls, beta, dim: int, provenance: str = "learnt", meta=None) -> "AffineMap":
        beta = np.asarray(beta, dtype=float)
        return cls(dim, beta[:, 0], beta[:, 1:], provenance, dict(meta or {}))

    def predict(self, Y) -> np.ndarray:
        return np.asarray(Y, dtype=float) @ self.M.T + self.V

    def to_json(self) -> dict:
        return {"D": self.dim, "V": self.V.tolist(), "M": self.M.tolist(),
                "provenance": self.provenance, **({"meta": self.meta} if self.meta else {})}

    @classmethod
    def from_json(cls, obj: dict) -> "AffineMap":
        return cls(int(obj["D"]), obj["V"], obj["M"], obj.get("provenance", "idealised"),
                   obj.get("meta", {}))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "AffineMap":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _padded_displaced_parity(alpha: complex, dim: int, pad: int | None) -> np.ndarray:
    if pad is None:
        pad = fock.default_pad(alpha)
    big = fock.displacement(alpha, dim + pad, pad)
    return (big.conj().T @ fock.parity(dim + pad) @ big)[:dim, :dim]


def measurement_matrix(alphas, dim: int, pad: int | None = None, exact: bool = False) -> np.ndarray:
    """Complex matrix with ``X_k = (row_k) @ vec(rho)`` for ideal parity readout.

    Row ``k`` is ``vec(O_k^T)`` where ``O_k`` is the truncated
    ``D^dag(alpha_k) P D(alpha_k)``. ``exact`` uses closed-form matrix
    elements instead of padded exponentials.
    """
    alphas = np.asarray(alphas, dtype=complex)
    if exact:
        ops = fock.displaced_parity(alphas, dim)
    else:
        ops = np.array([_padded_displaced_parity(a, dim, pad) for a in alphas.ravel()])
        ops = ops.reshape(alphas.shape + (dim, dim))
    return np.swapaxes(ops, -1, -2).reshape(alphas.shape + (dim * dim,))


def build_idealised_map(alphas, dim: int, pad: int | None = None, exact: bool = False,
                        tol: float = 1e-10) -> AffineMap:
    """``M = calM K`` and ``V = calM C`` for perfect displaced-parity readout."""
    if isinstance(alphas, DisplacementSet):
        alphas = alphas.alphas
    par = fock.build_parametrization(dim)
    calM = measurement_matrix(alphas, dim, pad, exact)
    M = calM @ par.K
    V = calM @ par.C
    resid = max(np.max(np.abs(M.imag)), np.max(np.abs(V.imag)))
    if resid > tol:
        raise ValueError(f"idealised map has imaginary residue {resid:.2e}")
    return AffineMap(dim, V.real, M.real, "idealised")


def condition_number(M) -> float:
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    if s[0] == 0:
        raise ValueError("condition number of a zero matrix")
    if s[-1] < 1e-14 * s[0]:
        return math.inf
    return float(s[0] / s[-1])


def pseudoinverse(M, rcond: float = 1e-12) -> np.ndarray:
    """Left pseudoinverse ``(M^T M)^-1 M^T`` (via SVD)."""
    M = np.asarray(M, dtype=float)
    if M.shape[0] < M.shape[1]:
        raise RankDeficiencyError(f"{M.shape} matrix has no left inverse", math.inf)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s[-1] <= rcond * s[0]:
        raise RankDeficiencyError("matrix is rank deficient", math.inf if s[-1] == 0 else s[0] / s[-1])
    return (Vt.T / s) @ U.T


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

def _kappa_batch(x: np.ndarray, dim: int, K: np.ndarray) -> np.ndarray:
    n = dim * dim - 1
    alphas = x[..., :n] + 1j * x[..., n:]
    M = (measurement_matrix(alphas, dim, exact=True) @ K).real
    s = np.linalg.svd(M, compute_uv=False)
    smin = s[..., -1]
    smax = s[..., 0]
    return np.where(smin < 1e-14 * smax, np.inf, smax / np.where(smin > 0, smin, 1.0))


@dataclass
class OptimizationResult:
    displacements: DisplacementSet
    kappa: float
    initial_kappas: list
    final_kappas: list
    trajectory: list  # kappa after each accepted step of the winning restart
    best_restart: int


def _descend(x, dim, K, iters, step, h, trajectory):
    n2 = x.size
    kappa = float(_kappa_batch(x, dim, K))
    trajectory.append(kappa)
    eye = np.eye(n2) * h
    for _ in range(iters):
        probes = np.concatenate([x + eye, x - eye])
        vals = _kappa_batch(probes, dim, K)
        grad = (vals[:n2] - vals[n2:]) / (2 * h)
        if not np.all(np.isfinite(grad)):
            break
        gnorm = np.linalg.norm(grad)
        if gnorm == 0:
            break
        direction = grad / gnorm
        s = step
        for _ in range(31):
            cand = x - s * direction
            kc = float(_kappa_batch(cand, dim, K))
            if kc < kappa:
                break
            s *= 0.5
        else:
            break
        x, kappa = cand, kc
        trajectory.append(kappa)
        step = min(2 * s, 1.0)
    return x, kappa


def optimize_displacements(D: int, iters: int = 500, restarts: int = 16, step: float = 0.05,
                           seed: int = 0, radius: float | None = None, h: float = 1e-4) -> OptimizationResult:
    """Minimize the condition number of the idealised ``M`` over ``{alpha_k}``.

    Gradient descent on the real and imaginary parts with central finite
    differences and a backtracking line search (at most 30 halvings).
    Initial points are uniform in the disk of radius ``sqrt(D)``; the best
    restart wins, ties going to the lower restart index.
    """
    if D < 2:
        raise ValueError("D must be >= 2")
    n = D * D - 1
    K = fock.build_parametrization(D).K
    radius = math.sqrt(D) if radius is None else radius
    children = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    inits, finals = [], []
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        rad = radius * np.sqrt(rng.uniform(size=n))
        ang = rng.uniform(0, 2 * math.pi, size=n)
        a0 = rad * np.exp(1j * ang)
        x0 = np.concatenate([a0.real, a0.imag])
        traj: list = []
        x, kappa = _descend(x0, D, K, iters, step, h, traj)
        inits.append(traj[0])
        finals.append(kappa)
        if best is None or kappa < best[1]:
            best = (x, kappa, traj, r)
    x, kappa, traj, r = best
    if not math.isfinite(kappa):
        raise RankDeficiencyError("no restart produced an invertible M", kappa)
    alphas = x[:n] + 1j * x[n:]
    M = build_idealised_map(alphas, D, exact=True).M
    if np.linalg.det(M.T @ M) == 0 or not math.isfinite(condition_number(M)):
        raise RankDeficiencyError("optimized displacement set is not informationally complete", kappa)
    return OptimizationResult(DisplacementSet(D, alphas, kappa), kappa, inits, finals, traj, r)


def default_displacements(D: int) -> DisplacementSet:
    """Optimized set shipped with the package (``D`` from 2 to 6).

    Regenerate with :func:`optimize_displacements`; the parameters used are
    stored under ``"settings"`` in each file.
    """
    name = f"displacements_D{int(D)}.json"
    try:
        text = resources.files("qrptomo").joinpath("data", name).read_text()
    except FileNotFoundError:
        raise ValueError(f"no shipped displacement set for D={D}") from None
    return DisplacementSet.from_json(json.loads(text))


def random_displacement_set(D: int, seed: int = 0, radius: float | None = None) -> DisplacementSet:
    """Baseline set drawn uniformly from the disk of radius ``sqrt(D)``."""
    n = D * D - 1
    rng = np.random.default_rng(seed)
    radius = math.sqrt(D) if radius is None else radius
    a = radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * math.pi * rng.uniform(size=n))
    M = build_idealised_map(a, D, exact=True).M
    return DisplacementSet(D, a, condition_number(M))
