"""Truncated Fock-space operators, canonical states and the real
parametrization of density matrices.

Conventions
-----------
* Fock index ``n`` runs over ``0 .. dim-1``.
* ``vec(rho)`` is the row-major flattening ``rho.ravel()``.
* A parameter vector ``Y`` of a ``D``-dimensional state holds ``D**2 - 1``
  reals: the first ``D-1`` diagonal entries, then for every upper-triangular
  pair ``(l, m)``, ``l < m`` in row-major order, ``Re rho[l, m]`` followed by
  ``Im rho[l, m]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .exceptions import PhysicalityError, TruncationWarning

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_TOL = 1e-10
KITTEN_VARIANTS = ("plus", "minus", "y_plus", "y_minus")


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def annihilation(dim: int) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def parity(dim: int) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def default_pad(alpha: complex) -> int:
    """Guard levels used when exponentiating a displacement generator."""
    return max(20, 4 * math.ceil(abs(alpha) ** 2) + 10)


def displacement(alpha: complex, dim: int, pad: int | None = None) -> np.ndarray:
    """Displacement operator ``exp(alpha a^dag - alpha^* a)`` on ``dim`` levels.

    The exponential is taken in ``dim + pad`` levels, where it is exactly
    unitary, and the top-left ``dim x dim`` block is returned. A
    :class:`TruncationWarning` is emitted when that block differs from the
    infinite-space matrix elements by more than 1e-6.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if pad is None:
        pad = default_pad(alpha)
    big = dim + pad
    a = annihilation(big)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    d = expm(gen)[:dim, :dim]
    defect = np.max(np.abs(d - displacement_elements(alpha, dim)))
    if defect > 1e-6:
        warnings.warn(
            f"displacement({alpha}) on {dim} levels with pad={pad}: "
            f"truncation defect {defect:.2e}",
            TruncationWarning,
            stacklevel=2,
        )
    return d


def truncation_defect(alpha: complex, dim: int, pad: int | None = None) -> float:
    """Max deviation of the padded-exponential block from the exact elements."""
    if pad is None:
        pad = default_pad(alpha)
    a = annihilation(dim + pad)
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)[:dim, :dim]
    return float(np.max(np.abs(d - displacement_elements(alpha, dim))))


def displacement_elements(alphas, dim: int) -> np.ndarray:
    """Exact Fock matrix elements ``<m|D(alpha)|n>`` for ``m, n < dim``.

    Vectorized over ``alphas`` (any shape); the result has shape
    ``alphas.shape + (dim, dim)``. Uses the associated-Laguerre closed form,
    so no truncation error is incurred.
    """
    alphas = np.asarray(alphas, dtype=complex)
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo = np.minimum(m, n)
    diff = np.abs(m - n)
    x = (np.abs(alphas) ** 2)[..., None, None]
    lag = eval_genlaguerre(lo, diff, x)
    logfac = 0.5 * (gammaln(lo + 1) - gammaln(lo + diff + 1))
    a = alphas[..., None, None]
    # m >= n uses alpha^(m-n); m < n uses (-alpha^*)^(n-m)
    base = np.where(m >= n, a, -np.conj(a))
    out = np.exp(logfac) * base**diff * np.exp(-x / 2) * lag
    return out


def displaced_parity(alphas, dim: int) -> np.ndarray:
    """``D^dag(alpha) P D(alpha)`` restricted to ``dim`` levels.

    Uses ``D^dag(alpha) P D(alpha) = P D(2 alpha)``, exact in the infinite
    space, so the block equals the limit of any padded construction.
    """
    d2 = displacement_elements(2 * np.asarray(alphas, dtype=complex), dim)
    signs = (-1.0) ** np.arange(dim)
    return signs[:, None] * d2


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(abs(alpha) + 1e-300) - 0.5 * gammaln(n + 1))
    if alpha == 0:
        mag = (n == 0).astype(float)
    return mag * np.exp(1j * np.angle(alpha) * n)


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Normalized coherent-state ket truncated to ``dim`` levels."""
    amps = _coherent_amplitudes(alpha, dim)
    tail = 1.0 - float(np.sum(np.abs(amps) ** 2))
    if tail > 1e-6:
        warnings.warn(
            f"coherent state alpha={alpha} loses {tail:.2e} of its weight at dim={dim}",
            TruncationWarning,
            stacklevel=2,
        )
    return amps / np.linalg.norm(amps)


def ket2dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def fock_dm(n: int, dim: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def kitten_state(alpha: complex, variant: str, dim: int) -> np.ndarray:
    """Density matrix of the normalized superposition ``|alpha> + c|-alpha>``.

    ``variant`` selects ``c``: ``plus`` -> 1, ``minus`` -> -1,
    ``y_plus`` -> i, ``y_minus`` -> -i.
    """
    coeff = {"plus": 1, "minus": -1, "y_plus": 1j, "y_minus": -1j}
    if variant not in coeff:
        raise ValueError(f"unknown kitten variant {variant!r}; expected one of {KITTEN_VARIANTS}")
    big = dim + default_pad(alpha)
    psi = _coherent_amplitudes(alpha, big) + coeff[variant] * _coherent_amplitudes(-alpha, big)
    psi /= np.linalg.norm(psi)
    tail = float(np.sum(np.abs(psi[dim:]) ** 2))
    if tail > 1e-6:
        warnings.warn(
            f"kitten {variant} alpha={alpha} loses {tail:.2e} of its weight at dim={dim}",
            TruncationWarning,
            stacklevel=2,
        )
    psi = psi[:dim]
    return ket2dm(psi / np.linalg.norm(psi))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random state from the Ginibre (Hilbert-Schmidt for full rank) ensemble."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# validation and fidelity
# ---------------------------------------------------------------------------

def check_density_matrix(rho: np.ndarray, herm_tol: float = HERMITIAN_TOL,
                         trace_tol: float = TRACE_TOL, eig_tol: float = EIG_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array or raise :class:`PhysicalityError`."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise PhysicalityError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise PhysicalityError("density matrix has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise PhysicalityError(f"density matrix not Hermitian (defect {herm:.2e})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise PhysicalityError(f"density matrix trace {tr.real:.12f} != 1")
    if eig_tol is not None:
        lmin = np.linalg.eigvalsh(rho)[0]
        if lmin < -eig_tol:
            raise PhysicalityError(f"density matrix has eigenvalue {lmin:.2e} < 0")
    return rho


def is_density_matrix(rho, **tols) -> bool:
    try:
        check_density_matrix(rho, **tols)
    except PhysicalityError:
        return False
    return True


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    # eigenvalue test is replaced by clipping at EIG_TOL inside the sqrt
    rho = check_density_matrix(rho, herm_tol=1e-9, trace_tol=1e-8, eig_tol=None)
    sigma = check_density_matrix(sigma, herm_tol=1e-9, trace_tol=1e-8, eig_tol=None)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    for m in (rho, sigma):
        lmin = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
        if lmin < -1e-6:
            raise PhysicalityError(f"fidelity input has eigenvalue {lmin:.2e}")
    s = _psd_sqrt((rho + rho.conj().T) / 2)
    inner = s @ sigma @ s
    lam = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    lam = np.where(lam < EIG_TOL, 0.0, lam)
    f = float(np.sum(np.sqrt(lam)) ** 2)
    return min(max(f, 0.0), 1.0)


def hermitize(rho: np.ndarray) -> np.ndarray:
    return (rho + rho.conj().T) / 2


# ---------------------------------------------------------------------------
# parametrization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Parametrization:
    """Affine map ``vec(rho) = K @ Y + C``.

    ``K`` is complex (entries 0, +-1, +-i) because the imaginary parts of
    the coherences enter ``vec(rho)`` multiplied by ``i``.
    """

    dim: int
    K: np.ndarray
    C: np.ndarray

    @property
    def n_params(self) -> int:
        return self.dim**2 - 1

    def state_of(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        if Y.shape[-1] != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {Y.shape[-1]}")
        v = Y @ self.K.T + self.C
        return v.reshape(Y.shape[:-1] + (self.dim, self.dim))

    def param_of(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        D = self.dim
        if rho.shape[-2:] != (D, D):
            raise ValueError(f"expected {D}x{D} matrices, got {rho.shape[-2:]}")
        iu, ju = _upper_pairs(D)
        diag = np.real(rho[..., np.arange(D - 1), np.arange(D - 1)])
        off = rho[..., iu, ju]
        inter = np.stack([off.real, off.imag], axis=-1).reshape(rho.shape[:-2] + (-1,))
        return np.concatenate([diag, inter], axis=-1)


@lru_cache(maxsize=None)
def _upper_pairs(dim: int):
    iu, ju = np.triu_indices(dim, k=1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


@lru_cache(maxsize=None)
def build_parametrization(dim: int) -> Parametrization:
    if dim < 2:
        raise ValueError("parametrization needs dim >= 2")
    D = dim
    K = np.zeros((D * D, D * D - 1), dtype=complex)
    C = np.zeros(D * D)
    last = (D - 1) * D + (D - 1)
    C[last] = 1.0
    for j in range(D - 1):
        K[j * D + j, j] = 1.0
        K[last, j] = -1.0
    col = D - 1
    for l, m in zip(*_upper_pairs(D)):
        K[l * D + m, col] = 1.0
        K[m * D + l, col] = 1.0
        K[l * D + m, col + 1] = 1j
        K[m * D + l, col + 1] = -1j
        col += 2
    K.setflags(write=False)
    C.setflags(write=False)
    return Parametrization(D, K, C)


def param_of(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return build_parametrization(rho.shape[-1]).param_of(rho)


def state_of(Y, dim: int) -> np.ndarray:
    return build_parametrization(dim).state_of(Y)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def matrix_to_json(mat: np.ndarray) -> dict:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("only square matrices are serialized")
    return {
        "dim": int(mat.shape[0]),
        "re": mat.real.ravel().tolist(),
        "im": mat.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.size != dim * dim or im.size != dim * dim:
        raise ValueError("matrix JSON has wrong number of entries")
    return (re + 1j * im).reshape(dim, dim)
