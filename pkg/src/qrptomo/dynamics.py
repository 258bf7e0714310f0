"""Lindblad simulation of the driven qubit-cavity system and the
displaced-parity measurement.

Units: frequencies in ``DeviceParams`` are ordinary Hz (``f = omega/2pi``),
times in seconds; Hamiltonians are returned in rad/s. The joint Hilbert space
is ``qubit (2) x cavity (dim)`` with qubit index 0 = ``|g>`` and 1 = ``|e>``,
so joint index ``q * dim + n``.

Qubit measurement convention: ``sigma_z = |g><g| - |e><e|`` and the reported
observable is ``X = -<sigma_z> = p_e - p_g``. An ideal Ramsey parity map sends
an even-parity cavity state to ``|e>`` (``X = +1``).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from . import fock
from .exceptions import ConfigError, ConvergenceError, TraceDriftError

TWO_PI = 2 * math.pi

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
PROJ_E = np.array([[0, 0], [0, 1]], dtype=complex)
PROJ_G = np.array([[1, 0], [0, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)  # |g><g| - |e><e|


@dataclass(frozen=True)
class DeviceParams:
    """Hamiltonian and decoherence parameters. Defaults: the measured device.

    Frequencies in Hz, times in s. ``math.inf`` disables a decay channel.
    """

    omega_q: float = 5.277e9
    omega_c: float = 4.587e9
    omega_r: float = 7.617e9
    chi_qq: float = 175.3e6
    chi_cc: float = 6e3
    chi_cq: float = 1.423e6
    chi_qr: float = 0.64e6
    chi_cr: float = 2e3
    chi_cq_prime: float = 16e3
    T_q1: float = 85e-6
    T_qphi: float = 15e-6
    T_c1: float = 1e-3
    T_r1: float = 2.1e-6

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or math.isnan(v):
                raise ConfigError(f"DeviceParams.{f.name} must be a number, got {v!r}")
            if f.name.startswith("T_"):
                if not v > 0:
                    raise ConfigError(f"DeviceParams.{f.name} must be > 0, got {v}")
            elif not math.isfinite(v):
                raise ConfigError(f"DeviceParams.{f.name} must be finite, got {v}")

    def replace(self, **changes) -> "DeviceParams":
        return dataclasses.replace(self, **changes)

    def noiseless(self) -> "DeviceParams":
        return self.replace(T_q1=math.inf, T_qphi=math.inf, T_c1=math.inf)

    def perturbed(self, chi_rel: float = 0.0, higher_order_rel: float = 0.0) -> "DeviceParams":
        """Scale ``chi_cq`` by ``1 + chi_rel`` and the self-Kerr and
        second-order dispersive terms by ``1 + higher_order_rel``."""
        return self.replace(
            chi_cq=self.chi_cq * (1 + chi_rel),
            chi_cc=self.chi_cc * (1 + higher_order_rel),
            chi_cq_prime=self.chi_cq_prime * (1 + higher_order_rel),
        )

    @classmethod
    def from_mapping(cls, data: dict) -> "DeviceParams":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown device parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def load(cls, path) -> "DeviceParams":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping of parameter = value")
        return cls.from_mapping(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ReadoutErrorModel:
    """Qubit assignment errors (synthetic defaults)."""

    p_e_given_g: float = 0.02
    p_g_given_e: float = 0.02

    def __post_init__(self):
        for name in ("p_e_given_g", "p_g_given_e"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")

    def apparent_p_e(self, p_e):
        return p_e * (1 - self.p_g_given_e) + (1 - p_e) * self.p_e_given_g


PERFECT_READOUT = ReadoutErrorModel(0.0, 0.0)


@dataclass
class PulseSchedule:
    """Piecewise-constant drives (rad/s) on a uniform grid of step ``dt``."""

    dt: float
    qubit_drive: np.ndarray
    cavity_drive: np.ndarray

    def __post_init__(self):
        self.qubit_drive = np.atleast_1d(np.asarray(self.qubit_drive, dtype=complex))
        self.cavity_drive = np.atleast_1d(np.asarray(self.cavity_drive, dtype=complex))
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if len(self.qubit_drive) != len(self.cavity_drive) or len(self.qubit_drive) < 1:
            raise ValueError("drive arrays must have equal length >= 1")

    @classmethod
    def constant(cls, duration: float, dt: float, eps_q: complex = 0, eps_c: complex = 0):
        n = max(1, int(round(duration / dt)))
        return cls(duration / n, np.full(n, eps_q, dtype=complex), np.full(n, eps_c, dtype=complex))

    @property
    def duration(self) -> float:
        return self.dt * len(self.qubit_drive)

    def runs(self):
        """Yield ``(eps_q, eps_c, n_steps)`` for maximal runs of equal drives."""
        q, c = self.qubit_drive, self.cavity_drive
        start = 0
        for i in range(1, len(q) + 1):
            if i == len(q) or q[i] != q[start] or c[i] != c[start]:
                yield q[start], c[start], i - start
                start = i


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def joint(op_q: np.ndarray, op_c: np.ndarray) -> np.ndarray:
    return np.kron(op_q, op_c)


def build_joint_hamiltonian(device: DeviceParams, eps_q: complex = 0, eps_c: complex = 0,
                            cavity_dim: int = 10, frame: str = "rotating") -> np.ndarray:
    """Joint Hamiltonian (rad/s) in the frame rotating with the qubit and
    cavity frequencies. The readout resonator stays in vacuum and drops out.
    """
    if frame != "rotating":
        raise ValueError("only the rotating frame is supported")
    if cavity_dim < 2:
        raise ValueError("cavity_dim must be >= 2")
    n = np.arange(cavity_dim, dtype=float)
    nn1 = n * (n - 1)  # c^dag c^dag c c
    diag_g = -(TWO_PI * device.chi_cc / 2) * nn1
    diag_e = diag_g - TWO_PI * device.chi_cq * n - TWO_PI * device.chi_cq_prime * nn1
    H = np.diag(np.concatenate([diag_g, diag_e])).astype(complex)
    if eps_q:
        drive = eps_q * joint(SIGMA_MINUS, np.eye(cavity_dim))
        H += drive + drive.conj().T
    if eps_c:
        drive = eps_c * joint(np.eye(2), fock.annihilation(cavity_dim))
        H += drive + drive.conj().T
    return H


def build_jumps(device: DeviceParams, cavity_dim: int) -> list[np.ndarray]:
    """Qubit decay, qubit dephasing and cavity decay, rates folded in.

    Infinite lifetimes give zero operators (kept so the list always has
    three entries).
    """
    if cavity_dim < 2:
        raise ValueError("cavity_dim must be >= 2")
    eye_c = np.eye(cavity_dim)
    return [
        math.sqrt(1 / device.T_q1) * joint(SIGMA_MINUS, eye_c),
        math.sqrt(2 / device.T_qphi) * joint(PROJ_E, eye_c),
        math.sqrt(1 / device.T_c1) * joint(np.eye(2), fock.annihilation(cavity_dim)),
    ]


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

class _Generator:
    """Precomputed Lindblad generator for one constant Hamiltonian."""

    def __init__(self, H: np.ndarray, jumps: Sequence[np.ndarray]):
        self.jumps = [J for J in jumps if np.any(J)]
        decay = sum((J.conj().T @ J for J in self.jumps), np.zeros_like(H))
        self.heff = H - 0.5j * decay
        self.heff_dag = self.heff.conj().T
        self.jumps_dag = [J.conj().T for J in self.jumps]
        self.norm = float(np.max(np.sum(np.abs(self.heff), axis=1)))

    def forward(self, rho):
        out = -1j * (self.heff @ rho - rho @ self.heff_dag)
        for J, Jd in zip(self.jumps, self.jumps_dag):
            out += J @ rho @ Jd
        return out

    def adjoint(self, A):
        out = 1j * (self.heff_dag @ A - A @ self.heff)
        for J, Jd in zip(self.jumps, self.jumps_dag):
            out += Jd @ A @ J
        return out


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_trace(before, after):
    drift = abs(np.trace(after) - np.trace(before))
    if drift > 1e-8:
        raise TraceDriftError(f"trace drifted by {drift:.2e} in one step; reduce dt")


def lindblad_step(rho: np.ndarray, H: np.ndarray, jumps: Sequence[np.ndarray], dt: float) -> np.ndarray:
    """One RK4 step of ``drho/dt = -i[H, rho] + sum_J (J rho J^+ - {J^+J, rho}/2)``."""
    gen = _Generator(H, jumps)
    out = _rk4(gen.forward, rho, dt)
    _check_trace(rho, out)
    return fock.hermitize(out)


MAX_NORM_DT = 0.2


def _substeps(gen: _Generator, dt: float) -> int:
    return max(1, math.ceil(gen.norm * dt / MAX_NORM_DT))


def _as_segments(schedule) -> list[PulseSchedule]:
    if schedule is None:
        return []
    if isinstance(schedule, PulseSchedule):
        return [schedule]
    return list(schedule)


def evolve(rho: np.ndarray, device: DeviceParams, schedule, jumps: Sequence[np.ndarray] = (),
           cavity_dim: int | None = None) -> np.ndarray:
    """Propagate a joint density matrix through one or more schedules.

    Steps whose ``||H_eff|| dt`` exceeds 0.2 are subdivided evenly.
    """
    rho = np.asarray(rho, dtype=complex)
    if cavity_dim is None:
        cavity_dim = rho.shape[0] // 2
    for seg in _as_segments(schedule):
        for eps_q, eps_c, steps in seg.runs():
            H = build_joint_hamiltonian(device, eps_q, eps_c, cavity_dim)
            gen = _Generator(H, jumps)
            sub = _substeps(gen, seg.dt)
            h = seg.dt / sub
            for _ in range(steps * sub):
                nxt = _rk4(gen.forward, rho, h)
                _check_trace(rho, nxt)
                rho = fock.hermitize(nxt)
    return rho


def evolve_observable(A: np.ndarray, device: DeviceParams, schedule, jumps: Sequence[np.ndarray] = (),
                      cavity_dim: int | None = None) -> np.ndarray:
    """Heisenberg-picture counterpart of :func:`evolve`.

    Returns ``A0`` with ``tr(A0 rho) == tr(A evolve(rho))`` for every
    ``rho``: each RK4 step of the forward integrator is the polynomial
    ``P(hL)``, whose dual is ``P(hL^+)``, applied here in reverse order.
    """
    A = np.asarray(A, dtype=complex)
    if cavity_dim is None:
        cavity_dim = A.shape[0] // 2
    for seg in reversed(_as_segments(schedule)):
        for eps_q, eps_c, steps in reversed(list(seg.runs())):
            H = build_joint_hamiltonian(device, eps_q, eps_c, cavity_dim)
            gen = _Generator(H, jumps)
            sub = _substeps(gen, seg.dt)
            h = seg.dt / sub
            for _ in range(steps * sub):
                A = _rk4(gen.adjoint, A, h)
            A = fock.hermitize(A)
    return A


def qubit_reduced(rho_joint: np.ndarray, cavity_dim: int) -> np.ndarray:
    r = rho_joint.reshape(2, cavity_dim, 2, cavity_dim)
    return np.einsum("anbn->ab", r)


def embed_ground(rho_cavity: np.ndarray, cavity_dim: int) -> np.ndarray:
    """``|g><g| (x) rho`` with ``rho`` zero-padded to ``cavity_dim`` levels."""
    d = rho_cavity.shape[0]
    if d > cavity_dim:
        raise ValueError(f"state of dim {d} does not fit in {cavity_dim} levels")
    big = np.zeros((cavity_dim, cavity_dim), dtype=complex)
    big[:d, :d] = rho_cavity
    return joint(PROJ_G, big)


# ---------------------------------------------------------------------------
# pulses and the parity map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceTiming:
    """Durations (s) and integration steps of the measurement sequence.

    ``wait`` defaults to the hardware value; ``pi / (2 pi chi_cq)`` (about
    351 ns) is the bare conditional-phase time and may be used instead.
    """

    pi2_duration: float = 64e-9
    wait: float = 284e-9
    displacement_duration: float = 100e-9
    dt_pulse: float = 0.5e-9
    dt_wait: float = 2e-9

    @staticmethod
    def analytic_wait(device: DeviceParams) -> float:
        return 1 / (2 * device.chi_cq)


DEFAULT_TIMING = SequenceTiming()


def _final_sigma_z(device: DeviceParams, amp: float, duration: float, dt: float) -> float:
    rho = embed_ground(fock.fock_dm(0, 2), 2)
    sched = PulseSchedule.constant(duration, dt, eps_q=1j * amp)
    out = evolve(rho, device, sched, (), cavity_dim=2)
    return float(np.real(np.trace(joint(SIGMA_Z, np.eye(2)) @ out)))


@lru_cache(maxsize=64)
def calibrate_pi2(device: DeviceParams, duration: float = 64e-9, dt: float = 0.5e-9,
                  tol: float = 1e-10) -> complex:
    """Constant qubit drive that rotates ``|g, 0>`` by pi/2 about the y axis.

    The drive is ``eps_q = i A`` with ``A > 0`` (state amplitudes stay real,
    so the rotation axis is y); ``A`` is found by bisection on the final
    ``<sigma_z>``, seeded by the ideal Rabi value ``pi / (4 duration)``.
    Decoherence is off and the cavity stays in vacuum.
    """
    if not duration > 0:
        raise ValueError("duration must be > 0")
    dev = device.noiseless()
    seed = math.pi / (4 * duration)
    lo, hi = 0.5 * seed, 1.5 * seed
    f_lo = _final_sigma_z(dev, lo, duration, dt)
    f_hi = _final_sigma_z(dev, hi, duration, dt)
    if f_lo * f_hi > 0:
        raise ConvergenceError("pi/2 calibration bracket does not contain a root")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f_mid = _final_sigma_z(dev, mid, duration, dt)
        if abs(f_mid) < tol or hi - lo < 1e-15 * seed:
            return 1j * mid
        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise ConvergenceError(f"pi/2 calibration did not converge (residual {f_mid:.2e})")


def displacement_drive(alpha: complex, duration: float) -> complex:
    """Constant cavity drive whose linear response displaces vacuum by ``alpha``.

    With ``H = eps c + eps^* c^dag`` a duration ``T`` gives
    ``exp(-i T eps^* c^dag - i T eps c)``, hence ``eps = -i alpha^* / T``.
    """
    return -1j * np.conj(alpha) / duration


def sequence_schedules(device: DeviceParams, alpha: complex, timing: SequenceTiming = DEFAULT_TIMING,
                       include_displacement: bool = True) -> list[PulseSchedule]:
    """Displacement pulse, pi/2, wait, pi/2 as a list of schedules."""
    eps_pi2 = calibrate_pi2(device, timing.pi2_duration, timing.dt_pulse)
    segs = []
    if include_displacement:
        segs.append(PulseSchedule.constant(
            timing.displacement_duration, timing.dt_pulse,
            eps_c=displacement_drive(alpha, timing.displacement_duration)))
    segs += [
        PulseSchedule.constant(timing.pi2_duration, timing.dt_pulse, eps_q=eps_pi2),
        PulseSchedule.constant(timing.wait, timing.dt_wait),
        PulseSchedule.constant(timing.pi2_duration, timing.dt_pulse, eps_q=eps_pi2),
    ]
    return segs


def simulation_dim(D: int, alphas: Iterable[complex], tol: float = 1e-10, guard: int = 4) -> int:
    """Cavity levels needed to hold every ``D(alpha)|n>``, ``n < D``.

    At least ``D + guard``; grown until the weight displaced beyond the
    cutoff is below ``tol`` for all ``alpha``.
    """
    alphas = list(alphas)
    amax = max((abs(a) for a in alphas), default=0.0)
    big = D + guard + fock.default_pad(amax) + int(4 * amax**2) + 10
    dim = D + guard
    for a in alphas:
        cols = fock.displacement_elements(a, big)[:, :D]
        weight = np.cumsum(np.abs(cols[::-1]) ** 2, axis=0)[::-1]  # weight[m] = sum_{j>=m}
        over = np.nonzero(np.max(weight, axis=1) > tol)[0]
        need = int(over[-1]) + 1 if over.size else 0
        dim = max(dim, need)
    return dim


def _ideal_ramsey_unitary(cavity_dim: int) -> np.ndarray:
    """Instantaneous R_y(pi/2), conditional phase, R_y(pi/2)."""
    c = s = 1 / math.sqrt(2)
    ry = np.array([[c, s], [-s, c]], dtype=complex)
    ry = joint(ry, np.eye(cavity_dim))
    cphase = joint(PROJ_G, np.eye(cavity_dim)) + joint(PROJ_E, fock.parity(cavity_dim))
    return ry @ cphase @ ry


def effective_observables(device: DeviceParams, alphas: Sequence[complex], D: int, *,
                          noise: bool = True, ideal_displacement: bool = False,
                          idealized: bool = False, timing: SequenceTiming = DEFAULT_TIMING,
                          sim_dim: int | None = None) -> np.ndarray:
    """Cavity operators ``E_k`` with ``X_k = tr(E_k rho)`` for ``D``-level states.

    The measured ``-sigma_z`` is propagated backwards through the sequence
    (Heisenberg picture), projected on the initial ``|g>`` and restricted
    to the first ``D`` cavity levels. ``idealized`` replaces both pulses and
    the wait by exact operations and forces an exact displacement.
    Returns an array of shape ``(len(alphas), D, D)``.
    """
    alphas = [complex(a) for a in alphas]
    if sim_dim is None:
        sim_dim = simulation_dim(D, alphas, tol=1e-14 if idealized else 1e-10)
    meas = joint(-SIGMA_Z, np.eye(sim_dim))
    jumps = build_jumps(device, sim_dim) if noise and not idealized else []
    if idealized:
        U = _ideal_ramsey_unitary(sim_dim)
        A_seq = U.conj().T @ meas @ U
    else:
        A_seq = evolve_observable(meas, device, sequence_schedules(device, 0, timing, False),
                                  jumps, sim_dim)
    out = np.empty((len(alphas), D, D), dtype=complex)
    for k, a in enumerate(alphas):
        if idealized or ideal_displacement:
            Dk = fock.displacement(a, sim_dim)
            A0 = joint(np.eye(2), Dk).conj().T @ A_seq @ joint(np.eye(2), Dk)
        else:
            disp = PulseSchedule.constant(timing.displacement_duration, timing.dt_pulse,
                                          eps_c=displacement_drive(a, timing.displacement_duration))
            A0 = evolve_observable(A_seq, device, disp, jumps, sim_dim)
        out[k] = A0[:D, :D]  # <g| A0 |g> block, first D levels
    return out


def parity_map_sequence(rho_cavity: np.ndarray, device: DeviceParams, alpha_k: complex, *,
                        noise: bool = True, ideal_displacement: bool = False,
                        idealized: bool = False, timing: SequenceTiming = DEFAULT_TIMING,
                        sim_dim: int | None = None) -> float:
    """Simulate displacement plus Ramsey parity map; return ``X = -<sigma_z>``.

    Forward (Schroedinger-picture) simulation of a single cavity state.
    """
    rho_cavity = fock.check_density_matrix(rho_cavity, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8)
    D = rho_cavity.shape[0]
    if sim_dim is None:
        sim_dim = simulation_dim(D, [alpha_k], tol=1e-14 if idealized else 1e-10)
    rho = embed_ground(rho_cavity, sim_dim)
    if idealized or ideal_displacement:
        Dk = joint(np.eye(2), fock.displacement(alpha_k, sim_dim))
        rho = Dk @ rho @ Dk.conj().T
    if idealized:
        U = _ideal_ramsey_unitary(sim_dim)
        rho = U @ rho @ U.conj().T
    else:
        jumps = build_jumps(device, sim_dim) if noise else []
        segs = sequence_schedules(device, alpha_k, timing, include_displacement=not ideal_displacement)
        rho = evolve(rho, device, segs, jumps, sim_dim)
    q = qubit_reduced(rho, sim_dim)
    return float(-np.real(np.trace(SIGMA_Z @ q)))


# ---------------------------------------------------------------------------
# readout
# ---------------------------------------------------------------------------

@dataclass
class MeasurementRecord:
    """Shot-averaged estimate ``X = 2 * (excited count / shots) - 1``."""

    k: int
    shots: int
    estimate: float
    seed: int
    count: int = -1
    state_id: int | str = 0
    alpha: complex = 0j
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if abs(self.estimate) > 1 + 1e-12:
            raise ValueError(f"estimate {self.estimate} outside [-1, 1]")

    @property
    def p_excited(self) -> float:
        return (self.estimate + 1) / 2


def expected_observable(X_true, readout: ReadoutErrorModel = PERFECT_READOUT):
    """Infinite-shot estimate including assignment errors (no correction)."""
    p_e = (1 + np.asarray(X_true, dtype=float)) / 2
    return 2 * readout.apparent_p_e(p_e) - 1


def record_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for a tuple of integer keys."""
    ss = np.random.SeedSequence([int(seed) % 2**64, *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_observable(X_true: float, shots: int, readout: ReadoutErrorModel = PERFECT_READOUT,
                      seed: int = 0, k: int = 0, state_id=0, alpha: complex = 0j) -> MeasurementRecord:
    """Binomial shot sampling of the qubit readout; no error mitigation."""
    if abs(X_true) > 1 + 1e-9:
        raise ValueError(f"|X_true| = {abs(X_true)} > 1")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = float(np.clip(expected_observable(X_true, readout), -1, 1) + 1) / 2
    rng = np.random.default_rng(seed)
    count = int(rng.binomial(shots, p))
    return MeasurementRecord(k=k, shots=shots, estimate=2 * count / shots - 1, seed=int(seed),
                             count=count, state_id=state_id, alpha=complex(alpha))


RECORD_COLUMNS = ("state_id", "k", "alpha_re", "alpha_im", "shots", "X", "seed")


def write_records_csv(records: Iterable[MeasurementRecord], path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([r.state_id, r.k, repr(r.alpha.real), repr(r.alpha.imag), r.shots,
                        repr(r.estimate), r.seed])


def read_records_csv(path) -> list[MeasurementRecord]:
    import csv

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            shots = int(row["shots"])
            X = float(row["X"])
            sid = row["state_id"]
            out.append(MeasurementRecord(
                k=int(row["k"]), shots=shots, estimate=X, seed=int(row["seed"]),
                count=int(round((X + 1) / 2 * shots)),
                state_id=int(sid) if sid.lstrip("-").isdigit() else sid,
                alpha=complex(float(row["alpha_re"]), float(row["alpha_im"]))))
    return out


def load_device(path: str | Path | None) -> DeviceParams:
    return DeviceParams() if path is None else DeviceParams.load(path)
