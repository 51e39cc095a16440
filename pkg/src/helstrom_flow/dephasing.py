"""Qubit dephased by a single bosonic mode, prepared with tunable correlations.

Hamiltonian (hbar = 1)::

    H = eps * sz (x) 1 + 1 (x) omega * b^H b + g * sz (x) (b + b^H)

with ``sz|1> = +|1>`` and ``sz|0> = -|0>``. The initial global state is

    |Psi_lam> = alpha |1>|0>_E + beta |0>|Omega_lam>_E,
    |Omega_lam> = ((1 - lam)|0>_E + lam |y>_E) / C_lam,

which is a product state at ``lam = 0``. Populations are conserved; the
coherence ``<1|rho_S(t)|0> = alpha conj(beta) B_lam(t)`` carries the dynamics.

Matrices use index ``k`` for level ``|k>``, so ``rho_S[1, 1] = |alpha|^2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .info import DETECTION_TOL, max_rises
from .linalg import (
    SIGMA_Z,
    BipartiteState,
    DensityOperator,
    NumericalError,
    basis_ket,
    coherent_state,
    fock_annihilation,
    hermitian_eig,
    partial_trace_env,
    trace_norm_2x2,
)

DEFAULT_NMAX = 40
MAX_TRUNCATION_DEFICIT = 1e-12
FREQUENCY_CUT = 0.02


@dataclass(frozen=True)
class DephasingConfig:
    epsilon: float = 1.0
    omega: float = 1.0
    g: float = 0.1
    y: complex = 1.0
    lam: float = 0.0
    alpha: complex = 1 / math.sqrt(2)
    beta: complex = 1 / math.sqrt(2)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")


@dataclass(frozen=True)
class ScanConfig:
    p1_grid: Sequence[float]
    lambda_grid: Sequence[float]
    samples: int = 500
    dt: float = 0.15
    t_max: float = 2 * math.pi
    seed: int = 0
    amplitude_mode: str = "haar"
    tol: float = DETECTION_TOL

    def __post_init__(self):
        object.__setattr__(self, "p1_grid", tuple(float(p) for p in self.p1_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        if not self.p1_grid or not self.lambda_grid:
            raise ValueError("grids must be non-empty")
        for name, grid in (("p1", self.p1_grid), ("lambda", self.lambda_grid)):
            if any(not 0.0 <= v <= 1.0 for v in grid):
                raise ValueError(f"{name} grid values must lie in [0, 1]")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if not (self.dt > 0 and self.t_max >= self.dt):
            raise ValueError("need dt > 0 and t_max >= dt")
        if self.amplitude_mode not in ("haar", "real"):
            raise ValueError(f"unknown amplitude mode {self.amplitude_mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class DetectionRecord:
    p1: float
    lam: float
    detections: int
    samples: int

    @property
    def frequency(self) -> float:
        return self.detections / self.samples


def default_p1_grid(count: int = 40) -> list[float]:
    """``count`` equally spaced weights ``1/count, 2/count, ..., 1``."""
    return [(k + 1) / count for k in range(count)]


def default_lambda_grid(count: int = 30) -> list[float]:
    return list(np.linspace(0.0, 1.0, count))


def time_grid(dt: float, t_max: float) -> np.ndarray:
    """``0, dt, 2 dt, ...`` up to and including ``t_max`` (within rounding)."""
    n = int(math.floor(t_max / dt + 1e-9)) + 1
    return dt * np.arange(n)


def normalization_c(lam: float, y: complex) -> float:
    overlap = math.exp(-abs(y) ** 2 / 2)
    return math.sqrt((1 - lam) ** 2 + lam**2 + 2 * lam * (1 - lam) * overlap)


def oscillating_params(t, g: float, omega: float):
    """``(R, Lambda, S)`` of the coherence factor for a unit coherent amplitude."""
    k = g / omega
    one_minus_cos = 1 - np.cos(omega * t)
    return 4 * k**2 * one_minus_cos, k * np.sin(omega * t), 2 * k * one_minus_cos - 0.5


def _driven_mode(z0, s: int, t, g: float, omega: float):
    # Coherent state |z0> under omega b^H b + s g (b + b^H) stays coherent:
    # returns its amplitude and the accumulated phase at time t.
    k = g / omega
    e = np.exp(-1j * omega * t)
    z = (z0 + s * k) * e - s * k
    integral_re = np.real((z0 + s * k) * (1 - e) / (1j * omega)) - s * k * t
    return z, -s * g * integral_re


def _coherent_overlap(a, b):
    return np.exp(-np.abs(a) ** 2 / 2 - np.abs(b) ** 2 / 2 + np.conj(a) * b)


def coherence_b(lam: float, t, cfg: DephasingConfig):
    """Coherence factor ``B_lam(t)``, vectorized over ``t``.

    Exact for any coherent amplitude ``y``. For ``y = 1`` it equals
    ``exp(-2i eps t - R) (1 - lam + lam exp(-2i Lambda + S)) / C_lam``.
    """
    t = np.asarray(t, dtype=float)
    z_up, ph_up = _driven_mode(0.0, +1, t, cfg.g, cfg.omega)
    acc = np.zeros(t.shape, dtype=complex)
    for weight, z0 in ((1 - lam, 0.0), (lam, cfg.y)):
        if weight == 0:
            continue
        z_dn, ph_dn = _driven_mode(z0, -1, t, cfg.g, cfg.omega)
        acc += weight * np.exp(1j * (ph_up - ph_dn)) * _coherent_overlap(z_dn, z_up)
    b = np.exp(-2j * cfg.epsilon * t) * acc / normalization_c(lam, cfg.y)
    if np.any(np.abs(b) > 1 + 1e-12):
        raise NumericalError("coherence factor exceeds 1 in modulus")
    return b


def reduced_state(cfg: DephasingConfig, t: float) -> DensityOperator:
    c = cfg.alpha * np.conj(cfg.beta) * coherence_b(cfg.lam, t, cfg)
    rho = np.array(
        [[abs(cfg.beta) ** 2, np.conj(c)], [c, abs(cfg.alpha) ** 2]], dtype=complex
    )
    return DensityOperator(rho)


def helstrom_dephasing(p1: float, lam: float, alpha, beta, t: float, cfg: DephasingConfig) -> np.ndarray:
    """``p1 rho_S^lam(t) - p2 rho_S^0(t)`` for amplitudes ``alpha, beta``."""
    p2 = 1.0 - p1
    bl = coherence_b(lam, t, cfg)
    b0 = coherence_b(0.0, t, cfg)
    c = alpha * np.conj(beta) * (p1 * bl - p2 * b0)
    d = p1 - p2
    return np.array(
        [[d * abs(beta) ** 2, np.conj(c)], [c, d * abs(alpha) ** 2]], dtype=complex
    )


def helstrom_norms(p1: float, b_lam: np.ndarray, b_zero: np.ndarray, alpha, beta) -> np.ndarray:
    """Trace norms of the dephasing Helstrom matrix, shape ``(samples, times)``.

    ``b_lam`` and ``b_zero`` are the coherence factors on the time grid.
    """
    alpha = np.asarray(alpha, dtype=complex)[:, None]
    beta = np.asarray(beta, dtype=complex)[:, None]
    d = p1 - (1.0 - p1)
    c = alpha * np.conj(beta) * (p1 * b_lam - (1.0 - p1) * b_zero)[None, :]
    return trace_norm_2x2(d * np.abs(beta) ** 2, d * np.abs(alpha) ** 2, c)


def _check_truncation(deficit: float, nmax: int):
    if deficit > MAX_TRUNCATION_DEFICIT:
        raise NumericalError(
            f"coherent state truncated at nmax={nmax} loses weight {deficit:.3e}"
        )


def initial_global_state(cfg: DephasingConfig, nmax: int = DEFAULT_NMAX) -> BipartiteState:
    if nmax < 2:
        raise ValueError("nmax must be >= 2")
    coh, deficit = coherent_state(cfg.y, nmax)
    if cfg.lam > 0:
        _check_truncation(deficit, nmax)
    vac = basis_ket(0, nmax)
    omega_state = (1 - cfg.lam) * vac + cfg.lam * coh
    omega_state /= np.linalg.norm(omega_state)
    psi = cfg.alpha * np.kron(basis_ket(1, 2), vac) + cfg.beta * np.kron(
        basis_ket(0, 2), omega_state
    )
    psi /= np.linalg.norm(psi)
    return BipartiteState(DensityOperator.from_ket(psi), 2, nmax)


def global_hamiltonian(cfg: DephasingConfig, nmax: int) -> np.ndarray:
    b = fock_annihilation(nmax)
    eye_e = np.eye(nmax)
    return (
        cfg.epsilon * np.kron(SIGMA_Z, eye_e)
        + cfg.omega * np.kron(np.eye(2), b.conj().T @ b)
        + cfg.g * np.kron(SIGMA_Z, b + b.conj().T)
    )


def brute_force_reduced_states(cfg: DephasingConfig, times, nmax: int = DEFAULT_NMAX) -> list[DensityOperator]:
    """Reduced qubit states from exact evolution in a truncated Fock space."""
    _, deficit = coherent_state(cfg.y, nmax)
    _check_truncation(deficit, nmax)
    psi0 = initial_global_state(cfg, nmax)
    # the initial state is pure: recover its ket from the projector
    w, v = hermitian_eig(psi0.matrix)
    ket = v[:, -1] * np.sqrt(w[-1])
    energies, modes = hermitian_eig(global_hamiltonian(cfg, nmax))
    amps = modes.conj().T @ ket
    out = []
    for t in np.atleast_1d(times):
        psi = modes @ (np.exp(-1j * energies * t) * amps)
        rho = partial_trace_env(np.outer(psi, psi.conj()), 2, nmax)
        out.append(DensityOperator(0.5 * (rho + rho.conj().T)))
    return out


def brute_force_reduced_state(cfg: DephasingConfig, t: float, nmax: int = DEFAULT_NMAX) -> DensityOperator:
    return brute_force_reduced_states(cfg, [t], nmax)[0]


def sample_amplitudes(seed: int, i_p1: int, i_lam: int, samples: int, mode: str = "haar"):
    """Amplitude pairs for one scan cell.

    The stream is keyed by ``(seed, i_p1, i_lam)`` and sample ``k`` always
    takes the ``k``-th pair of draws, so every sample is a fixed function of
    ``(seed, i_p1, i_lam, k)`` regardless of execution order.

    ``haar``: ``|alpha|^2`` uniform on [0, 1], relative phase uniform, alpha
    real and non-negative. ``real``: alpha uniform on [0, 1],
    ``beta = sqrt(1 - alpha^2)``.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(i_p1, i_lam))
    u = np.random.default_rng(ss).random((samples, 2))
    if mode == "haar":
        alpha = np.sqrt(u[:, 0]).astype(complex)
        beta = np.sqrt(1 - u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
    elif mode == "real":
        alpha = u[:, 0].astype(complex)
        beta = np.sqrt(1 - u[:, 0] ** 2).astype(complex)
    else:
        raise ValueError(f"unknown amplitude mode {mode!r}")
    return alpha, beta


def scan_detection(scan: ScanConfig, cfg_base: DephasingConfig, threads: int = 1) -> list[DetectionRecord]:
    """Detection frequency of a rise in ``||Delta(t)||_1`` per ``(p1, lam)`` cell.

    Records are ordered p1-major, matching the grids. The result does not
    depend on ``threads``.
    """
    times = time_grid(scan.dt, scan.t_max)
    b_zero = coherence_b(0.0, times, cfg_base)
    b_by_lam = [coherence_b(lam, times, cfg_base) for lam in scan.lambda_grid]

    def cell(ij):
        i, j = ij
        alpha, beta = sample_amplitudes(scan.seed, i, j, scan.samples, scan.amplitude_mode)
        norms = helstrom_norms(scan.p1_grid[i], b_by_lam[j], b_zero, alpha, beta)
        hits = int(np.count_nonzero(max_rises(norms) > scan.tol))
        return DetectionRecord(scan.p1_grid[i], scan.lambda_grid[j], hits, scan.samples)

    cells = [(i, j) for i in range(len(scan.p1_grid)) for j in range(len(scan.lambda_grid))]
    if threads <= 1:
        return [cell(ij) for ij in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(cell, cells))


def _row(records: Sequence[DetectionRecord], p1: float):
    row = sorted((r for r in records if abs(r.p1 - p1) < 1e-12), key=lambda r: r.lam)
    if not row:
        raise KeyError(f"no records for p1={p1}")
    return row


def extract_threshold(records: Sequence[DetectionRecord], p1: float, cut: float = FREQUENCY_CUT):
    """Smallest lam of the row whose frequency, and that of every larger lam, is below ``cut``.

    Returns ``None`` when the largest lam still detects.
    """
    threshold = None
    for r in reversed(_row(records, p1)):
        if r.frequency >= cut:
            break
        threshold = r.lam
    return threshold


def last_detecting_lambda(records: Sequence[DetectionRecord], p1: float, cut: float = FREQUENCY_CUT):
    hits = [r.lam for r in _row(records, p1) if r.frequency >= cut]
    return max(hits) if hits else None


def surface_trajectories(p1: float, lam: float, alpha_grid, times, cfg_base: DephasingConfig) -> np.ndarray:
    """``||Delta(t)||_1`` for real amplitudes, shape ``(len(alpha_grid), len(times))``."""
    alpha = np.asarray(alpha_grid, dtype=float)
    if np.any((alpha < 0) | (alpha > 1)):
        raise ValueError("alpha values must lie in [0, 1]")
    times = np.asarray(times, dtype=float)
    beta = np.sqrt(1 - alpha**2)
    return helstrom_norms(
        p1, coherence_b(lam, times, cfg_base), coherence_b(0.0, times, cfg_base), alpha, beta
    )


def with_amplitudes(cfg: DephasingConfig, alpha, beta, lam: float | None = None) -> DephasingConfig:
    return replace(cfg, alpha=alpha, beta=beta, lam=cfg.lam if lam is None else lam)
