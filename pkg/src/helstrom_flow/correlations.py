"""Local detection of quantum correlations.

A global state ``rho_SE`` is compared with its locally dephased version
``rho'_SE = sum_j (P_j (x) 1) rho_SE (P_j (x) 1)``, where ``P_j`` project on
the eigenbasis of the system marginal. Both share the same system marginal,
so any later rise of ``|| p1 Tr_E[U rho U^H] - p2 Tr_E[U rho' U^H] ||_1``
above ``|p1 - p2|`` reveals non-zero discord in ``rho_SE``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .info import Trajectory, internal_information
from .linalg import (
    BipartiteState,
    DensityOperator,
    WeightPair,
    as_matrix,
    basis_ket,
    hermitian_eig,
    partial_trace_env,
    partial_trace_sys,
    trace_distance,
    trace_norm_2x2,
)

DEGENERACY_GAP = 1e-9
UNITARY_TOL = 1e-10


class DegenerateSpectrumWarning(UserWarning):
    """The system marginal has a degenerate spectrum: the dephasing basis is not unique."""


@dataclass(frozen=True)
class DephasingMapSpec:
    projectors: tuple
    weights: tuple
    degenerate: bool = False

    def __post_init__(self):
        dim = self.projectors[0].shape[0]
        total = sum(self.projectors)
        if np.max(np.abs(total - np.eye(dim))) > 1e-10:
            raise ValueError("projectors do not resolve the identity")
        for j, p in enumerate(self.projectors):
            for q in self.projectors[j + 1 :]:
                if np.max(np.abs(p @ q)) > 1e-10:
                    raise ValueError("projectors are not orthogonal")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-10) or abs(w.sum() - 1) > 1e-10:
            raise ValueError("weights must be a probability vector")

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]


def eigen_dephasing_spec(rho_s) -> DephasingMapSpec:
    """Rank-one eigenprojectors of ``rho_s`` with the eigenvalues as weights.

    Degenerate eigenvalues (gap below 1e-9) set ``degenerate`` and emit a
    :class:`DegenerateSpectrumWarning`; the eigensolver's basis is used.
    """
    w, v = hermitian_eig(as_matrix(rho_s))
    degenerate = bool(np.any(np.diff(w) < DEGENERACY_GAP))
    if degenerate:
        warnings.warn(
            "system marginal has a degenerate spectrum; the dephasing basis is "
            "the eigensolver's choice",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    projectors = tuple(np.outer(v[:, j], v[:, j].conj()) for j in range(len(w)))
    return DephasingMapSpec(projectors, tuple(np.clip(w, 0.0, None)), degenerate)


def local_dephasing(s: BipartiteState, spec: DephasingMapSpec | None = None) -> BipartiteState:
    """Apply the local dephasing map on the system factor of ``s``."""
    spec = spec or eigen_dephasing_spec(s.marginal_s)
    if spec.dim != s.dim_s:
        raise ValueError("dephasing map acts on a different system dimension")
    eye_e = np.eye(s.dim_e)
    rho = np.zeros_like(s.matrix)
    for p in spec.projectors:
        big = np.kron(p, eye_e)
        rho += big @ s.matrix @ big
    return BipartiteState(DensityOperator(0.5 * (rho + rho.conj().T), s.state.tol), s.dim_s, s.dim_e)


def conditional_environment_states(s: BipartiteState, spec: DephasingMapSpec):
    """``(q_j, rho_E^j)`` for each projector; ``rho_E^j`` is ``None`` when ``q_j = 0``."""
    eye_e = np.eye(s.dim_e)
    out = []
    for p in spec.projectors:
        big = np.kron(p, eye_e)
        block = big @ s.matrix @ big
        q = float(np.trace(big @ s.matrix).real)
        env = partial_trace_sys(block, s.dim_s, s.dim_e) / q if q > 0 else None
        out.append((q, env))
    return out


def _check_unitary(u: np.ndarray):
    err = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if err > UNITARY_TOL:
        raise ValueError(f"operator is not unitary (residual {err:.3e})")


def correlation_witness(
    s: BipartiteState,
    w: WeightPair,
    unitaries: Sequence[tuple[float, np.ndarray]],
    spec: DephasingMapSpec | None = None,
) -> Trajectory:
    """``I_int(t) - |p1 - p2|`` for ``rho_SE`` against its dephased version.

    ``unitaries`` is a list of ``(t, U)`` pairs with increasing ``t``.
    """
    dephased = local_dephasing(s, spec)
    times, values = [], []
    for t, u in unitaries:
        u = as_matrix(u)
        if u.shape[0] != s.state.dim:
            raise ValueError("unitary does not act on the global space")
        _check_unitary(u)
        r1 = partial_trace_env(u @ s.matrix @ u.conj().T, s.dim_s, s.dim_e)
        r2 = partial_trace_env(u @ dephased.matrix @ u.conj().T, s.dim_s, s.dim_e)
        times.append(t)
        values.append(internal_information(r1, r2, w) - w.bias)
    return Trajectory(times, values)


def witness_bound(s: BipartiteState, w: WeightPair, spec: DephasingMapSpec | None = None) -> float:
    """``2 min(p1, p2) D(rho_SE, rho'_SE)``: cap on every witness value."""
    return 2.0 * min(w.p1, w.p2) * trace_distance(s.matrix, local_dephasing(s, spec).matrix)


# -- CNOT example -------------------------------------------------------------


@dataclass(frozen=True)
class CnotCase:
    alpha: complex
    beta: complex
    p1: float

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError("p1 must lie in [0, 1]")

    @classmethod
    def real(cls, alpha_abs: float, p1: float) -> "CnotCase":
        return cls(alpha_abs, float(np.sqrt(max(0.0, 1.0 - alpha_abs**2))), p1)

    @property
    def weights(self) -> WeightPair:
        return WeightPair(self.p1)


def cnot_unitary() -> np.ndarray:
    """Flips the environment qubit when the system is in ``|0>``.

    ``|11> -> |11>``, ``|10> -> |10>``, ``|01> -> |00>``, ``|00> -> |01>``.
    """
    u = np.zeros((4, 4), dtype=complex)
    for s, e, e_out in ((1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 1)):
        u[2 * s + e_out, 2 * s + e] = 1.0
    return u


def cnot_states(case: CnotCase) -> tuple[BipartiteState, BipartiteState]:
    """The entangled state ``alpha|11> + beta|00>`` and its classically correlated version."""
    k11 = np.kron(basis_ket(1, 2), basis_ket(1, 2))
    k00 = np.kron(basis_ket(0, 2), basis_ket(0, 2))
    psi = case.alpha * k11 + case.beta * k00
    rho = np.outer(psi, psi.conj())
    classical = abs(case.alpha) ** 2 * np.outer(k11, k11) + abs(case.beta) ** 2 * np.outer(k00, k00)
    return BipartiteState.from_matrix(rho, 2, 2), BipartiteState.from_matrix(classical, 2, 2)


def cnot_helstrom_matrix(case: CnotCase) -> np.ndarray:
    """Helstrom matrix of the system marginals after the gate (index k = level |k>)."""
    d = case.p1 - (1 - case.p1)
    theta = case.p1 * case.alpha * np.conj(case.beta)
    return np.array(
        [[d * abs(case.beta) ** 2, np.conj(theta)], [theta, d * abs(case.alpha) ** 2]],
        dtype=complex,
    )


def cnot_helstrom_eigenvalues(case: CnotCase) -> tuple[float, float]:
    d = case.p1 - (1 - case.p1)
    gamma, delta = d * abs(case.alpha) ** 2, d * abs(case.beta) ** 2
    theta = case.p1 * case.alpha * np.conj(case.beta)
    root = np.sqrt((gamma - delta) ** 2 + 4 * abs(theta) ** 2)
    return (gamma + delta - root) / 2, (gamma + delta + root) / 2


def cnot_internal_info(case: CnotCase) -> float:
    """Closed-form internal information after the gate."""
    p1, p2 = case.p1, 1 - case.p1
    if p1 < 1 / 3:
        return abs(p1 - p2)
    a2, b2 = abs(case.alpha) ** 2, abs(case.beta) ** 2
    return float(np.sqrt((p1 - p2) ** 2 * (a2 - b2) ** 2 + 4 * p1**2 * a2 * b2))


def cnot_rise(case: CnotCase) -> float:
    return cnot_internal_info(case) - abs(2 * case.p1 - 1)


def cnot_bound(case: CnotCase) -> float:
    return 2 * min(case.p1, 1 - case.p1) * abs(case.alpha * case.beta)


def computational_dephasing_spec(rho_s) -> DephasingMapSpec:
    """Dephasing in the computational basis, for marginals known to be diagonal there."""
    rho_s = as_matrix(rho_s)
    dim = rho_s.shape[0]
    return DephasingMapSpec(
        tuple(np.outer(basis_ket(k, dim), basis_ket(k, dim)) for k in range(dim)),
        tuple(np.clip(np.diag(rho_s).real, 0.0, None)),
    )


def cnot_numeric_rise(case: CnotCase) -> float:
    """Rise obtained by evolving both global states through the gate.

    The system marginal is diagonal in the computational basis, which is used
    as the dephasing basis even when ``|alpha| = |beta|`` makes it degenerate.
    """
    rho, _ = cnot_states(case)
    traj = correlation_witness(
        rho, case.weights, [(1.0, cnot_unitary())], computational_dephasing_spec(rho.marginal_s)
    )
    return float(traj.values[0])


def cnot_rise_grid(alpha_abs: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Closed-form rise on a grid, shape ``(len(alpha_abs), len(p1))``, via the 2x2 norm."""
    a = np.asarray(alpha_abs, dtype=float)[:, None]
    p = np.asarray(p1, dtype=float)[None, :]
    d = 2 * p - 1
    b = np.sqrt(np.clip(1 - a**2, 0, None))
    return trace_norm_2x2(d * b**2, d * a**2, p * a * b) - np.abs(d)
