"""Total, internal and external information of a weighted state pair.

For global states ``rho1, rho2`` on ``S (x) E`` and weights ``(p1, p2)``:

* total information: ``|| p1 rho1 - p2 rho2 ||_1`` (conserved by joint unitaries)
* internal information: the same norm for the system marginals
* external information: total minus internal, always non-negative

The bound functions return the right-hand side of the inequality that caps
the external information by the correlations in each global state and the
distance between the environment marginals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .linalg import (
    BipartiteState,
    MatrixLike,
    WeightPair,
    helstrom,
    trace_distance,
    trace_norm,
)

DETECTION_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Real values sampled on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size == 0:
            raise ValueError("trajectory is empty")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("trajectory values must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class InfoBreakdown:
    total: float
    internal: float

    @property
    def external(self) -> float:
        return self.total - self.internal


class Backflow(NamedTuple):
    detected: bool
    max_rise: float
    witness_time: Optional[float]


def _check_pair(s1: BipartiteState, s2: BipartiteState):
    if (s1.dim_s, s1.dim_e) != (s2.dim_s, s2.dim_e):
        raise ValueError(
            f"dimension split mismatch: {s1.dim_s}x{s1.dim_e} vs {s2.dim_s}x{s2.dim_e}"
        )


def internal_information(rs1: MatrixLike, rs2: MatrixLike, w: WeightPair) -> float:
    return trace_norm(helstrom(rs1, rs2, w))


def information_breakdown(s1: BipartiteState, s2: BipartiteState, w: WeightPair) -> InfoBreakdown:
    _check_pair(s1, s2)
    total = trace_norm(helstrom(s1.matrix, s2.matrix, w))
    internal = internal_information(s1.marginal_s, s2.marginal_s, w)
    return InfoBreakdown(total, internal)


def external_info_bound(s1: BipartiteState, s2: BipartiteState, w: WeightPair) -> float:
    """Upper bound on the external information of the pair at the same instant."""
    _check_pair(s1, s2)
    corr1 = trace_distance(s1.matrix, s1.product_of_marginals())
    corr2 = trace_distance(s2.matrix, s2.product_of_marginals())
    env = trace_distance(s1.marginal_e, s2.marginal_e)
    return 2.0 * (w.p1 * corr1 + w.p2 * corr2 + min(w.p1, w.p2) * env)


def increase_bound(s1: BipartiteState, s2: BipartiteState, w: WeightPair) -> float:
    """Cap on ``I_int(t) - I_int(0)`` for any joint unitary evolution.

    ``s1`` and ``s2`` are the initial global states; the value is the external
    information bound evaluated on them.
    """
    return external_info_bound(s1, s2, w)


def information_trajectory(
    s1: BipartiteState,
    s2: BipartiteState,
    w: WeightPair,
    times: Sequence[float],
    unitaries: Sequence[np.ndarray],
) -> tuple[Trajectory, Trajectory]:
    """Total and internal information after each joint unitary."""
    _check_pair(s1, s2)
    total, internal = [], []
    for u in unitaries:
        b = information_breakdown(s1.evolve(u), s2.evolve(u), w)
        total.append(b.total)
        internal.append(b.internal)
    return Trajectory(times, total), Trajectory(times, internal)


def max_rises(values: np.ndarray) -> np.ndarray:
    """Largest rise above the first column, clipped at zero, row by row."""
    v = np.atleast_2d(np.asarray(values, dtype=float))
    return np.maximum(np.max(v - v[:, :1], axis=1), 0.0)


def detect_backflow(traj: Trajectory, tol: float = DETECTION_TOL) -> Backflow:
    """Did the trajectory ever rise more than ``tol`` above its initial value?"""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    rise = traj.values - traj.values[0]
    max_rise = max(0.0, float(rise.max()))
    above = np.flatnonzero(rise > tol)
    if above.size == 0:
        return Backflow(False, max_rise, None)
    return Backflow(True, max_rise, float(traj.times[above[0]]))


def markovianity_witness(traj: Trajectory, tol: float = DETECTION_TOL) -> bool:
    """True when the values never increase by more than ``tol`` between grid points.

    A ``False`` flags non-Markovian behaviour for this particular weight and
    state pair; ``True`` only says this sample is consistent with Markovianity.
    """
    return bool(np.all(np.diff(traj.values) <= tol))
