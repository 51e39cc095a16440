"""Dense complex linear algebra for small Hilbert spaces.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Bipartite
operators always use the system-slow index convention: the composite
index of ``|i_S>|i_E>`` is ``i_S * dim_e + i_E``, which is exactly what
``numpy.kron(a_sys, b_env)`` produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

DEFAULT_TOL = 1e-9
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class NumericalError(ArithmeticError):
    """A numerical routine failed to meet its accuracy contract."""


def as_matrix(x) -> np.ndarray:
    """Return ``x`` as a square, finite ``complex128`` array."""
    if isinstance(x, DensityOperator):
        return x.matrix
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def _check_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(a))))
    err = hermiticity_error(a)
    if err > tol * scale:
        raise ValueError(f"matrix is not Hermitian (max |A - A^H| = {err:.3e})")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class DensityOperator:
    """A validated statistical operator (Hermitian, PSD, unit trace)."""

    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        a = as_matrix(self.matrix)
        if hermiticity_error(a) > self.tol:
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(a)
        if abs(tr - 1.0) > self.tol:
            raise ValueError(f"density operator has trace {tr.real:.12g}, expected 1")
        lo = np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0]
        if lo < -self.tol:
            raise ValueError(f"density operator has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "matrix", _frozen(a))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, psi, tol: float = DEFAULT_TOL) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex).ravel()
        return cls(np.outer(psi, psi.conj()), tol)


MatrixLike = Union[np.ndarray, DensityOperator]


@dataclass(frozen=True)
class WeightPair:
    """Prior probabilities ``(p1, p2)`` of a two-state discrimination task."""

    p1: float

    def __post_init__(self):
        p1 = float(self.p1)
        if not 0.0 <= p1 <= 1.0:
            raise ValueError(f"p1 must lie in [0, 1], got {p1}")
        object.__setattr__(self, "p1", p1)

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    @property
    def bias(self) -> float:
        """``|p1 - p2|``, the trace norm of the Helstrom matrix of equal states."""
        return abs(self.p1 - self.p2)

    def swapped(self) -> "WeightPair":
        return WeightPair(self.p2)


UNBIASED = WeightPair(0.5)


@dataclass(frozen=True)
class BipartiteState:
    """A density operator on ``H_S (x) H_E`` with an explicit dimension split."""

    state: DensityOperator
    dim_s: int
    dim_e: int

    def __post_init__(self):
        if self.dim_s < 1 or self.dim_e < 1:
            raise ValueError("subsystem dimensions must be positive")
        if self.state.dim != self.dim_s * self.dim_e:
            raise ValueError(
                f"state dimension {self.state.dim} != {self.dim_s} x {self.dim_e}"
            )

    @classmethod
    def from_matrix(cls, rho, dim_s: int, dim_e: int, tol: float = DEFAULT_TOL):
        return cls(DensityOperator(rho, tol), dim_s, dim_e)

    @classmethod
    def product(cls, rho_s: MatrixLike, rho_e: MatrixLike, tol: float = DEFAULT_TOL):
        a, b = as_matrix(rho_s), as_matrix(rho_e)
        return cls(DensityOperator(kron(a, b), tol), a.shape[0], b.shape[0])

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    @property
    def marginal_s(self) -> DensityOperator:
        return DensityOperator(
            partial_trace_env(self.matrix, self.dim_s, self.dim_e), self.state.tol
        )

    @property
    def marginal_e(self) -> DensityOperator:
        return DensityOperator(
            partial_trace_sys(self.matrix, self.dim_s, self.dim_e), self.state.tol
        )

    def product_of_marginals(self) -> DensityOperator:
        return DensityOperator(
            kron(self.marginal_s.matrix, self.marginal_e.matrix), self.state.tol
        )

    def evolve(self, u: np.ndarray) -> "BipartiteState":
        u = as_matrix(u)
        rho = u @ self.matrix @ u.conj().T
        return BipartiteState(
            DensityOperator(0.5 * (rho + rho.conj().T), self.state.tol),
            self.dim_s,
            self.dim_e,
        )


def kron(a: MatrixLike, b: MatrixLike) -> np.ndarray:
    """Tensor product; entry ``(i*db + k, j*db + l)`` is ``a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def _split(x: MatrixLike, dim_s: int, dim_e: int) -> np.ndarray:
    a = as_matrix(x)
    if a.shape[0] != dim_s * dim_e:
        raise ValueError(f"dimension {a.shape[0]} != {dim_s} x {dim_e}")
    return a.reshape(dim_s, dim_e, dim_s, dim_e)


def partial_trace_env(x: MatrixLike, dim_s: int, dim_e: int) -> np.ndarray:
    """Trace out the environment (fast index)."""
    return np.einsum("ikjk->ij", _split(x, dim_s, dim_e))


def partial_trace_sys(x: MatrixLike, dim_s: int, dim_e: int) -> np.ndarray:
    """Trace out the system (slow index)."""
    return np.einsum("kikj->ij", _split(x, dim_s, dim_e))


def _jacobi_eigh(h: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    # Cyclic Jacobi on the complex Hermitian form. Each rotation removes the
    # phase of a[p, q] and then applies a real Givens rotation.
    a = h.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            w = np.diag(a).real
            order = np.argsort(w, kind="stable")
            return w[order], v[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r <= 1e-300:
                    continue
                phase = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                g = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    raise NumericalError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def hermitian_eig(h: MatrixLike, method: str = "lapack", tol: float = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    The input is symmetrized as ``(h + h^H)/2`` after checking it is Hermitian
    within ``tol`` (relative to its largest entry).

    Returns:
        ``(w, v)`` with real eigenvalues ``w`` in ascending order and the
        orthonormal eigenvectors as the columns of ``v``.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` runs
    the in-house cyclic Jacobi solver, which is slower but independent.
    """
    a = _check_hermitian(as_matrix(h), tol)
    if method == "lapack":
        w, v = np.linalg.eigh(a)
    elif method == "jacobi":
        w, v = _jacobi_eigh(a)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return w, v


def eigvalsh(h: MatrixLike, tol: float = DEFAULT_TOL) -> np.ndarray:
    return np.linalg.eigvalsh(_check_hermitian(as_matrix(h), tol))


def trace_norm(h: MatrixLike, tol: float = DEFAULT_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eigvalsh(h, tol))))


def trace_norm_2x2(a, d, c):
    """Vectorized trace norm of Hermitian ``[[a, c], [conj(c), d]]``.

    The eigenvalues are ``(a + d)/2 +- sqrt((a - d)^2 + 4|c|^2)/2``, so the
    norm is the larger of ``|a + d|`` and the square root.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    root = np.sqrt((a - d) ** 2 + 4.0 * np.abs(c) ** 2)
    return np.maximum(np.abs(a + d), root)


def trace_distance(r1: MatrixLike, r2: MatrixLike) -> float:
    a, b = as_matrix(r1), as_matrix(r2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(a - b)


def helstrom(r1: MatrixLike, r2: MatrixLike, w: WeightPair) -> np.ndarray:
    """Helstrom matrix ``p1 * r1 - p2 * r2``."""
    a, b = as_matrix(r1), as_matrix(r2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return w.p1 * a - w.p2 * b


def hermitian_expm(h: MatrixLike, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h``, built from its eigen-decomposition."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def coherent_state(y: complex, nmax: int, renormalize: bool = True):
    """Truncated coherent state ``|y>`` on Fock levels ``0 .. nmax-1``.

    Returns ``(psi, deficit)`` where ``deficit = 1 - sum |c_n|^2`` is the
    probability weight lost by truncation, computed before renormalization.
    """
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    c = np.empty(nmax, dtype=complex)
    c[0] = np.exp(-abs(y) ** 2 / 2.0)
    for n in range(1, nmax):
        c[n] = c[n - 1] * y / np.sqrt(n)
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    if renormalize:
        c /= np.linalg.norm(c)
    return c, deficit


def fock_annihilation(nmax: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, nmax)), 1).astype(complex)


def basis_ket(k: int, dim: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return e


def projector(k: int, dim: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[k, k] = 1.0
    return p


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
# sigma^3 |j> = (-1)^(j+1) |j>: the excited state |1> carries +1.
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
