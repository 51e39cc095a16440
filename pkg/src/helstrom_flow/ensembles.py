"""Random instances for property suites.

States are ``G G^H / Tr(G G^H)`` with ``G`` a matrix of independent standard
complex Gaussians; unitaries are the QR-orthonormalized Gaussian matrix with
the phases of ``R``'s diagonal absorbed, which gives the Haar measure.
"""

import numpy as np

from .linalg import BipartiteState, DensityOperator, WeightPair


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    g = complex_gaussian(rng, (dim, rank or dim))
    rho = g @ g.conj().T
    return DensityOperator(rho / np.trace(rho).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(complex_gaussian(rng, (dim, dim)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = complex_gaussian(rng, (dim, dim))
    return 0.5 * (g + g.conj().T)


def random_bipartite(dim_s: int, dim_e: int, rng: np.random.Generator) -> BipartiteState:
    return BipartiteState(random_density(dim_s * dim_e, rng), dim_s, dim_e)


def random_weights(rng: np.random.Generator) -> WeightPair:
    return WeightPair(rng.random())


def random_zero_discord(dim_s: int, dim_e: int, rng: np.random.Generator) -> BipartiteState:
    """``sum_j q_j P_j (x) rho_E^j`` over a random orthonormal system basis."""
    u = random_unitary(dim_s, rng)
    q = rng.dirichlet(np.ones(dim_s))
    rho = np.zeros((dim_s * dim_e,) * 2, dtype=complex)
    for j in range(dim_s):
        p = np.outer(u[:, j], u[:, j].conj())
        rho += q[j] * np.kron(p, random_density(dim_e, rng).matrix)
    return BipartiteState(DensityOperator(rho), dim_s, dim_e)
