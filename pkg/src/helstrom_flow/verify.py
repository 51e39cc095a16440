"""Random-instance checks of the information-flow inequalities.

Every instance is generated from ``SeedSequence(seed, spawn_key=(suite, index))``
so any single instance can be replayed from ``(suite, seed, index)`` alone.
A margin is ``bound - observed``; an instance violates its suite when the
margin drops below ``-tol``. For the balance suite the margin is minus the
largest drift of the total information.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .correlations import correlation_witness, witness_bound
from .ensembles import random_bipartite, random_density, random_hermitian, random_weights
from .info import external_info_bound, increase_bound, information_breakdown
from .linalg import BipartiteState, DensityOperator, hermitian_expm, kron

SUITES = ("external_bound", "increase_bound", "witness_bound", "balance")
DEFAULT_DIMS = ((2, 2), (2, 3), (3, 3), (4, 4))


@dataclass(frozen=True)
class VerifySettings:
    seed: int = 0
    instances: int = 1000
    dims: tuple = DEFAULT_DIMS
    n_times: int = 20
    t_max: float = 10.0
    tol: float = 1e-10


@dataclass
class SuiteReport:
    suite: str
    instances: int
    worst_margin: float
    worst_index: int
    violations: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "instances": self.instances,
            "violations": len(self.violations),
            "violating_indices": [v["index"] for v in self.violations],
            "worst_margin": self.worst_margin,
            "worst_index": self.worst_index,
        }


def _rng(suite: str, seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(SUITES.index(suite), index))
    )


def _state(dim_s: int, dim_e: int, rng: np.random.Generator) -> BipartiteState:
    # Mix a product state with a random global state so that weakly
    # correlated (near-tight) instances show up alongside generic ones.
    prod = kron(random_density(dim_s, rng).matrix, random_density(dim_e, rng).matrix)
    full = random_bipartite(dim_s, dim_e, rng).matrix
    x = rng.random() ** 2
    return BipartiteState(DensityOperator((1 - x) * prod + x * full), dim_s, dim_e)


def _evolution(dim: int, settings: VerifySettings, rng: np.random.Generator):
    h = random_hermitian(dim, rng)
    times = np.linspace(0.0, settings.t_max, settings.n_times)
    return times, [hermitian_expm(h, t) for t in times], h


def run_instance(suite: str, index: int, settings: VerifySettings):
    """Returns ``(margin, payload)``; the payload holds the instance's matrices."""
    rng = _rng(suite, settings.seed, index)
    dim_s, dim_e = settings.dims[index % len(settings.dims)]
    s1 = _state(dim_s, dim_e, rng)
    w = random_weights(rng)
    payload = {"dims": [dim_s, dim_e], "p1": w.p1, "rho1": s1.matrix}

    if suite == "witness_bound":
        times, us, h = _evolution(dim_s * dim_e, settings, rng)
        traj = correlation_witness(s1, w, list(zip(times, us)))
        payload["hamiltonian"] = h
        return witness_bound(s1, w) - float(traj.values.max()), payload

    s2 = _state(dim_s, dim_e, rng)
    payload["rho2"] = s2.matrix
    if suite == "external_bound":
        info = information_breakdown(s1, s2, w)
        return external_info_bound(s1, s2, w) - info.external, payload

    times, us, h = _evolution(dim_s * dim_e, settings, rng)
    payload["hamiltonian"] = h
    infos = [information_breakdown(s1.evolve(u), s2.evolve(u), w) for u in us]
    if suite == "increase_bound":
        rise = max(b.internal for b in infos) - infos[0].internal
        return increase_bound(s1, s2, w) - rise, payload
    if suite == "balance":
        total = np.array([b.internal + b.external for b in infos])
        return -float(np.max(np.abs(total - total[0]))), payload
    raise ValueError(f"unknown suite {suite!r}")


def run_suite(suite: str, settings: VerifySettings, threads: int = 1) -> SuiteReport:
    def one(i):
        return run_instance(suite, i, settings)

    idx = range(settings.instances)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, idx))
    else:
        results = [one(i) for i in idx]
    margins = np.array([m for m, _ in results])
    worst = int(np.argmin(margins))
    report = SuiteReport(suite, settings.instances, float(margins[worst]), worst)
    for i, (m, payload) in enumerate(results):
        if m < -settings.tol:
            report.violations.append(
                {"suite": suite, "seed": settings.seed, "index": i, "margin": m, **encode(payload)}
            )
    return report


def run_verification(settings: VerifySettings, threads: int = 1) -> dict[str, SuiteReport]:
    return {suite: run_suite(suite, settings, threads) for suite in SUITES}


def encode(payload: dict) -> dict:
    """JSON-friendly copy: complex arrays become nested ``[re, im]`` pairs."""
    out = {}
    for k, v in payload.items():
        if isinstance(v, np.ndarray):
            out[k] = np.stack([v.real, v.imag], axis=-1).tolist()
        else:
            out[k] = v
    return out
