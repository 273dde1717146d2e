"""Successive sampling (PPSWOR) draws and inclusion probabilities.

Three routes to first-order inclusion probabilities live here:

* ``exact_inclusion`` / ``exact_class_inclusion`` - exact dynamic programs over
  the sequential selection law, usable for small populations;
* ``fattorini_unit_probs`` - per-unit Monte-Carlo estimates ``(U_i+1)/(M+1)``;
* ``estimate_inclusion_by_class`` - the degree-class Monte-Carlo estimates
  ``(U_k+1)/(M*N_k+1)`` that drive the SS fit.

Monte-Carlo replicates are simulated in fixed blocks of ``BLOCK`` replicates.
Block ``b`` draws from ``default_rng([seed, b])``, so results depend only on
the seed, never on how blocks are spread across workers.
"""

from __future__ import annotations

import secrets
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from rds_ss.domain import DegreeDistribution, InclusionMap
from rds_ss.errors import OracleLimitExceeded, SampleExceedsPopulation, ValidationError

BLOCK = 256
EXACT_UNIT_LIMIT = 12
EXACT_CLASS_STATE_LIMIT = 2_000_000

SeedLike = Union[None, int, Sequence[int], np.random.Generator]


def resolve_seed(rng: SeedLike) -> int:
    """Turn an int, a Generator or None into a 63-bit master seed."""
    if rng is None:
        return secrets.randbits(63)
    if isinstance(rng, (list, tuple)):
        rng = np.random.default_rng(rng)
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(2**63))
    return int(rng)


def derived_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *(int(k) for k in keys)])


@dataclass(frozen=True)
class PopulationSizes:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if any(s < 1 for s in sizes):
            raise ValidationError("unit sizes must be >= 1")
        object.__setattr__(self, "sizes", sizes)

    @property
    def N(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)


def _as_pop(pop) -> PopulationSizes:
    return pop if isinstance(pop, PopulationSizes) else PopulationSizes(tuple(pop))


def _check_n(n: int, N: int) -> None:
    if n > N:
        raise SampleExceedsPopulation(f"sample size {n} exceeds population size {N}")
    if n < 0:
        raise ValidationError("sample size must be non-negative")


def draw_ppswor(pop, n: int, rng: SeedLike = None) -> list[int]:
    """Draw ``n`` distinct unit indices by successive sampling, in draw order.

    Sorting ``E_i / d_i`` with ``E_i ~ Exp(1)`` reproduces the sequential law:
    the smallest key is unit ``i`` with probability ``d_i / sum(d)``, and by
    memorylessness the remaining keys are again exponential with the same
    rates, so each later position follows ``d_i / (2E - sum of drawn sizes)``.
    """
    pop = _as_pop(pop)
    _check_n(n, pop.N)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    keys = rng.exponential(size=pop.N) / np.asarray(pop.sizes, dtype=float)
    return [int(i) for i in np.argsort(keys, kind="stable")[:n]]


def _subset_dp(sizes: Sequence[int]) -> np.ndarray:
    """Exact inclusion probabilities for every sample size at once.

    Row ``n`` of the result holds ``pi_i`` for samples of size ``n``. The DP
    runs over sampled sets: P(S) = sum_{i in S} P(S - i) * d_i / (2E - d(S - i)),
    which is the sum over all orderings of the product of step probabilities.
    """
    N = len(sizes)
    d = np.asarray(sizes, dtype=float)
    total = d.sum()
    nmask = 1 << N
    prob = np.zeros(nmask)
    prob[0] = 1.0
    mass = np.zeros(nmask)
    for m in range(1, nmask):
        mass[m] = mass[m & (m - 1)] + d[(m & -m).bit_length() - 1]
    popcount = np.array([bin(m).count("1") for m in range(nmask)])
    pi = np.zeros((N + 1, N))
    for m in range(nmask):
        p = prob[m]
        if p == 0.0:
            continue
        k = popcount[m]
        for i in range(N):
            bit = 1 << i
            if m & bit:
                pi[k, i] += p
            else:
                prob[m | bit] += p * d[i] / (total - mass[m])
    return pi


def exact_inclusion(pop, n: int) -> np.ndarray:
    """Exact PPSWOR inclusion probabilities for a population of at most 12 units."""
    pop = _as_pop(pop)
    _check_n(n, pop.N)
    if pop.N > EXACT_UNIT_LIMIT:
        raise OracleLimitExceeded(f"N={pop.N} exceeds enumeration limit {EXACT_UNIT_LIMIT}")
    return _subset_dp(pop.sizes)[n].copy()


def exact_inclusion_all(pop) -> np.ndarray:
    """``exact_inclusion`` for n = 0..N, as an (N+1, N) array."""
    pop = _as_pop(pop)
    if pop.N > EXACT_UNIT_LIMIT:
        raise OracleLimitExceeded(f"N={pop.N} exceeds enumeration limit {EXACT_UNIT_LIMIT}")
    return _subset_dp(pop.sizes)


def exact_class_inclusion(dist: DegreeDistribution, n: int) -> InclusionMap:
    """Exact per-class inclusion probabilities via a DP over class counts.

    The state is the vector of how many units of each class have been drawn;
    a step selects class ``k`` with probability ``k (N_k - s_k) / (2E - sum l s_l)``.
    Feasible whenever ``prod(N_k + 1)`` is moderate, independent of N itself.
    """
    if not dist.is_integer:
        raise ValidationError("exact class inclusion needs an integer population")
    _check_n(n, dist.N)
    if n < 1:
        raise ValidationError("sample size must be >= 1")
    ks = [k for k, c in dist.counts.items() if c > 0]
    caps = [int(dist.counts[k]) for k in ks]
    if np.prod([c + 1 for c in caps], dtype=float) > EXACT_CLASS_STATE_LIMIT:
        raise OracleLimitExceeded("too many class-count states for exact evaluation")
    total = sum(k * c for k, c in zip(ks, caps))
    layer = {tuple(0 for _ in ks): 1.0}
    for _ in range(n):
        nxt: dict[tuple, float] = {}
        for state, p in layer.items():
            used = sum(k * s for k, s in zip(ks, state))
            left = total - used
            for j, (k, cap) in enumerate(zip(ks, caps)):
                free = cap - state[j]
                if free:
                    child = state[:j] + (state[j] + 1,) + state[j + 1 :]
                    nxt[child] = nxt.get(child, 0.0) + p * k * free / left
        layer = nxt
    expected = np.zeros(len(ks))
    for state, p in layer.items():
        expected += p * np.asarray(state, dtype=float)
    return InclusionMap({k: expected[j] / caps[j] for j, k in enumerate(ks)}, n, dist.N)


def _class_block(ks: np.ndarray, caps: np.ndarray, n: int, reps: int, rng) -> np.ndarray:
    """Simulate ``reps`` class-level successive samples; return per-class draw totals.

    Weights are integers (``k * remaining``), so the class chosen at each step is
    obtained by exact integer comparison against a uniform integer in [0, total).
    """
    rem = np.tile(caps, (reps, 1))
    rows = np.arange(reps)
    for _ in range(n):
        cum = np.cumsum(rem * ks, axis=1)
        u = rng.integers(0, cum[:, -1])
        idx = (cum <= u[:, None]).sum(axis=1)
        rem[rows, idx] -= 1
    return (caps[None, :] - rem).sum(axis=0)


def _run_blocks(fn, M: int, seed: int, workers: int) -> np.ndarray:
    sizes = [min(BLOCK, M - start) for start in range(0, M, BLOCK)]
    jobs = [(b, size) for b, size in enumerate(sizes)]

    def one(job):
        b, size = job
        return fn(size, derived_rng(seed, b))

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(one, jobs))
    else:
        parts = [one(j) for j in jobs]
    # integer sums: order of aggregation cannot change the result
    return np.sum(parts, axis=0)


def class_draw_totals(
    dist: DegreeDistribution, n: int, M: int, rng: SeedLike = None, workers: int = 1
) -> dict[int, int]:
    """``U_k``: total number of class-``k`` units drawn across ``M`` simulated samples."""
    if not dist.is_integer:
        raise ValidationError("simulation needs an integer-valued population")
    _check_n(n, dist.N)
    if M < 1:
        raise ValidationError("M must be >= 1")
    ks = np.array([k for k, c in dist.counts.items() if c > 0], dtype=np.int64)
    caps = np.array([int(dist.counts[k]) for k in ks], dtype=np.int64)
    seed = resolve_seed(rng)
    totals = _run_blocks(lambda size, g: _class_block(ks, caps, n, size, g), M, seed, workers)
    return {int(k): int(u) for k, u in zip(ks, totals)}


def estimate_inclusion_by_class(
    dist: DegreeDistribution, n: int, M: int, rng: SeedLike = None, workers: int = 1
) -> InclusionMap:
    """Monte-Carlo inclusion map ``f(k) = (U_k + 1) / (M N_k + 1)``."""
    U = class_draw_totals(dist, n, M, rng, workers)
    probs = {k: (u + 1) / (M * int(dist.counts[k]) + 1) for k, u in U.items()}
    return InclusionMap(probs, n, dist.N)


def fattorini_unit_probs(pop, n: int, M: int, rng: SeedLike = None, workers: int = 1) -> np.ndarray:
    """Per-unit Monte-Carlo inclusion probabilities ``(U_i + 1) / (M + 1)``."""
    pop = _as_pop(pop)
    _check_n(n, pop.N)
    d = np.asarray(pop.sizes, dtype=float)
    N = pop.N
    seed = resolve_seed(rng)

    def block(size, g):
        if n == N:
            return np.full(N, size, dtype=np.int64)
        if n == 0:
            return np.zeros(N, dtype=np.int64)
        keys = g.exponential(size=(size, N)) / d
        picked = np.argpartition(keys, n - 1, axis=1)[:, :n]
        return np.bincount(picked.ravel(), minlength=N)

    U = _run_blocks(block, M, seed, workers)
    return (U + 1) / (M + 1)


def binomial_se(p: float, trials: float) -> float:
    return float(np.sqrt(max(p * (1 - p), 0.0) / trials))

