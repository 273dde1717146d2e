"""Synthetic populations: two-group mixing-matrix graphs and configuration graphs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from rds_ss.classic import ScenarioDescriptors, activity_ratio
from rds_ss.domain import DegreeDistribution
from rds_ss.errors import DegenerateGroup, InfeasibleParams, OddStubCount, ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetParams:
    """Targets for a two-group (infected/uninfected) network.

    ``w`` is the infected/uninfected mean-degree ratio and ``R`` the ratio of
    infected-infected to infected-uninfected tie probabilities.
    """

    N: int
    prevalence: float = 0.2
    mean_degree: float = 7.0
    w: float = 1.0
    R: float = 5.0

    def __post_init__(self):
        if self.N < 4:
            raise ValidationError("N must be at least 4")
        if not 0 < self.prevalence < 1:
            raise ValidationError("prevalence must lie in (0, 1)")
        if self.mean_degree <= 0 or self.w <= 0 or self.R <= 0:
            raise ValidationError("mean_degree, w and R must be positive")

    @property
    def n_infected(self) -> int:
        # round half up
        return int(math.floor(self.prevalence * self.N + 0.5))


@dataclass(frozen=True)
class MixingProbs:
    p_II: float
    p_IU: float
    p_UU: float

    def as_tuple(self):
        return (self.p_II, self.p_IU, self.p_UU)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected (multi)graph on nodes ``0..N-1`` with a binary attribute ``z``.

    ``edges`` is an (E, 2) integer array; a self-loop ``(i, i)`` adds 2 to the
    degree of ``i``.
    """

    N: int
    z: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.int8).reshape(-1)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(z) != self.N:
            raise ValidationError("z must have one entry per node")
        if len(edges) and (edges.min() < 0 or edges.max() >= self.N):
            raise ValidationError("edge endpoint out of range")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "edges", edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.N)

    @cached_property
    def _csr(self):
        # neighbour lists without self-loops, keeping multi-edge multiplicity
        e = self.edges[self.edges[:, 0] != self.edges[:, 1]]
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(self.N + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.N), out=indptr[1:])
        return indptr, dst

    def neighbors(self, i: int) -> np.ndarray:
        indptr, dst = self._csr
        return dst[indptr[i] : indptr[i + 1]]

    def has_self_loops(self) -> bool:
        return bool(np.any(self.edges[:, 0] == self.edges[:, 1]))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.N == other.N
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.edges, other.edges)
        )


def solve_mixing_probs(params: NetParams) -> MixingProbs:
    """Closed-form dyad probabilities hitting mean degree, ``w`` and ``R`` in expectation."""
    N, w, R = params.N, params.w, params.R
    NI = params.n_infected
    NU = N - NI
    if NI < 2 or NU < 2:
        raise InfeasibleParams(f"groups of size {NI} and {NU} are too small", cell="groups")
    d_I = params.mean_degree * N * w / (NI * w + NU)
    p_IU = d_I / (R * (NI - 1) + NU)
    p_II = R * p_IU
    p_UU = (d_I / w - p_IU * NI) / (NU - 1)
    for name, p in (("II", p_II), ("IU", p_IU), ("UU", p_UU)):
        if not 0 <= p <= 1:
            raise InfeasibleParams(f"dyad probability for cell {name} is {p:.4g}", cell=name)
    return MixingProbs(p_II, p_IU, p_UU)


def expected_descriptors(params: NetParams, probs: MixingProbs) -> ScenarioDescriptors:
    """Expected mean degree, activity ratio and R implied by cell probabilities."""
    NI = params.n_infected
    NU = params.N - NI
    d_I = probs.p_II * (NI - 1) + probs.p_IU * NU
    d_U = probs.p_IU * NI + probs.p_UU * (NU - 1)
    mean = (NI * d_I + NU * d_U) / params.N
    return ScenarioDescriptors(d_I / d_U, probs.p_II / probs.p_IU, NI / params.N, mean)


def _infected_labels(N: int, NI: int, rng: np.random.Generator) -> np.ndarray:
    z = np.zeros(N, dtype=np.int8)
    z[rng.permutation(N)[:NI]] = 1
    return z


def sample_mixing_graph(
    params: NetParams, rng, probs: Optional[MixingProbs] = None
) -> Graph:
    """Draw every dyad independently with the probability of its mixing cell."""
    rng = np.random.default_rng(rng)
    if probs is None:
        probs = solve_mixing_probs(params)
    N = params.N
    z = _infected_labels(N, params.n_infected, rng)
    iu, ju = np.triu_indices(N, k=1)
    cell = z[iu].astype(np.int64) + z[ju]  # 2 = II, 1 = IU, 0 = UU
    p = np.array([probs.p_UU, probs.p_IU, probs.p_II])[cell]
    keep = rng.random(len(iu)) < p
    return Graph(N, z, np.column_stack([iu[keep], ju[keep]]))


def sample_configuration_graph(
    dist: DegreeDistribution, rng, z: Optional[np.ndarray] = None
) -> Graph:
    """Uniform random matching of edge stubs; loops and multi-edges are kept."""
    rng = np.random.default_rng(rng)
    sizes = np.asarray(dist.sizes(), dtype=np.int64)
    if sizes.sum() % 2:
        raise OddStubCount(f"total degree {sizes.sum()} is odd")
    N = len(sizes)
    if dist.K >= math.sqrt(N):
        log.warning("max degree %d >= sqrt(N)=%.1f: loops/multi-edges not negligible",
                    dist.K, math.sqrt(N))
    stubs = np.repeat(np.arange(N), sizes)
    rng.shuffle(stubs)
    edges = stubs.reshape(-1, 2)
    if z is None:
        z = np.zeros(N, dtype=np.int8)
    return Graph(N, z, edges)


def graph_descriptors(g: Graph) -> ScenarioDescriptors:
    """Realized mean degree, activity ratio, homophily ratio and prevalence."""
    deg = g.degrees
    z = g.z
    NI = int(z.sum())
    NU = g.N - NI
    if NI == 0 or NU == 0:
        raise DegenerateGroup("both groups must be non-empty")
    w = activity_ratio(deg, z)
    e = g.edges[g.edges[:, 0] != g.edges[:, 1]]
    cell = z[e[:, 0]].astype(int) + z[e[:, 1]]
    e_II = int(np.sum(cell == 2))
    e_IU = int(np.sum(cell == 1))
    dens_II = e_II / (NI * (NI - 1) / 2) if NI > 1 else 0.0
    dens_IU = e_IU / (NI * NU)
    if e_IU == 0:
        R, flag = math.inf, True
    else:
        R, flag = dens_II / dens_IU, False
    return ScenarioDescriptors(w, R, NI / g.N, float(deg.mean()), flag)
