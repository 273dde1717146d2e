"""Chain-referral (RDS) sampling on a graph."""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from rds_ss.domain import RdsRecord, RdsSample
from rds_ss.errors import InsufficientEligibleNodes, SampleExceedsPopulation, ValidationError
from rds_ss.netgen import Graph

log = logging.getLogger(__name__)


class SeedRegime(str, enum.Enum):
    RANDOM = "RANDOM"
    ALL_INFECTED = "ALL_INFECTED"
    ALL_UNINFECTED = "ALL_UNINFECTED"


@dataclass(frozen=True)
class RdsDesign:
    target_n: int
    seed_count: int = 10
    coupons: int = 2
    seed_regime: SeedRegime = SeedRegime.RANDOM
    reseed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "seed_regime", SeedRegime(self.seed_regime))
        if not 1 <= self.seed_count <= self.target_n:
            raise ValidationError("need 1 <= seed_count <= target_n")
        if self.coupons < 1:
            raise ValidationError("coupons must be >= 1")


def _weighted_order(weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Positions of ``k`` items drawn successively with probability proportional to weight."""
    keys = rng.exponential(size=len(weights)) / weights
    return np.argsort(keys, kind="stable")[:k]


def _eligible(g: Graph, regime: SeedRegime, taken=None) -> np.ndarray:
    mask = g.degrees > 0
    if regime is SeedRegime.ALL_INFECTED:
        mask &= g.z == 1
    elif regime is SeedRegime.ALL_UNINFECTED:
        mask &= g.z == 0
    if taken is not None:
        mask &= ~taken
    return np.flatnonzero(mask)


def draw_seeds(g: Graph, design: RdsDesign, rng) -> list[int]:
    """Successive sampling of seeds on degree from the regime's eligible nodes."""
    rng = np.random.default_rng(rng)
    pool = _eligible(g, design.seed_regime)
    if len(pool) < design.seed_count:
        raise InsufficientEligibleNodes(
            f"{len(pool)} eligible nodes for {design.seed_count} seeds "
            f"under regime {design.seed_regime.value}"
        )
    picked = _weighted_order(g.degrees[pool].astype(float), design.seed_count, rng)
    return [int(pool[i]) for i in picked]


def run_rds(g: Graph, design: RdsDesign, rng) -> RdsSample:
    """Simulate RDS: breadth-first referral with ``coupons`` recruits per respondent.

    Respondents are processed in recruitment order. Each recruits up to
    ``coupons`` distinct alters uniformly from its not-yet-sampled neighbours
    (multi-edges count with multiplicity). Recruitment stops as soon as the
    sample reaches ``target_n``. If every chain dies first the sample is
    returned with ``exhausted=True``, unless ``design.reseed`` asks for a new
    degree-proportional seed among unsampled nodes.
    """
    rng = np.random.default_rng(rng)
    if design.target_n > g.N:
        raise SampleExceedsPopulation(f"target {design.target_n} exceeds N={g.N}")
    seeds = draw_seeds(g, design, rng)
    sampled = np.zeros(g.N, dtype=bool)
    records: list[RdsRecord] = []
    wave = {}
    queue: deque[int] = deque()

    def enroll(node, recruiter):
        sampled[node] = True
        wave[node] = 0 if recruiter is None else wave[recruiter] + 1
        records.append(
            RdsRecord(
                str(node),
                None if recruiter is None else str(recruiter),
                int(g.degrees[node]),
                float(g.z[node]),
                wave[node],
            )
        )
        queue.append(node)

    for s in seeds:
        enroll(s, None)
    exhausted = False
    while len(records) < design.target_n:
        if not queue:
            if not design.reseed:
                exhausted = True
                break
            pool = _eligible(g, SeedRegime.RANDOM, taken=sampled)
            if not len(pool):
                exhausted = True
                break
            new = int(pool[_weighted_order(g.degrees[pool].astype(float), 1, rng)[0]])
            log.info("all chains ended at n=%d; reseeding with node %d", len(records), new)
            enroll(new, None)
            continue
        node = queue.popleft()
        alters = g.neighbors(node)
        alters = alters[~sampled[alters]]
        if not len(alters):
            continue
        ids, mult = np.unique(alters, return_counts=True)
        take = min(design.coupons, len(ids), design.target_n - len(records))
        for j in _weighted_order(mult.astype(float), take, rng):
            enroll(int(ids[j]), node)
    return RdsSample(tuple(records), exhausted)
