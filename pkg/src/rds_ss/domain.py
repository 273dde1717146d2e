"""Core data types shared by the estimators, simulators and CLI."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from rds_ss.errors import ValidationError

log = logging.getLogger(__name__)

SUM_TOL = 1e-9


@dataclass(frozen=True)
class DegreeDistribution:
    """Population degree counts ``{k: N_k}``.

    Counts are integers when the distribution describes a concrete population
    and may be non-negative reals while the SS iteration is running. ``N`` is
    the (integer) population size the counts must add up to.
    """

    counts: Mapping[int, float]
    N: int

    def __post_init__(self):
        clean = {}
        for k, c in sorted(self.counts.items()):
            k = int(k)
            if k < 1:
                raise ValidationError(f"degree class {k} is not positive")
            if c < 0 or not math.isfinite(c):
                raise ValidationError(f"count for degree {k} is {c}")
            clean[k] = c
        object.__setattr__(self, "counts", clean)
        if self.N < 1:
            raise ValidationError("population size must be positive")
        total = sum(clean.values())
        if abs(total - self.N) > SUM_TOL * max(1.0, self.N):
            raise ValidationError(f"counts sum to {total}, expected N={self.N}")

    @property
    def K(self) -> int:
        return max((k for k, c in self.counts.items() if c > 0), default=0)

    @property
    def is_integer(self) -> bool:
        return all(float(c).is_integer() for c in self.counts.values())

    @property
    def total_degree(self) -> float:
        return sum(k * c for k, c in self.counts.items())

    def sizes(self) -> list[int]:
        """Expand an integer distribution into a per-unit size list."""
        if not self.is_integer:
            raise ValidationError("cannot expand a real-valued distribution")
        return [k for k, c in self.counts.items() for _ in range(int(c))]

    @classmethod
    def from_sizes(cls, sizes: Iterable[int]) -> "DegreeDistribution":
        sizes = list(sizes)
        return cls(dict(Counter(int(s) for s in sizes)), len(sizes))


@dataclass(frozen=True)
class RdsRecord:
    id: str
    recruiter_id: Optional[str]
    degree: int
    outcome: float
    wave: int = 0

    @property
    def is_seed(self) -> bool:
        return self.recruiter_id is None


@dataclass(frozen=True)
class RdsSample:
    """An ordered RDS sample.

    Construction does not validate; call :func:`validate_sample` to get the
    list of problems. ``exhausted`` is set by the simulator when recruitment
    ran dry before the target size was reached.
    """

    records: tuple[RdsRecord, ...]
    exhausted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def degrees(self) -> list[int]:
        return [r.degree for r in self.records]

    @property
    def outcomes(self) -> list[float]:
        return [r.outcome for r in self.records]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @classmethod
    def from_arrays(cls, degrees: Sequence[int], outcomes: Sequence[float]) -> "RdsSample":
        """Build a sample of unlinked respondents (every record is a seed)."""
        if len(degrees) != len(outcomes):
            raise ValidationError("degrees and outcomes differ in length")
        return cls(
            tuple(
                RdsRecord(str(i), None, int(d), float(z), 0)
                for i, (d, z) in enumerate(zip(degrees, outcomes))
            )
        )


@dataclass(frozen=True)
class InclusionMap:
    """Mapping from degree to inclusion probability for samples of size ``n``
    drawn from a population of ``N`` units.

    ``provisional`` marks the proportional starting map of the SS iteration,
    whose values may exceed one.
    """

    probs: Mapping[int, float]
    n: int
    N: int
    provisional: bool = False

    def __post_init__(self):
        clean = {}
        for k, p in sorted(self.probs.items()):
            p = float(p)
            if not p > 0 or not math.isfinite(p):
                raise ValidationError(f"inclusion probability for degree {k} is {p}")
            if not self.provisional and p > 1 + 1e-12:
                raise ValidationError(f"inclusion probability for degree {k} exceeds 1: {p}")
            clean[int(k)] = min(p, 1.0) if not self.provisional else p
        object.__setattr__(self, "probs", clean)

    def __getitem__(self, k: int) -> float:
        return self.probs[k]

    def __contains__(self, k) -> bool:
        return k in self.probs


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings for the SS fit.

    ``trials`` is the number of simulated samples per iteration, ``iterations``
    the number of fixed-point passes. ``seed=None`` draws a fresh seed at fit
    time (it is echoed back in the result).
    """

    trials: int = 2000
    iterations: int = 3
    seed: Optional[int] = None
    isotonic: bool = True
    tol: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.iterations < 1:
            raise ValidationError("trials and iterations must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=seed)


def degree_counts(sample: RdsSample | Iterable[int]) -> dict[int, int]:
    """Observed number of respondents in each degree class."""
    degrees = sample.degrees if isinstance(sample, RdsSample) else sample
    return dict(sorted(Counter(int(d) for d in degrees).items()))


class Violation(NamedTuple):
    code: str
    record_id: Optional[str]
    message: str


def validate_sample(sample: RdsSample, N: Optional[int] = None) -> list[Violation]:
    out = []
    seen = {}
    for pos, rec in enumerate(sample.records):
        if rec.id in seen:
            out.append(Violation("DuplicateId", rec.id, f"id {rec.id!r} repeated"))
        if rec.degree < 1:
            out.append(Violation("DegreeNotPositive", rec.id, f"degree {rec.degree}"))
        elif N is not None and rec.degree > N - 1:
            out.append(
                Violation("DegreeExceedsPopulation", rec.id, f"degree {rec.degree} > N-1={N - 1}")
            )
        if not math.isfinite(rec.outcome):
            out.append(Violation("OutcomeNotFinite", rec.id, f"outcome {rec.outcome}"))
        if rec.recruiter_id is None:
            if rec.wave != 0:
                out.append(Violation("SeedWaveNotZero", rec.id, f"seed has wave {rec.wave}"))
        elif rec.recruiter_id not in seen:
            out.append(
                Violation(
                    "UnknownRecruiter",
                    rec.id,
                    f"recruiter {rec.recruiter_id!r} does not precede this record",
                )
            )
        elif rec.wave != sample.records[seen[rec.recruiter_id]].wave + 1:
            out.append(Violation("WaveMismatch", rec.id, "wave is not recruiter wave + 1"))
        seen.setdefault(rec.id, pos)
    if N is not None and sample.n > N:
        out.append(Violation("SampleExceedsPopulation", None, f"n={sample.n} > N={N}"))
    return out


def repair_sample(sample: RdsSample, N: Optional[int] = None) -> RdsSample:
    """Reassign degree 0 to 1 and cap degrees at N-1, logging each change."""
    fixed = []
    for rec in sample.records:
        d = rec.degree
        if d < 1:
            log.warning("record %s: degree %d reassigned to 1", rec.id, d)
            d = 1
        if N is not None and d > N - 1:
            log.warning("record %s: degree %d capped at %d", rec.id, d, N - 1)
            d = N - 1
        fixed.append(rec if d == rec.degree else replace(rec, degree=d))
    return RdsSample(tuple(fixed), sample.exhausted)


def require_valid(sample: RdsSample, N: Optional[int] = None) -> None:
    problems = validate_sample(sample, N)
    if problems:
        from rds_ss import errors

        # a sample larger than the population explains any degree caps it trips
        codes = [v.code for v in problems]
        first = "SampleExceedsPopulation" if "SampleExceedsPopulation" in codes else codes[0]
        cls = getattr(errors, first, ValidationError)
        if not (isinstance(cls, type) and issubclass(cls, ValidationError)):
            cls = ValidationError
        raise cls("; ".join(f"{v.code}: {v.message}" for v in problems[:5]))
