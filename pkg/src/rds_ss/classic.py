"""Volz-Heckathorn and sample-mean estimators, plus scenario descriptors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rds_ss.domain import RdsSample
from rds_ss.errors import DegenerateGroup, EmptySample, SampleExceedsPopulation, ValidationError


@dataclass(frozen=True)
class ScenarioDescriptors:
    """Realized or target network characteristics.

    ``homophily`` is ``inf`` when there are no infected-uninfected ties;
    ``homophily_degenerate`` flags that case.
    """

    activity_ratio: float
    homophily: float
    prevalence: float
    mean_degree: float
    homophily_degenerate: bool = False


def _arrays(sample: RdsSample):
    if sample.n == 0:
        raise EmptySample("estimator needs at least one respondent")
    d = np.asarray(sample.degrees, dtype=float)
    z = np.asarray(sample.outcomes, dtype=float)
    if np.any(d < 1):
        raise ValidationError("all degrees must be >= 1")
    return d, z


def hajek(z: Sequence[float], pi: Sequence[float]) -> float:
    """Weighted mean with weights ``1/pi`` normalised by their sum."""
    pi = np.asarray(pi, dtype=float)
    # scaling by min(pi) first makes equal weights exactly 1
    w = 1.0 / (pi / pi.min())
    return float(np.dot(w, np.asarray(z, dtype=float)) / w.sum())


def mu_vh(sample: RdsSample) -> float:
    """Volz-Heckathorn estimate: inclusion taken proportional to degree."""
    d, z = _arrays(sample)
    return hajek(z, d)


def mu_mean(sample: RdsSample) -> float:
    _, z = _arrays(sample)
    return float(z.mean())


def activity_ratio(degrees: Sequence[float], z: Sequence[float]) -> float:
    """Mean degree of the ``z=1`` group divided by mean degree of the ``z=0`` group."""
    d = np.asarray(degrees, dtype=float)
    z = np.asarray(z, dtype=float)
    n1 = z.sum()
    n0 = (1 - z).sum()
    s1 = (d * z).sum()
    s0 = (d * (1 - z)).sum()
    if n1 == 0 or n0 == 0:
        raise DegenerateGroup("both groups must be non-empty")
    if s0 == 0:
        raise DegenerateGroup("uninfected group has zero total degree")
    return float((s1 / n1) * (n0 / s0))


def nhat_bounds(N: int, n: int, rounded: bool = False):
    """Under- and over-estimates ``N -/+ (N - n)/2`` of the population size.

    With ``rounded=True`` both are rounded half-up so they can be used as
    population sizes.
    """
    if n > N:
        raise SampleExceedsPopulation(f"n={n} exceeds N={N}")
    half = (N - n) / 2
    lo, hi = N - half, N + half
    if rounded:
        return int(math.floor(lo + 0.5)), int(math.floor(hi + 0.5))
    return lo, hi
