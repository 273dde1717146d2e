"""Successive-sampling estimator.

The population degree distribution and the degree -> inclusion probability
map are estimated jointly by alternating two steps: given a map, rescale the
observed degree counts into a population distribution; given a population,
simulate successive samples to get a new map. The final map supplies the
weights of a Hajek-type weighted mean.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from rds_ss.classic import hajek, mu_mean, mu_vh
from rds_ss.domain import (
    DegreeDistribution,
    InclusionMap,
    RdsSample,
    SimConfig,
    degree_counts,
    validate_sample,
)
from rds_ss.errors import (
    EmptySample,
    MissingPopulationSize,
    SampleExceedsPopulation,
    ValidationError,
    ZeroInclusionProbability,
)
from rds_ss.ppswor import estimate_inclusion_by_class, resolve_seed

log = logging.getLogger(__name__)

# (population, n, M, seed, workers) -> InclusionMap over the population's classes
InclusionFn = Callable[[DegreeDistribution, int, int, int, int], InclusionMap]


@dataclass(frozen=True)
class SsFit:
    nhat: DegreeDistribution
    inclusion: InclusionMap
    iterations_run: int
    moment_residual: float
    history: tuple = ()


@dataclass(frozen=True)
class Estimate:
    value: float
    method: str
    assumed_N: Optional[int] = None
    config: Optional[SimConfig] = None
    fit: Optional[SsFit] = None
    diagnostics: dict = field(default_factory=dict)


def _check_sizes(n: int, N: int) -> None:
    if n < 1:
        raise EmptySample("empty sample")
    if N < n:
        raise SampleExceedsPopulation(f"population size {N} is smaller than sample size {n}")


def initial_map(v: Mapping[int, int], N: int) -> InclusionMap:
    """Proportional starting map ``f(k) = (k/N) * sum_l v_l / l``.

    It is normalised so that ``sum_k v_k / f(k) = N`` and may exceed one for
    large degrees, hence it is marked provisional.
    """
    n = sum(v.values())
    _check_sizes(n, N)
    scale = sum(c / k for k, c in v.items()) / N
    return InclusionMap({k: k * scale for k in v}, n, N, provisional=True)


def update_degree_distribution(
    v: Mapping[int, int], f: InclusionMap | Mapping[int, float], N: int
) -> DegreeDistribution:
    """Population counts ``N_k = N * (v_k/f(k)) / sum_l (v_l/f(l))``."""
    probs = f.probs if isinstance(f, InclusionMap) else f
    ratios = {}
    for k, c in v.items():
        p = probs.get(k, 0.0)
        if not p > 0:
            raise ZeroInclusionProbability(f"no positive inclusion probability for degree {k}")
        ratios[k] = c / p
    total = sum(ratios.values())
    counts = {k: N * r / total for k, r in ratios.items()}
    # absorb floating drift so the counts add to N
    drift = N - sum(counts.values())
    kmax = max(counts, key=counts.get)
    counts[kmax] += drift
    return DegreeDistribution(counts, N)


def round_population(
    nhat: DegreeDistribution | Mapping[int, float], v: Mapping[int, int], N: int
) -> DegreeDistribution:
    """Largest-remainder rounding of real class counts, keeping ``N_k >= v_k``.

    The floor of every class is raised to its observed count so the observed
    sample could have come from the rounded population; the total is then
    brought back to N by largest remainders (up) or smallest remainders among
    classes with slack (down).
    """
    x = dict(nhat.counts if isinstance(nhat, DegreeDistribution) else nhat)
    base = {k: max(int(math.floor(x[k])), int(v.get(k, 0))) for k in x}
    diff = N - sum(base.values())
    while diff > 0:
        order = sorted(base, key=lambda k: (-(x[k] - base[k]), k))
        for k in order[:diff]:
            base[k] += 1
        diff = N - sum(base.values())
    while diff < 0:
        slack = [k for k in base if base[k] > v.get(k, 0)]
        if not slack:
            raise SampleExceedsPopulation("observed counts exceed the population size")
        k = max(slack, key=lambda k: (base[k] - x[k], -k))
        base[k] -= 1
        diff += 1
    return DegreeDistribution({k: c for k, c in base.items() if c > 0}, N)


def isotonic_map(f: InclusionMap, weights: Mapping[int, float]) -> InclusionMap:
    """Pool-adjacent-violators fit of ``f`` as a non-decreasing function of degree."""
    ks = sorted(f.probs)
    y = np.array([f.probs[k] for k in ks])
    w = np.array([max(float(weights.get(k, 1.0)), 1e-12) for k in ks])
    fitted = isotonic_regression(y, weights=w, increasing=True).x
    return InclusionMap(dict(zip(ks, fitted)), f.n, f.N)


def moment_residual(nhat: DegreeDistribution, f: InclusionMap, v: Mapping[int, int]) -> float:
    """``sum_k |N_k f(k) - v_k| / n``: how far the fit is from matching observed counts."""
    n = sum(v.values())
    return sum(abs(nhat.counts.get(k, 0.0) * f.probs[k] - c) for k, c in v.items()) / n


def _mc_inclusion(dist, n, M, seed, workers):
    return estimate_inclusion_by_class(dist, n, M, seed, workers)


def _census_fit(v: Mapping[int, int], N: int) -> SsFit:
    nhat = DegreeDistribution(dict(v), N)
    return SsFit(nhat, InclusionMap({k: 1.0 for k in v}, N, N), 0, 0.0)


def fit_ss(
    sample: RdsSample | Mapping[int, int],
    N: int,
    config: SimConfig = SimConfig(),
    inclusion_fn: Optional[InclusionFn] = None,
) -> SsFit:
    """Jointly estimate the population degree distribution and inclusion map.

    ``sample`` may be an :class:`RdsSample` or a ``{degree: count}`` mapping.
    ``inclusion_fn`` replaces the Monte-Carlo step, e.g. with an exact
    oracle in tests. Each iteration ``i`` simulates with seed
    ``(config.seed, i)``.
    """
    if isinstance(sample, RdsSample):
        problems = validate_sample(sample)
        if problems:
            raise ValidationError("; ".join(f"{p.code}: {p.message}" for p in problems[:5]))
        v = degree_counts(sample)
    else:
        v = {int(k): int(c) for k, c in sample.items() if c > 0}
    n = sum(v.values())
    _check_sizes(n, N)
    if N == n:
        return _census_fit(v, N)
    if config.seed is None:
        raise ValidationError("config.seed must be resolved before fitting")
    sim = inclusion_fn or _mc_inclusion

    f = initial_map(v, N)
    nhat = None
    history = []
    for i in range(config.iterations):
        nhat = update_degree_distribution(v, f, N)
        pop = round_population(nhat, v, N)
        seed = resolve_seed([config.seed, i])
        g = sim(pop, n, config.trials, seed, config.workers)
        g = InclusionMap({k: g.probs[k] for k in v}, n, N)
        if config.isotonic:
            g = isotonic_map(g, pop.counts)
        change = max(abs(g.probs[k] - f.probs[k]) / g.probs[k] for k in v)
        f = g
        history.append({"iteration": i + 1, "max_rel_change": change,
                        "residual": moment_residual(nhat, f, v)})
        log.debug("ss iteration %d: max rel change %.3g", i + 1, change)
        if config.tol is not None and change < config.tol:
            break
    return SsFit(nhat, f, len(history), moment_residual(nhat, f, v), tuple(history))


def _resolve_config(config: SimConfig) -> SimConfig:
    if config.seed is None:
        seed = resolve_seed(None)
        log.info("no seed given; using %d", seed)
        config = config.with_seed(seed)
    return config


def diagnostics_for(sample: RdsSample, N: int) -> dict:
    big = sum(1 for d in sample.degrees if d >= math.sqrt(N))
    out = {"degrees_at_least_sqrt_N": big}
    if sample.exhausted:
        out["exhausted"] = True
    return out


def mu_ss(
    sample: RdsSample,
    N: int,
    config: SimConfig = SimConfig(),
    inclusion_fn: Optional[InclusionFn] = None,
) -> Estimate:
    """SS estimate of the population mean of the outcome."""
    config = _resolve_config(config)
    fit = fit_ss(sample, N, config, inclusion_fn)
    pi = [fit.inclusion.probs[d] for d in sample.degrees]
    value = hajek(sample.outcomes, pi)
    diag = diagnostics_for(sample, N)
    diag["moment_residual"] = fit.moment_residual
    diag["iterations_run"] = fit.iterations_run
    return Estimate(value, "SS", N, config, fit, diag)


def estimate(
    sample: RdsSample, method: str, N: Optional[int] = None, config: SimConfig = SimConfig()
) -> Estimate:
    method = method.upper()
    if method == "SS":
        if N is None:
            raise MissingPopulationSize("the SS estimator needs a population size")
        return mu_ss(sample, N, config)
    if method == "VH":
        return Estimate(mu_vh(sample), "VH", N)
    if method == "MEAN":
        return Estimate(mu_mean(sample), "MEAN", N)
    raise ValidationError(f"unknown method {method!r}")


def sensitivity_sweep(
    sample: RdsSample, N_grid: Sequence[int], config: SimConfig = SimConfig()
) -> list[tuple[int, Estimate]]:
    """SS estimates over a grid of assumed population sizes, all from one seed."""
    for N in N_grid:
        if N < sample.n:
            raise SampleExceedsPopulation(f"grid point {N} is below the sample size {sample.n}")
    config = _resolve_config(config)
    return [(int(N), mu_ss(sample, int(N), config)) for N in N_grid]
