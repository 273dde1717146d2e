"""Replicated simulation studies and inclusion-curve tables."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from rds_ss.classic import mu_mean, mu_vh, nhat_bounds
from rds_ss.domain import DegreeDistribution, SimConfig
from rds_ss.errors import InfeasibleParams, ValidationError
from rds_ss.netgen import MixingProbs, NetParams, sample_mixing_graph, solve_mixing_probs
from rds_ss.ppswor import estimate_inclusion_by_class, resolve_seed
from rds_ss.rds_sim import RdsDesign, SeedRegime, run_rds
from rds_ss.ss import mu_ss

log = logging.getLogger(__name__)

ESTIMATORS = ("SS", "VH", "MEAN")
AssumedN = Union[str, int]  # "TRUE", "NHAT_S", "NHAT_L" or an explicit size

FRACTIONS = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95)
FULL_POPULATIONS = (1000, 835, 715, 625, 555, 525)
W_GRID = (0.5, 0.8, 1.0, 1.1, 1.4, 1.8, 2.5, 3.0)
R_GRID = (1, 2, 3, 5, 13)


@dataclass(frozen=True)
class Scenario:
    """One study cell.

    SS is evaluated once per entry of ``assumed_N``, always on the same
    samples as VH and MEAN.
    """

    name: str
    net: NetParams
    design: RdsDesign
    replicates: int = 200
    estimators: tuple[str, ...] = ("SS", "VH")
    assumed_N: tuple[AssumedN, ...] = ("TRUE",)
    sim: SimConfig = SimConfig(trials=500, iterations=3)
    probs: Optional[MixingProbs] = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ValidationError(f"unknown estimators {sorted(bad)}")
        for a in self.assumed_N:
            if not (isinstance(a, int) or a in ("TRUE", "NHAT_S", "NHAT_L")):
                raise ValidationError(f"bad assumed_N entry {a!r}")

    def labels(self) -> list[str]:
        out = []
        for est in self.estimators:
            if est == "SS":
                out.extend(ss_label(a) for a in self.assumed_N)
            else:
                out.append(est)
        return out


def ss_label(assumed: AssumedN) -> str:
    if assumed == "TRUE":
        return "SS"
    if isinstance(assumed, int):
        return f"SS[N={assumed}]"
    return f"SS[{assumed}]"


def assumed_size(assumed: AssumedN, N: int, n: int) -> int:
    if assumed == "TRUE":
        return N
    if isinstance(assumed, int):
        return assumed
    lo, hi = nhat_bounds(N, n, rounded=True)
    return lo if assumed == "NHAT_S" else hi


@dataclass
class SummaryRow:
    scenario: str
    estimator: str
    replicates: int
    mean: float
    bias: float
    variance: float
    mse: float
    se_bias: float
    exhausted: int = 0


@dataclass
class StudyResult:
    rows: list[SummaryRow]
    raw: dict = field(default_factory=dict)  # scenario -> {label: [...], "truth": [...], "n": [...]}
    seed: Optional[int] = None

    def row(self, scenario: str, estimator: str) -> SummaryRow:
        for r in self.rows:
            if r.scenario == scenario and r.estimator == estimator:
                return r
        raise KeyError((scenario, estimator))

    def errors(self, scenario: str, estimator: str) -> np.ndarray:
        raw = self.raw[scenario]
        return np.asarray(raw[estimator]) - np.asarray(raw["truth"])

    def to_dict(self) -> dict:
        return {"seed": self.seed, "rows": [asdict(r) for r in self.rows], "raw": self.raw}


def summarize(name: str, label: str, est: Sequence[float], truth: Sequence[float], exhausted=0):
    """Bias, variance and MSE of ``est - truth`` (population moments, so MSE = bias^2 + var)."""
    err = np.asarray(est, dtype=float) - np.asarray(truth, dtype=float)
    m = len(err)
    bias = float(err.mean())
    var = float(err.var())
    mse = float(np.mean(err**2))
    se = float(err.std(ddof=1) / math.sqrt(m)) if m > 1 else math.nan
    return SummaryRow(name, label, m, float(np.mean(est)), bias, var, mse, se, exhausted)


def run_replicate(scenario: Scenario, seed: int, index: int, rep: int) -> dict:
    """Graph -> RDS sample -> every requested estimator, from one derived seed."""
    base = [seed, index, rep]
    probs = scenario.probs or solve_mixing_probs(scenario.net)
    g = sample_mixing_graph(scenario.net, base + [0], probs)
    sample = run_rds(g, scenario.design, base + [1])
    ss_seed = resolve_seed(base + [2])
    out = {"truth": float(g.z.mean()), "n": sample.n, "exhausted": sample.exhausted}
    for est in scenario.estimators:
        if est == "VH":
            out["VH"] = mu_vh(sample)
        elif est == "MEAN":
            out["MEAN"] = mu_mean(sample)
        else:
            for a in scenario.assumed_N:
                N_a = assumed_size(a, g.N, sample.n)
                cfg = scenario.sim.with_seed(ss_seed)
                out[ss_label(a)] = mu_ss(sample, N_a, cfg).value
    return out


def _task(args):
    scenario, seed, index, rep = args
    return run_replicate(scenario, seed, index, rep)


def run_study(scenarios: Sequence[Scenario], seed=None, workers: int = 1) -> StudyResult:
    seed = resolve_seed(seed)
    for i, sc in enumerate(scenarios):
        if sc.probs is None:
            try:
                solve_mixing_probs(sc.net)
            except InfeasibleParams as e:
                raise InfeasibleParams(f"scenario {i} ({sc.name}): {e}", e.cell) from e
    tasks = [(sc, seed, i, r) for i, sc in enumerate(scenarios) for r in range(sc.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_task, tasks, chunksize=8))
    else:
        results = [_task(t) for t in tasks]

    rows, raw = [], {}
    pos = 0
    for sc in scenarios:
        chunk = results[pos : pos + sc.replicates]
        pos += sc.replicates
        truth = [c["truth"] for c in chunk]
        n_exh = sum(c["exhausted"] for c in chunk)
        raw[sc.name] = {"truth": truth, "n": [c["n"] for c in chunk]}
        for label in sc.labels():
            vals = [c[label] for c in chunk]
            raw[sc.name][label] = vals
            rows.append(summarize(sc.name, label, vals, truth, n_exh))
    return StudyResult(rows, raw, seed)


def inclusion_curves(
    dist: DegreeDistribution, n_list: Sequence[int], config: SimConfig = SimConfig()
) -> list[dict]:
    """Degree -> inclusion probability tables for several sample sizes.

    Alongside each simulated curve (``kind="ss"``) the proportional mapping
    ``n k / sum_l l N_l`` is emitted as ``kind="proportional"``; it can exceed 1.
    """
    seed = resolve_seed(config.seed)
    rows = []
    total = dist.total_degree
    for j, n in enumerate(n_list):
        if n > dist.N:
            raise ValidationError(f"n={n} exceeds N={dist.N}")
        f = estimate_inclusion_by_class(dist, n, config.trials, [seed, j], config.workers)
        for k, p in f.probs.items():
            rows.append({"k": k, "n": n, "n_over_N": n / dist.N, "pi": p, "kind": "ss"})
        for k in f.probs:
            rows.append(
                {"k": k, "n": n, "n_over_N": n / dist.N, "pi": n * k / total, "kind": "proportional"}
            )
    return rows


# presets ---------------------------------------------------------------------------


def _scale(scale: str):
    if scale == "paper":
        return dict(n=500, pops=FULL_POPULATIONS, reps=1000, sim=SimConfig(trials=500, iterations=3))
    if scale == "desk":
        n = 125
        pops = tuple(int(math.floor(n / f + 0.5)) for f in FRACTIONS)
        return dict(n=n, pops=pops, reps=200, sim=SimConfig(trials=500, iterations=3))
    raise ValidationError(f"unknown preset scale {scale!r}")


def preset(name: str, replicates: Optional[int] = None, trials: Optional[int] = None) -> list[Scenario]:
    """Scenario grids mirroring the published study layouts.

    ``name`` is ``<study>-<scale>`` with study in fig1/fig3/fig6/table2 and
    scale ``desk`` (N <= 250) or ``paper`` (N up to 1000, long-running).
    """
    try:
        study, scale = name.rsplit("-", 1)
    except ValueError:
        raise ValidationError(f"preset must look like 'fig1-desk', got {name!r}") from None
    s = _scale(scale)
    n, reps, sim = s["n"], replicates or s["reps"], s["sim"]
    if trials:
        sim = SimConfig(trials=trials, iterations=sim.iterations)
    pops = s["pops"]
    frac_of = dict(zip(pops, FRACTIONS))
    out = []

    def add(tag, N, w=1.0, R=5.0, regime=SeedRegime.RANDOM, estimators=("SS", "VH"),
            assumed=("TRUE",)):
        out.append(
            Scenario(
                name=tag,
                net=NetParams(N, 0.2, 7.0, w, R),
                design=RdsDesign(n, 10, 2, regime, reseed=True),
                replicates=reps,
                estimators=estimators,
                assumed_N=assumed,
                sim=sim,
            )
        )

    if study == "fig1":
        for N in pops:
            for w in W_GRID:
                add(f"frac={frac_of[N]}|w={w}", N, w=w)
    elif study == "fig3":
        for N in pops:
            add(f"frac={frac_of[N]}|w=1.4", N, w=1.4, assumed=("TRUE", "NHAT_S", "NHAT_L"))
    elif study == "fig6":
        for N in (pops[0], pops[2], pops[4]):
            for w in (1.0, 1.8):
                for regime in (SeedRegime.RANDOM, SeedRegime.ALL_INFECTED):
                    add(f"frac={frac_of[N]}|w={w}|seeds={regime.value}", N, w=w,
                        regime=regime, estimators=("SS", "VH", "MEAN"))
    elif study == "table2":
        for R in R_GRID:
            add(f"frac=0.5|R={R}|seeds=ALL_INFECTED", pops[0], w=1.0, R=float(R),
                regime=SeedRegime.ALL_INFECTED)
    else:
        raise ValidationError(f"unknown preset study {study!r}")
    return out

