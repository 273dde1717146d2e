import numpy as np
import pytest

from rds_ss.domain import DegreeDistribution, SimConfig
from rds_ss.errors import InfeasibleParams
from rds_ss.harness import (
    W_GRID,
    Scenario,
    assumed_size,
    inclusion_curves,
    preset,
    run_study,
    summarize,
)
from rds_ss.netgen import NetParams
from rds_ss.rds_sim import RdsDesign


def small(name="s", w=1.0, R=1.0, reps=40, estimators=("SS", "VH", "MEAN"), assumed=("TRUE",)):
    return Scenario(name, NetParams(120, 0.2, 6, w, R), RdsDesign(60, 6, 2, reseed=True), reps,
                    estimators, assumed, SimConfig(trials=100, iterations=2))


def test_symmetric_null_mean_unbiased():
    res = run_study([small(reps=150, estimators=("MEAN",))], seed=1)
    row = res.row("s", "MEAN")
    assert abs(row.bias) < 3 * row.se_bias


@pytest.mark.invariant
def test_mse_decomposition_and_same_samples():
    res = run_study([small(w=1.6, R=3, assumed=("TRUE", "NHAT_S", 200))], seed=2)
    labels = {r.estimator for r in res.rows}
    assert labels == {"SS", "SS[NHAT_S]", "SS[N=200]", "VH", "MEAN"}
    for r in res.rows:
        assert r.mse == pytest.approx(r.bias**2 + r.variance, abs=1e-9)
        assert len(res.raw["s"][r.estimator]) == r.replicates
    # every estimator saw the same replicate samples, so the truth vector is shared
    assert len(res.raw["s"]["truth"]) == 40


def test_summarize_moments():
    row = summarize("x", "E", [0.1, 0.3, 0.2], [0.2, 0.2, 0.2])
    assert row.bias == pytest.approx(0.0, abs=1e-15)
    assert row.variance == pytest.approx(2 / 300)
    assert row.mse == pytest.approx(2 / 300)


@pytest.mark.invariant
def test_study_deterministic_and_worker_independent():
    scs = [small(reps=6), small("t", w=1.4, R=5, reps=5)]
    a = run_study(scs, seed=9)
    b = run_study(scs, seed=9)
    c = run_study(scs, seed=9, workers=2)
    assert a.to_dict() == b.to_dict() == c.to_dict()
    assert run_study(scs, seed=10).to_dict() != a.to_dict()


def test_infeasible_scenario_named():
    bad = Scenario("bad", NetParams(30, 0.2, 25, 1, 30), RdsDesign(10, 2), 2)
    with pytest.raises(InfeasibleParams, match="bad"):
        run_study([bad], seed=1)


def test_assumed_size():
    assert assumed_size("TRUE", 625, 500) == 625
    assert assumed_size("NHAT_S", 625, 500) == 563
    assert assumed_size("NHAT_L", 625, 500) == 688
    assert assumed_size(900, 625, 500) == 900


def test_fig1_desk_preset_shape():
    scs = preset("fig1-desk")
    assert len(scs) == 6 * 8
    rows = sum(len(s.labels()) for s in scs)
    assert rows == 6 * 8 * 2
    assert sorted({s.net.w for s in scs}) == sorted(W_GRID)
    assert all(s.design.target_n == 125 and s.net.N <= 250 for s in scs)
    full = preset("table2-paper")
    assert all(s.design.target_n == 500 and s.replicates == 1000 for s in full)


def test_curves_examples():
    dist = DegreeDistribution({1: 4, 3: 4, 7: 2}, 10)
    rows = inclusion_curves(dist, [10], SimConfig(trials=300, seed=1))
    assert all(r["pi"] == pytest.approx(1.0, abs=1e-3) for r in rows if r["kind"] == "ss")
    flat = inclusion_curves(DegreeDistribution({4: 30}, 30), [12], SimConfig(trials=500, seed=1))
    ss = [r for r in flat if r["kind"] == "ss"]
    assert ss[0]["pi"] == pytest.approx(0.4, abs=1e-3)


def test_curves_dominate_in_n():
    rng = np.random.default_rng(0)
    degs = np.clip(rng.poisson(7, size=400), 1, None)
    dist = DegreeDistribution.from_sizes(degs.tolist())
    rows = inclusion_curves(dist, [200, 380], SimConfig(trials=300, seed=2))
    half = {r["k"]: r["pi"] for r in rows if r["kind"] == "ss" and r["n"] == 200}
    most = {r["k"]: r["pi"] for r in rows if r["kind"] == "ss" and r["n"] == 380}
    assert all(most[k] >= half[k] for k in half)
