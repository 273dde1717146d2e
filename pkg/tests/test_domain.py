import pytest
from hypothesis import given
from hypothesis import strategies as st

from rds_ss.domain import (
    DegreeDistribution,
    InclusionMap,
    RdsRecord,
    RdsSample,
    SimConfig,
    degree_counts,
    repair_sample,
    require_valid,
    validate_sample,
)
from rds_ss.errors import ValidationError


def chain(degrees=(2, 3, 1)):
    recs = [RdsRecord("a", None, degrees[0], 1.0, 0)]
    for i, d in enumerate(degrees[1:], start=1):
        recs.append(RdsRecord(chr(97 + i), chr(96 + i), d, 0.0, i))
    return RdsSample(tuple(recs))


def test_degree_counts_examples():
    assert degree_counts([1, 2, 2]) == {1: 1, 2: 2}
    assert degree_counts(RdsSample(())) == {}
    assert degree_counts([7, 7, 7, 3]) == {3: 1, 7: 3}


@pytest.mark.invariant
@given(st.lists(st.integers(1, 30), max_size=40), st.randoms())
def test_degree_counts_permutation_invariant(degrees, rnd):
    shuffled = list(degrees)
    rnd.shuffle(shuffled)
    counts = degree_counts(degrees)
    assert counts == degree_counts(shuffled)
    assert sum(counts.values()) == len(degrees)


@pytest.mark.invariant
def test_sample_round_trip_preserves_records():
    s = chain((4, 2, 5, 1))
    again = RdsSample(tuple(list(s.records)))
    assert again.records == s.records
    assert [r.id for r in again] == ["a", "b", "c", "d"]


def test_validate_examples():
    assert validate_sample(chain()) == []
    bad = RdsSample((RdsRecord("a", None, 0, 1.0, 0),))
    assert [v.code for v in validate_sample(bad)] == ["DegreeNotPositive"]
    five = RdsSample.from_arrays([1, 1, 1, 1, 1], [0, 0, 0, 0, 0])
    assert [v.code for v in validate_sample(five, N=4)] == ["SampleExceedsPopulation"]


def test_validate_structure_violations():
    recs = (
        RdsRecord("a", None, 2, 1.0, 1),
        RdsRecord("b", "zzz", 2, 1.0, 1),
        RdsRecord("c", "a", 2, 1.0, 3),
        RdsRecord("c", "a", 9, 1.0, 2),
    )
    codes = {v.code for v in validate_sample(RdsSample(recs), N=5)}
    assert codes == {"SeedWaveNotZero", "UnknownRecruiter", "WaveMismatch", "DuplicateId",
                     "DegreeExceedsPopulation"}


def test_recruiter_must_precede():
    recs = (RdsRecord("b", "a", 2, 0.0, 1), RdsRecord("a", None, 2, 0.0, 0))
    assert [v.code for v in validate_sample(RdsSample(recs))] == ["UnknownRecruiter"]


def test_repair_flags():
    s = RdsSample((RdsRecord("a", None, 0, 1.0, 0), RdsRecord("b", "a", 50, 0.0, 1)))
    fixed = repair_sample(s, N=10)
    assert fixed.degrees == [1, 9]
    assert validate_sample(fixed, N=10) == []


def test_require_valid_raises_specific():
    from rds_ss.errors import SampleExceedsPopulation

    with pytest.raises(SampleExceedsPopulation):
        require_valid(RdsSample.from_arrays([1, 1], [0, 1]), N=1)


def test_degree_distribution_invariants():
    d = DegreeDistribution({1: 2, 3: 1}, 3)
    assert d.K == 3 and d.is_integer and d.total_degree == 5
    assert d.sizes() == [1, 1, 3]
    assert DegreeDistribution.from_sizes([3, 1, 1]) == d
    real = DegreeDistribution({1: 1.5, 2: 1.5}, 3)
    assert not real.is_integer
    with pytest.raises(ValidationError):
        DegreeDistribution({1: 2}, 3)
    with pytest.raises(ValidationError):
        DegreeDistribution({0: 3}, 3)
    with pytest.raises(ValidationError):
        real.sizes()


def test_inclusion_map_bounds():
    with pytest.raises(ValidationError):
        InclusionMap({1: 1.2}, 1, 2)
    with pytest.raises(ValidationError):
        InclusionMap({1: 0.0}, 1, 2)
    assert InclusionMap({1: 1.2}, 1, 2, provisional=True)[1] == 1.2


def test_sim_config_defaults():
    c = SimConfig()
    assert (c.trials, c.iterations) == (2000, 3)
    with pytest.raises(ValidationError):
        SimConfig(trials=0)
