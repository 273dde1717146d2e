import pytest
from hypothesis import given
from hypothesis import strategies as st

from rds_ss.classic import activity_ratio, mu_mean, mu_vh, nhat_bounds
from rds_ss.domain import RdsSample
from rds_ss.errors import DegenerateGroup, EmptySample, SampleExceedsPopulation


def S(d, z):
    return RdsSample.from_arrays(d, z)


def test_mu_vh_examples():
    assert mu_vh(S([2, 2, 2], [1, 0, 0])) == pytest.approx(1 / 3)
    assert mu_vh(S([1, 2], [1, 0])) == pytest.approx(2 / 3)
    # (1/2 + 1/4) / (1 + 1/2 + 1/4)
    assert mu_vh(S([1, 2, 4], [0, 1, 1])) == pytest.approx(3 / 7)


def test_mu_mean_examples():
    assert mu_mean(S([1] * 5, [1, 0, 0, 0, 0])) == pytest.approx(0.2)
    assert mu_mean(S([3, 4], [1, 1])) == 1
    assert mu_mean(S([1, 2, 3, 4], [0, 1, 1, 0])) == 0.5


def test_empty_sample():
    with pytest.raises(EmptySample):
        mu_vh(RdsSample(()))
    with pytest.raises(EmptySample):
        mu_mean(RdsSample(()))


def test_activity_ratio_examples():
    assert activity_ratio([7, 7, 7, 7], [1, 0, 1, 0]) == 1
    assert activity_ratio([14, 14, 7, 7, 7], [1, 1, 0, 0, 0]) == 2
    assert activity_ratio([4, 2, 1, 1], [1, 1, 0, 0]) == 3
    with pytest.raises(DegenerateGroup):
        activity_ratio([1, 2], [1, 1])


def test_nhat_bounds_examples():
    assert nhat_bounds(1000, 500) == (750, 1250)
    assert nhat_bounds(40, 40) == (40, 40)
    assert nhat_bounds(625, 500) == (562.5, 687.5)
    assert nhat_bounds(625, 500, rounded=True) == (563, 688)
    with pytest.raises(SampleExceedsPopulation):
        nhat_bounds(10, 11)


samples = st.lists(
    st.tuples(st.integers(1, 40), st.sampled_from([0.0, 1.0])), min_size=1, max_size=50
)


@pytest.mark.invariant
@given(samples, st.randoms(), st.integers(2, 9))
def test_vh_order_and_scale_invariant(rows, rnd, factor):
    d, z = map(list, zip(*rows))
    base = mu_vh(S(d, z))
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    d2, z2 = map(list, zip(*shuffled))
    assert mu_vh(S(d2, z2)) == pytest.approx(base, abs=1e-12)
    assert mu_vh(S([x * factor for x in d], z)) == pytest.approx(base, abs=1e-12)
    assert 0 <= base <= 1 and 0 <= mu_mean(S(d, z)) <= 1


@pytest.mark.invariant
@given(st.integers(1, 30), st.lists(st.sampled_from([0.0, 1.0]), min_size=1, max_size=40))
def test_vh_equals_mean_for_equal_degrees(k, z):
    s = S([k] * len(z), z)
    assert mu_vh(s) == pytest.approx(mu_mean(s), abs=1e-12)
