from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from crossclaims.generate import GenParams, random_mbc
from crossclaims.model import are_equal, validate_problem
from crossclaims.rules import cra_exact, csp, ra_single, sp_single


def test_deterministic():
    params = GenParams(rational=True, duplicates=1)
    assert random_mbc(params, 42) == random_mbc(params, 42)
    assert any(random_mbc(params, 42) != random_mbc(params, s) for s in range(43, 48))


def test_ten_thousand_valid():
    params = GenParams(claimants=(1, 6), issues=(1, 4), rational=True)
    for seed in range(10_000):
        p = random_mbc(params, seed)
        assert 1 <= p.n <= 6 and 1 <= p.m <= 4
        assert validate_problem(p.to_raw()) == p


def test_ranges_respected():
    params = GenParams(claimants=(3, 3), issues=(2, 2), claim_range=(2, 4))
    for seed in range(200):
        p = random_mbc(params, seed)
        assert (p.n, p.m) == (3, 2)
        assert all(2 <= c <= 4 for c in p.claims)


@pytest.mark.parametrize("prob,expect", [(1.0, True), (0.0, False)])
def test_binding_probability(prob, expect):
    for seed in range(200):
        p = random_mbc(GenParams(binding_prob=prob), seed)
        assert all(b == expect for b in p.binding)


def test_duplicates_are_equal_pairs():
    for seed in range(100):
        p = random_mbc(GenParams(duplicates=2), seed)
        last = p.n - 1
        assert any(are_equal(p, last, j) for j in range(last))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_full_density_is_a_bottleneck(seed):
    # every claimant demands every issue, so only the smallest estate matters
    p = random_mbc(GenParams(alpha_density=1.0, claimants=(1, 4), rational=True), seed)
    assert all(a == frozenset(range(p.m)) for a in p.alpha)
    e = min(p.estates)
    for order in permutations(range(p.n)):
        assert csp(p, order).values == sp_single(e, p.claims, order)
    assert cra_exact(p).allocation.values == ra_single(e, p.claims)


def test_sparse_density_repaired():
    for seed in range(100):
        p = random_mbc(GenParams(alpha_density=0.0, issues=(2, 3)), seed)
        assert all(p.alpha) and set().union(*p.alpha) == set(range(p.m))


def test_mapping_round_trip():
    params = GenParams(claimants=(2, 3), rational=True)
    assert GenParams.from_mapping(params.to_mapping()) == params
    with pytest.raises(ValueError):
        GenParams.from_mapping({"colour": 1})


@pytest.mark.parametrize("kw", [{"claimants": (3, 2)}, {"issues": (0, 2)}, {"claim_range": (-1, 2)}])
def test_bad_params(kw):
    with pytest.raises(ValueError):
        GenParams(**kw)
