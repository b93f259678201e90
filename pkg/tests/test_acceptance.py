"""Acceptance criteria, one marker per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""

import json
from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest

from conftest import fr
from crossclaims.axioms import (
    check_bal, check_cons, check_ete, check_pmon, check_pri, check_rmon, cra_rule,
    crastar_rule, csp_rule, falsify,
)
from crossclaims.crastar import crastar_exact, crastar_for_issue_order, crastar_trace, parse_issue_order
from crossclaims.generate import GenParams, random_mbc
from crossclaims.model import is_feasible, is_pareto_efficient, removal_problem
from crossclaims.rules import (
    cra_exact, cra_sample, cra_table, csp, parse_order, ra_single, sp_single,
)

SIGMA = list("13572468")
PROPERTY_INSTANCES = 500
FALSIFY_BUDGET = 5000


def criterion(key, title):
    return pytest.mark.criterion(key, title)


@criterion("1", "CSP on the example1 fixture")
def test_c1_csp_example1(example1):
    assert csp(example1, parse_order(example1, SIGMA)).values == fr(3, 2, 4, 0, 5, 0, 3, 5)


@criterion("2", "CRA table, mean and PEFF witness on the peff fixture")
def test_c2_cra_table(peff):
    rows = [a.values for _, a in cra_table(peff)]
    assert rows == [fr(2, 2, 6), fr(2, 1, 7), fr(0, 4, 4), fr(0, 4, 4), fr(2, 1, 7), fr(2, 1, 7)]
    x = cra_exact(peff).allocation
    assert x.values == fr("8/6", "13/6", "35/6")
    verdict = is_pareto_efficient(peff, x)
    assert not verdict.efficient and verdict.witness == ("1", F(1, 2))


@criterion("3", "R-MON counterexample for CSP")
def test_c3_rmon(rmon):
    sigma = parse_order(rmon, SIGMA)
    assert csp(rmon, sigma).values == fr(3, 2, 4, 0, 5, 0, 3, 4)
    assert csp(rmon.with_estates(fr(9, 13, 7)), sigma).values == fr(3, 2, 4, 0, 5, 0, 4, 3)
    rep = check_rmon(csp_rule(SIGMA), rmon, fr(9, 13, 7))
    assert rep.violated and rep.witness["claimant"] == "8"
    assert (rep.witness["before"], rep.witness["after"]) == (4, 3)


@criterion("4", "CRA on the figure2 fixture: table, removals, P-MON and BAL")
def test_c4_figure2(figure2):
    rows = [a.values for _, a in cra_table(figure2)]
    assert rows == [fr(3, 2, 5), fr(3, 2, 5), fr(1, 4, 3), fr(1, 4, 3), fr(3, 2, 5), fr(3, 2, 5)]
    assert cra_exact(figure2).allocation.values == fr("7/3", "8/3", "13/3")
    removed = [cra_exact(removal_problem(figure2, c)).allocation.values for c in "321"]
    assert removed == [fr(3, 2), fr(1, 3), fr(2, 5)]
    pmon = check_pmon(cra_rule(), figure2, "3")
    assert pmon.violated and (pmon.witness["before"], pmon.witness["after"]) == (F(7, 3), 3)
    bal = check_bal(cra_rule(), figure2, "1", "2")
    assert bal.violated and bal.witness["gaps"] == (F(4, 3), F(2, 3))


WORKED_ROWS = {
    "123": fr("8/3", "11/3", "8/3", "11/3", "13/3"),
    "132": fr("8/3", "11/3", "8/3", "10/3", "14/3"),
    "213": fr(3, 3, 2, 5, 3),
    "231": fr(3, 3, 2, 5, 3),
    "312": fr(3, "13/4", "9/4", "9/2", "7/2"),
    "321": fr(3, "13/4", "9/4", "9/2", "7/2"),
}

# state after each update: (issue order, step) -> (e', c', c'')
WORKED_STATES = {
    ("123", 1): (fr(0, "11/3", 8), fr("1/3", "1/3", "1/3", 6, 5), fr(0, 0, 0, "11/3", 5)),
    ("123", 2): (fr(0, 0, "13/3"), fr(0, 0, 0, 0, 5), fr(0, 0, 0, 0, "13/3")),
    ("132", 1): (fr(0, "11/3", 8), fr("1/3", "1/3", "1/3", 6, 5), fr(0, 0, 0, "11/3", 5)),
    ("132", 2): (fr(0, "1/3", 0), fr(0, 0, 0, "1/3", "1/3"), fr(0, 0, 0, 0, 0)),
    ("213", 1): (fr(4, 0, 3), fr(3, 1, 1, 1, 5), fr(3, 0, 0, 0, 3)),
    ("312", 1): (fr(9, "11/2", 0), fr(3, 4, 3, "3/2", "3/2"), fr(3, 4, 3, 0, 0)),
    ("312", 2): (fr("1/2", 0, 0), fr(0, "3/4", "3/4", 0, 0), fr(0, 0, 0, 0, 0)),
    ("321", 1): (fr(9, "11/2", 0), fr(3, 4, 3, "3/2", "3/2"), fr(3, 4, 3, 0, 0)),
    ("321", 2): (fr("7/2", 0, 0), fr(3, "3/4", "3/4", 0, 0), fr(3, 0, 0, 0, 0)),
}


@criterion("5", "CRA* on the crastar_example fixture: rows, mean and every update state")
def test_c5_crastar_example(crastar_ex):
    for order, want in WORKED_ROWS.items():
        omega = parse_issue_order(crastar_ex, list(order))
        assert crastar_for_issue_order(crastar_ex, omega).values == want, order
    assert crastar_exact(crastar_ex).allocation.values == fr(
        "26/9", "119/36", "83/36", "13/3", "11/3")
    for (order, step), want in WORKED_STATES.items():
        trace = crastar_trace(crastar_ex, parse_issue_order(crastar_ex, list(order)))
        state = trace[step - 1][2]
        assert (state.estates, state.claims, state.truncated) == want, (order, step)


@criterion("6", "CRA* cross-checks on the figure2 and peff fixtures")
def test_c6_crastar_cross_checks(figure2, peff):
    assert crastar_exact(figure2).allocation == cra_exact(figure2).allocation
    assert crastar_exact(figure2).allocation.values == fr("7/3", "8/3", "13/3")
    rows = [crastar_for_issue_order(peff, omega).values for omega in permutations(range(2))]
    assert rows == [fr(1, 3, 5), fr("3/2", "5/2", "11/2")]
    star = crastar_exact(peff).allocation
    assert star.values == fr("5/4", "11/4", "21/4")
    assert is_pareto_efficient(peff, star).efficient
    assert not is_pareto_efficient(peff, cra_exact(peff).allocation).efficient


def _csp_cases():
    """Seeded (instance, sigma, keep-set) triples with n <= 6 and m <= 4."""
    params = GenParams(claimants=(1, 6), issues=(1, 4), rational=True)
    rng = np.random.default_rng(2024)
    for t in range(PROPERTY_INSTANCES):
        p = random_mbc(params, 10_000 + t)
        sigma = tuple(int(j) for j in rng.permutation(p.n))
        size = int(rng.integers(1, p.n)) if p.n > 1 else 0
        keep = sorted(int(j) for j in rng.choice(p.n, size=size, replace=False))
        yield p, sigma, [p.claimants[j] for j in keep]


@criterion("7", "property suite over 500 seeded instances")
def test_c7_csp_feasible_efficient_consistent():
    bad = []
    for p, sigma, keep in _csp_cases():
        x = csp(p, sigma)
        if not is_feasible(p, x) or not is_pareto_efficient(p, x).efficient:
            bad.append(("PEFF", p))
        if keep:
            priority = [p.claimants[j] for j in sigma]
            if check_cons(csp_rule(priority), p, keep).violated:
                bad.append(("CONS", p))
    assert bad == []


@criterion("7", "property suite over 500 seeded instances")
def test_c7_csp_priority():
    bad = []
    for p, sigma, _ in _csp_cases():
        rep = check_pri(csp(p, sigma), p, sigma)
        if rep.violated:
            bad.append((p.to_raw(), rep.witness))
    assert bad == [], f"{len(bad)} PRI violations, first: {bad[0] if bad else None}"


@criterion("7", "property suite over 500 seeded instances")
def test_c7_random_arrival_equal_treatment():
    params = GenParams(claimants=(1, 5), issues=(1, 4), duplicates=1, rational=True)
    cra, star = cra_rule(), crastar_rule()
    bad = []
    for t in range(PROPERTY_INSTANCES):
        p = random_mbc(params, 20_000 + t)
        for rule in (cra, star):
            if check_ete(rule, p).violated:  # the rule call itself asserts feasibility
                bad.append((rule.name, t))
    assert bad == []


@criterion("8", "single-issue coincidence over 200 instances")
def test_c8_single_issue():
    params = GenParams(claimants=(1, 5), issues=(1, 1), rational=True)
    for t in range(200):
        p = random_mbc(params, 30_000 + t)
        e = p.estates[0]
        for order in permutations(range(p.n)):
            assert csp(p, order).values == sp_single(e, p.claims, order)
        ra = ra_single(e, p.claims)
        assert cra_exact(p).allocation.values == ra
        assert crastar_exact(p).allocation.values == ra


@criterion("9", "sampling convergence and reproducibility on the figure2 fixture")
def test_c9_sampling(figure2):
    exact = cra_exact(figure2).allocation.values
    close = 0
    for seed in range(100):
        est = cra_sample(figure2, 20_000, seed).allocation.values
        close += max(abs(float(a - b)) for a, b in zip(est, exact)) <= 0.05
    assert close >= 95

    def render(seed):
        v = cra_sample(figure2, 20_000, seed)
        return json.dumps({"allocation": [str(x) for x in v.allocation.values],
                           "half_width": list(v.half_width)}).encode()

    assert all(render(s) == render(s) for s in (0, 17, 99))


FINDS = [("cra", "PEFF"), ("cra", "P-MON"), ("cra", "BAL"), ("crastar", "P-MON"),
         ("crastar", "BAL"), ("csp", "R-MON"), ("csp", "ETE")]
CLEAN = [("csp", "PEFF"), ("csp", "CONS")]
RULES = {"csp": csp_rule, "cra": cra_rule, "crastar": crastar_rule}


@criterion("10", "falsification regressions at a 5,000 instance budget")
@pytest.mark.parametrize("rule,axiom", FINDS, ids=[f"{r}-{a}" for r, a in FINDS])
def test_c10_finds(rule, axiom):
    rep = falsify(RULES[rule](), axiom, seed=0, budget=FALSIFY_BUDGET)
    assert rep is not None and rep.violated


@criterion("10", "falsification regressions at a 5,000 instance budget")
@pytest.mark.parametrize("rule,axiom", CLEAN, ids=[f"{r}-{a}" for r, a in CLEAN])
def test_c10_clean(rule, axiom):
    assert falsify(RULES[rule](), axiom, seed=0, budget=FALSIFY_BUDGET) is None


@criterion("10", "falsification regressions at a 5,000 instance budget")
def test_c10_clean_csp_priority():
    rep = falsify(csp_rule(), "PRI", seed=0, budget=FALSIFY_BUDGET)
    assert rep is None, f"violation found: {rep.witness} on {rep.problem.to_raw()}"
