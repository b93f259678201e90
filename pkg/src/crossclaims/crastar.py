"""Two-level random arrival rule (CRA*).

Issues are processed one at a time in some order. At each step the claimants
of the current issue play a random arrival game with their truncated claims,
constrained by every live estate they touch; estates and claims are then
updated and re-truncated. The result is averaged over all issue orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

from crossclaims.model import Allocation, MbcProblem, is_feasible, truncate
from crossclaims.rules import (
    DEFAULT_BUDGET, RuleValue, _check_budget, _summarize, order_sums, random_orders, sweep,
)

ZERO = Fraction(0)


@dataclass(frozen=True)
class CrastarState:
    step: int
    estates: tuple[Fraction, ...]
    claims: tuple[Fraction, ...]      # updated claims, before truncation
    truncated: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.estates + self.claims + self.truncated):
            raise AssertionError(f"negative entry in CRA* state at step {self.step}")
        if any(t > c for t, c in zip(self.truncated, self.claims)):
            raise AssertionError("truncated claim exceeds updated claim")


def initial_state(p: MbcProblem) -> CrastarState:
    return CrastarState(0, p.estates, p.claims, truncate(p.claims, p.estates, p.alpha))


def issue_step(p: MbcProblem, state: CrastarState, issue: int) -> dict[int, Fraction]:
    """Random arrival amounts for the claimants of ``issue`` in the current state.

    Returns an empty map when nobody claims the issue, and zeros when all of
    its truncated claims are exhausted.
    """
    members = p.claimants_of(issue)
    if not members:
        return {}
    if all(state.truncated[j] == 0 for j in members):
        return {j: ZERO for j in members}
    sums = order_sums(state.estates, state.truncated, p.alpha, members)
    k = math.factorial(len(members))
    return {j: s / k for j, s in sums.items()}


def issue_step_table(p: MbcProblem, state: CrastarState, issue: int
                     ) -> list[tuple[tuple[int, ...], dict[int, Fraction]]]:
    """The per-order rows behind :func:`issue_step`, lexicographic in member order."""
    members = p.claimants_of(issue)
    return [(order, sweep(state.estates, state.truncated, p.alpha, order))
            for order in permutations(members)]


def sampled_issue_step(p: MbcProblem, state: CrastarState, issue: int, samples: int,
                       rng: np.random.Generator) -> dict[int, Fraction]:
    """Like :func:`issue_step` but averaging over ``samples`` random member orders."""
    members = p.claimants_of(issue)
    if not members:
        return {}
    if all(state.truncated[j] == 0 for j in members):
        return {j: ZERO for j in members}
    total = {j: ZERO for j in members}
    for row in random_orders(rng, samples, len(members)):
        got = sweep(state.estates, state.truncated, p.alpha, [members[int(t)] for t in row])
        for j, v in got.items():
            total[j] += v
    return {j: v / samples for j, v in total.items()}


def apply_update(p: MbcProblem, state: CrastarState, amounts: dict[int, Fraction],
                 issue: int) -> CrastarState:
    """Charge ``amounts`` against every issue of each payee, then re-truncate."""
    estates = list(state.estates)
    claims = list(state.truncated)
    for j, x in amounts.items():
        if issue not in p.alpha[j]:
            raise ValueError(f"claimant {p.claimants[j]} does not claim issue {p.issues[issue]}")
        claims[j] -= x
        for i in p.alpha[j]:
            estates[i] -= x
    return CrastarState(state.step + 1, tuple(estates), tuple(claims),
                        truncate(claims, estates, p.alpha))


def parse_issue_order(p: MbcProblem, order: Sequence[str | int]) -> tuple[int, ...]:
    idx = tuple(o if isinstance(o, int) else p.issue_index(o) for o in order)
    if sorted(idx) != list(range(p.m)):
        raise ValueError(f"{list(order)!r} is not an order of all {p.m} issues")
    return idx


def crastar_trace(p: MbcProblem, omega: Sequence[int]
                  ) -> list[tuple[int, dict[int, Fraction], CrastarState]]:
    """Per step: the issue, the amounts paid on it, and the state after the update."""
    state = initial_state(p)
    trace = []
    for issue in omega:
        amounts = issue_step(p, state, issue)
        state = apply_update(p, state, amounts, issue)
        trace.append((issue, amounts, state))
    return trace


def crastar_for_issue_order(p: MbcProblem, omega: Sequence[int]) -> Allocation:
    total = [ZERO] * p.n
    for _, amounts, _ in crastar_trace(p, omega):
        for j, x in amounts.items():
            total[j] += x
    alloc = Allocation.of(p, total)
    assert is_feasible(p, alloc)
    return alloc


def _exact_budget(p: MbcProblem) -> int:
    widest = max(len(p.claimants_of(i)) for i in range(p.m))
    return math.factorial(p.m) * math.factorial(widest)


def crastar_rows(p: MbcProblem, budget: int | None = DEFAULT_BUDGET
                 ) -> list[tuple[tuple[int, ...], Allocation]]:
    """Allocation for every issue order (lexicographic).

    Issue orders are walked depth first so a shared prefix is computed once;
    identical (issue, state) steps are also cached.
    """
    _check_budget(_exact_budget(p), budget, "exact CRA*")
    cache: dict[tuple, dict[int, Fraction]] = {}
    rows: list[tuple[tuple[int, ...], Allocation]] = []

    def step(state: CrastarState, issue: int) -> dict[int, Fraction]:
        key = (issue, state.estates, state.truncated)
        if key not in cache:
            cache[key] = issue_step(p, state, issue)
        return cache[key]

    def walk(prefix: tuple[int, ...], state: CrastarState, acc: tuple[Fraction, ...]) -> None:
        if len(prefix) == p.m:
            rows.append((prefix, Allocation.of(p, acc)))
            return
        for issue in range(p.m):
            if issue in prefix:
                continue
            amounts = step(state, issue)
            nxt = apply_update(p, state, amounts, issue)
            walk(prefix + (issue,), nxt,
                 tuple(a + amounts.get(j, ZERO) for j, a in enumerate(acc)))

    walk((), initial_state(p), tuple([ZERO] * p.n))
    return rows


def crastar_exact(p: MbcProblem, budget: int | None = DEFAULT_BUDGET) -> RuleValue:
    rows = crastar_rows(p, budget)
    mean = [sum((a.values[j] for _, a in rows), ZERO) / len(rows) for j in range(p.n)]
    alloc = Allocation.of(p, mean)
    assert is_feasible(p, alloc)
    return RuleValue(alloc)


def crastar_sample(p: MbcProblem, outer_samples: int, inner_samples: int, seed: int,
                   exhaustive: bool = False) -> RuleValue:
    """Monte Carlo CRA*.

    Issue orders are drawn uniformly with replacement. An issue step is exact
    when its claimants have at most ``inner_samples`` orders, sampled otherwise.
    The update after a sampled step is nonlinear in its noise, so a small
    ``inner_samples`` biases the estimate, not just widens it.
    ``exhaustive=True`` enumerates every issue order and every inner order.
    """
    if outer_samples < 1 or inner_samples < 1:
        raise ValueError("sample counts must be at least 1")
    if exhaustive:
        rows = [a.values for _, a in crastar_rows(p, budget=None)]
        return _summarize(p, rows, [1] * len(rows), len(rows), seed)
    rng = np.random.default_rng(seed)
    omegas = random_orders(rng, outer_samples, p.m)
    exact_cache: dict[tuple[int, ...], tuple[Fraction, ...]] = {}
    inner_exact = [math.factorial(len(p.claimants_of(i))) <= inner_samples for i in range(p.m)]
    rows = []
    for row in omegas:
        omega = tuple(int(i) for i in row)
        if all(inner_exact) and omega in exact_cache:
            rows.append(exact_cache[omega])
            continue
        state = initial_state(p)
        total = [ZERO] * p.n
        for issue in omega:
            if inner_exact[issue]:
                amounts = issue_step(p, state, issue)
            else:
                amounts = sampled_issue_step(p, state, issue, inner_samples, rng)
            state = apply_update(p, state, amounts, issue)
            for j, x in amounts.items():
                total[j] += x
        rows.append(tuple(total))
        if all(inner_exact):
            exact_cache[omega] = rows[-1]
    return _summarize(p, rows, [1] * len(rows), outer_samples, seed)
