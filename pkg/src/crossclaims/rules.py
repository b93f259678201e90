"""Sequential priority and random arrival rules, single-issue and crossed-claims.

Exact averages over all arrival orders run on integers: every input is scaled
by the common denominator first, which is harmless because a priority sweep
commutes with positive scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from crossclaims.model import Allocation, MbcProblem, is_feasible

DEFAULT_BUDGET = math.factorial(10)
Z95 = 1.959963984540054


class BudgetExceeded(RuntimeError):
    """Exact enumeration would visit more orders than the configured budget."""


@dataclass(frozen=True)
class RuleValue:
    allocation: Allocation
    mode: str = "exact"  # "exact" | "sampled"
    samples: int | None = None
    seed: int | None = None
    half_width: tuple[float, ...] | None = None


def parse_order(p: MbcProblem, order: Sequence[str | int]) -> tuple[int, ...]:
    """Turn a sequence of claimant ids (or indices) into a claimant order."""
    idx = tuple(p.claimant_index(c) for c in order)
    if sorted(idx) != list(range(p.n)):
        raise ValueError(f"{list(order)!r} is not an order of all {p.n} claimants")
    return idx


def iter_orders(n: int) -> Iterator[tuple[int, ...]]:
    """All orders of ``range(n)``, lexicographic, generated lazily."""
    return permutations(range(n))


def _check_budget(count: int, budget: int | None, what: str) -> None:
    if budget is not None and count > budget:
        raise BudgetExceeded(
            f"{what} needs {count} orders, over the budget of {budget}; "
            "use the sampled mode instead")


# -- single issue -----------------------------------------------------------

def sp_single(e, c: Sequence, order: Sequence[int]) -> tuple[Fraction, ...]:
    """Sequential priority for one estate: serve claimants in ``order`` in full."""
    e = Fraction(e)
    claims = [Fraction(v) for v in c]
    out = [Fraction(0)] * len(claims)
    ahead = Fraction(0)
    for j in order:
        out[j] = min(claims[j], max(Fraction(0), e - ahead))
        ahead += claims[j]
    return tuple(out)


def ra_single(e, c: Sequence) -> tuple[Fraction, ...]:
    """Random arrival for one estate, by brute-force enumeration of all orders."""
    n = len(c)
    total = [Fraction(0)] * n
    for order in iter_orders(n):
        for j, v in enumerate(sp_single(e, c, order)):
            total[j] += v
    return tuple(t / math.factorial(n) for t in total)


# -- crossed claims -----------------------------------------------------------

def sweep(estates: Sequence, claims: Sequence, alpha: Sequence[frozenset[int]],
          order: Sequence[int]) -> dict[int, object]:
    """Serve ``order`` one by one, each getting what her tightest issue has left.

    Estates are decremented by amounts actually received. Works on any
    numeric type that supports min/subtraction (Fraction or int).
    """
    r = list(estates)
    got = {}
    for j in order:
        x = min(claims[j], max(0, min(r[i] for i in alpha[j])))
        got[j] = x
        if x:
            for i in alpha[j]:
                r[i] -= x
    return got


def csp(p: MbcProblem, order: Sequence[int]) -> Allocation:
    """Constrained sequential priority allocation for the claimant order ``order``."""
    scale = _common_scale(p.estates + p.claims)
    got = sweep([int(e * scale) for e in p.estates], [int(c * scale) for c in p.claims],
                p.alpha, order)
    return Allocation.of(p, (Fraction(got[j], scale) for j in range(p.n)))


def csp_closed_form(p: MbcProblem, order: Sequence[int]) -> Allocation:
    """Literal closed-form evaluation charging predecessors' full claims.

    Diagnostic only: it disagrees with the iterative sweep whenever some
    predecessor received less than her claim.
    """
    rank = {j: pos for pos, j in enumerate(order)}
    out = []
    for j in range(p.n):
        tight = min(
            p.estates[i] - sum((p.claims[k] for k in range(p.n)
                                if i in p.alpha[k] and rank[k] < rank[j]), Fraction(0))
            for i in p.alpha[j])
        out.append(min(p.claims[j], max(Fraction(0), tight)))
    return Allocation.of(p, out)


def _common_scale(values: Sequence[Fraction]) -> int:
    scale = 1
    for v in values:
        scale = math.lcm(scale, Fraction(v).denominator)
    return scale


def order_sums(estates: Sequence[Fraction], claims: Sequence[Fraction],
               alpha: Sequence[frozenset[int]], members: Sequence[int]) -> dict[int, Fraction]:
    """Sum over every arrival order of ``members`` of what each member receives.

    Non-members are absent from the sweep but every issue of a member constrains
    her. Subtrees of the order tree are shared whenever two prefixes leave the
    same members and the same residual estates.
    """
    members = list(members)
    k = len(members)
    if k == 0:
        return {}
    touched = sorted(set().union(*(alpha[j] for j in members)))
    local = {i: t for t, i in enumerate(touched)}
    scale = _common_scale([estates[i] for i in touched] + [claims[j] for j in members])
    r0 = tuple(int(estates[i] * scale) for i in touched)
    cl = tuple(int(claims[j] * scale) for j in members)
    al = tuple(tuple(local[i] for i in alpha[j]) for j in members)
    fact = [math.factorial(t) for t in range(k + 1)]
    memo: dict[tuple[int, tuple[int, ...]], list[int]] = {}

    def visit(mask: int, r: tuple[int, ...]) -> list[int]:
        key = (mask, r)
        hit = memo.get(key)
        if hit is not None:
            return hit
        total = [0] * k
        weight = fact[bin(mask).count("1") - 1]
        for j in range(k):
            bit = 1 << j
            if not mask & bit:
                continue
            x = min(cl[j], max(0, min(r[i] for i in al[j])))
            if x:
                total[j] += x * weight
                nr = list(r)
                for i in al[j]:
                    nr[i] -= x
                child = tuple(nr)
            else:
                child = r
            rest = mask & ~bit
            if rest:
                for t, v in enumerate(visit(rest, child)):
                    total[t] += v
        memo[key] = total
        return total

    sums = visit((1 << k) - 1, r0)
    return {j: Fraction(s, scale) for j, s in zip(members, sums)}


def cra_exact(p: MbcProblem, budget: int | None = DEFAULT_BUDGET) -> RuleValue:
    """Constrained random arrival: mean of CSP over all n! claimant orders."""
    _check_budget(math.factorial(p.n), budget, "exact CRA")
    sums = order_sums(p.estates, p.claims, p.alpha, range(p.n))
    nf = math.factorial(p.n)
    alloc = Allocation.of(p, (sums[j] / nf for j in range(p.n)))
    assert is_feasible(p, alloc)
    return RuleValue(alloc)


def cra_table(p: MbcProblem, budget: int | None = DEFAULT_BUDGET
              ) -> list[tuple[tuple[int, ...], Allocation]]:
    """One CSP row per claimant order, lexicographic."""
    _check_budget(math.factorial(p.n), budget, "CRA table")
    return [(order, csp(p, order)) for order in iter_orders(p.n)]


def _summarize(p: MbcProblem, rows: list[tuple[Fraction, ...]], counts: list[int],
               samples: int, seed: int | None) -> RuleValue:
    mean = [sum((c * row[j] for row, c in zip(rows, counts)), Fraction(0)) / samples
            for j in range(p.n)]
    if samples > 1:
        data = np.array([[float(v) for v in row] for row in rows])
        w = np.array(counts, dtype=float)
        mu = np.array([float(v) for v in mean])
        var = (w[:, None] * (data - mu) ** 2).sum(axis=0) / (samples - 1)
        half = tuple(float(h) for h in Z95 * np.sqrt(var / samples))
    else:
        half = tuple(0.0 for _ in range(p.n))
    alloc = Allocation.of(p, mean)
    # A mean of feasible points is feasible because the feasible set is convex.
    assert is_feasible(p, alloc)
    return RuleValue(alloc, "sampled", samples, seed, half)


def random_orders(rng: np.random.Generator, samples: int, n: int) -> np.ndarray:
    """``samples`` uniform permutations of ``range(n)``, one per row."""
    return np.argsort(rng.random((samples, n)), axis=1, kind="stable")


def cra_sample(p: MbcProblem, samples: int, seed: int, exhaustive: bool = False) -> RuleValue:
    """Monte Carlo CRA: mean of CSP over ``samples`` uniformly drawn orders.

    With ``exhaustive=True`` every order is visited exactly once instead, which
    must reproduce :func:`cra_exact`.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if exhaustive:
        rows = [csp(p, order).values for order in iter_orders(p.n)]
        return _summarize(p, rows, [1] * len(rows), len(rows), seed)
    rng = np.random.default_rng(seed)
    drawn = random_orders(rng, samples, p.n)
    uniq, counts = np.unique(drawn, axis=0, return_counts=True)
    scale = _common_scale(list(p.estates) + list(p.claims))
    est = [int(e * scale) for e in p.estates]
    cl = [int(c * scale) for c in p.claims]
    rows = []
    for order in uniq:
        got = sweep(est, cl, p.alpha, [int(j) for j in order])
        rows.append(tuple(Fraction(got[j], scale) for j in range(p.n)))
    return _summarize(p, rows, [int(c) for c in counts], samples, seed)
