"""Per-instance axiom checks and a random falsifier with greedy shrinking.

Checks never claim an axiom holds in general: a passing check only says the
axiom holds on the instance (and auxiliary data) it was given.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from crossclaims.crastar import crastar_exact
from crossclaims.generate import GenParams, random_mbc
from crossclaims.model import (
    Allocation, MbcProblem, ProblemError, are_equal, are_homologous, is_feasible,
    is_pareto_efficient, reduced_problem, removal_clamped, removal_problem,
)
from crossclaims.rules import DEFAULT_BUDGET, cra_exact, csp

AXIOMS = ("PEFF", "ETE", "CONS", "PRI", "R-MON", "P-MON", "BAL")
HOLDS = "holds-on-instance"
VIOLATED = "violated"


def axiom_tag(name: str) -> str:
    """Normalize ``"pmon"``, ``"p-mon"``, ``"P_MON"``... to the canonical tag."""
    key = name.upper().replace("_", "").replace("-", "")
    for tag in AXIOMS:
        if tag.replace("-", "") == key:
            return tag
    raise ValueError(f"unknown axiom {name!r}; expected one of {', '.join(AXIOMS)}")


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    verdict: str
    problem: MbcProblem
    witness: dict | None = None
    notes: tuple[str, ...] = ()

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED


@dataclass(frozen=True)
class Rule:
    """A named deterministic map from problems to feasible allocations.

    ``priority`` lists claimant ids in priority order; it drives CSP and the
    PRI check. Claimants missing from it follow, in problem order.
    """

    name: str
    func: Callable[[MbcProblem], Allocation]
    priority: tuple[str, ...] | None = None

    def order(self, p: MbcProblem) -> tuple[int, ...]:
        return priority_order(p, self.priority)

    def __call__(self, p: MbcProblem) -> Allocation:
        x = self.func(p)
        if not is_feasible(p, x):
            raise AssertionError(f"rule {self.name} returned an infeasible allocation")
        return x


def priority_order(p: MbcProblem, priority: Sequence[str] | None) -> tuple[int, ...]:
    """Claimant order induced on ``p`` by a priority list of ids."""
    if priority is None:
        return tuple(range(p.n))
    rank = {c: k for k, c in enumerate(priority)}
    return tuple(sorted(range(p.n), key=lambda j: (rank.get(p.claimants[j], len(rank)), j)))


def csp_rule(priority: Sequence[str] | None = None) -> Rule:
    pri = tuple(str(c) for c in priority) if priority is not None else None
    name = "csp" if pri is None else "csp:" + ",".join(pri)
    return Rule(name, lambda p: csp(p, priority_order(p, pri)), pri)


def cra_rule(budget: int | None = DEFAULT_BUDGET) -> Rule:
    return Rule("cra", lambda p: cra_exact(p, budget).allocation)


def crastar_rule(budget: int | None = DEFAULT_BUDGET) -> Rule:
    return Rule("crastar", lambda p: crastar_exact(p, budget).allocation)


def table_rule(entries: Mapping[MbcProblem, Allocation | Sequence], name: str = "table") -> Rule:
    """Rule backed by a fixed table of allocations; unknown problems raise KeyError."""
    table = {p: x if isinstance(x, Allocation) else Allocation.of(p, x)
             for p, x in entries.items()}
    return Rule(name, lambda p: table[p])


def _report(axiom: str, p: MbcProblem, witness: dict | None, notes=()) -> AxiomReport:
    return AxiomReport(axiom, VIOLATED if witness else HOLDS, p, witness, tuple(notes))


def check_peff(rule: Rule, p: MbcProblem) -> AxiomReport:
    x = rule(p)
    verdict = is_pareto_efficient(p, x)
    witness = None
    if not verdict.efficient:
        who, delta = verdict.witness
        witness = {"claimant": who, "delta": delta, "allocation": x}
    return _report("PEFF", p, witness)


def check_ete(rule: Rule, p: MbcProblem) -> AxiomReport:
    x = rule(p)
    for j, k in itertools.combinations(range(p.n), 2):
        if are_equal(p, j, k) and x.values[j] != x.values[k]:
            return _report("ETE", p, {"pair": (p.claimants[j], p.claimants[k]),
                                      "values": (x.values[j], x.values[k])})
    return _report("ETE", p, None)


def check_cons(rule: Rule, p: MbcProblem, keep: Iterable[str | int]) -> AxiomReport:
    x = rule(p)
    sub = reduced_problem(p, x, keep)
    y = rule(sub)
    for cid, v in zip(sub.claimants, y.values):
        if v != x[cid]:
            return _report("CONS", p, {"keep": sub.claimants, "claimant": cid,
                                       "original": x[cid], "reduced": v})
    return _report("CONS", p, None)


def check_pri(x: Allocation | Sequence, p: MbcProblem, order: Sequence[int]) -> AxiomReport:
    """Priority: a homologous claimant served earlier never loses more."""
    vals = x.values if isinstance(x, Allocation) else tuple(Fraction(v) for v in x)
    if not is_feasible(p, vals):
        raise ValueError("priority check needs a feasible allocation")
    rank = {j: pos for pos, j in enumerate(order)}
    for j, k in itertools.permutations(range(p.n), 2):
        if rank[j] < rank[k] and are_homologous(p, j, k):
            loss_j, loss_k = p.claims[j] - vals[j], p.claims[k] - vals[k]
            if loss_j > loss_k:
                return _report("PRI", p, {"first": p.claimants[j], "second": p.claimants[k],
                                          "losses": (loss_j, loss_k)})
    return _report("PRI", p, None)


def check_rmon(rule: Rule, p: MbcProblem, e_prime: Sequence | Mapping) -> AxiomReport:
    if isinstance(e_prime, Mapping):
        richer = tuple(Fraction(e_prime[i]) for i in p.issues)
    else:
        richer = tuple(Fraction(e) for e in e_prime)
    if len(richer) != p.m or any(a < b for a, b in zip(richer, p.estates)):
        raise ValueError("E' must dominate E componentwise")
    x, y = rule(p), rule(p.with_estates(richer))
    for cid, before, after in zip(p.claimants, x.values, y.values):
        if after < before:
            return _report("R-MON", p, {"estates": richer, "claimant": cid,
                                        "before": before, "after": after})
    return _report("R-MON", p, None)


def check_pmon(rule: Rule, p: MbcProblem, leaver: str | int) -> AxiomReport:
    gone = p.claimants[p.claimant_index(leaver)]
    notes = ("estate clamped at zero",) if removal_clamped(p, gone) else ()
    x = rule(p)
    sub = removal_problem(p, gone)
    y = rule(sub)
    for cid, after in zip(sub.claimants, y.values):
        if after > x[cid]:
            return _report("P-MON", p, {"leaver": gone, "claimant": cid,
                                        "before": x[cid], "after": after}, notes)
    return _report("P-MON", p, None, notes)


def check_bal(rule: Rule, p: MbcProblem, j: str | int, k: str | int) -> AxiomReport:
    a, b = p.claimants[p.claimant_index(j)], p.claimants[p.claimant_index(k)]
    if a == b:
        raise ValueError("balanced impact needs two distinct claimants")
    notes = ("estate clamped at zero",) if removal_clamped(p, a) or removal_clamped(p, b) else ()
    x = rule(p)
    without_b, without_a = rule(removal_problem(p, b)), rule(removal_problem(p, a))
    gap_a = x[a] - without_b[a]
    gap_b = x[b] - without_a[b]
    witness = None
    if gap_a != gap_b:
        witness = {"pair": (a, b), "gaps": (gap_a, gap_b),
                   "removed_values": (without_b[a], without_a[b])}
    return _report("BAL", p, witness, notes)


# -- auxiliary data for the relational axioms ---------------------------------

def auxiliaries(axiom: str, p: MbcProblem, rng: np.random.Generator | None = None) -> list:
    """Deterministic list of auxiliary inputs an axiom is checked against.

    Identifiers are used throughout so the data survives shrinking.
    """
    ids = p.claimants
    if axiom == "CONS":
        subsets = [c for r in range(1, p.n) for c in itertools.combinations(ids, r)]
        if len(subsets) > 10 and rng is not None:
            picks = rng.choice(len(subsets), size=10, replace=False)
            subsets = [subsets[int(t)] for t in sorted(picks)]
        return subsets
    if axiom == "R-MON":
        bumps = [{i: Fraction(1)} for i in p.issues]
        if p.m > 1:
            bumps.append({i: Fraction(1) for i in p.issues})
        return bumps
    if axiom == "P-MON":
        return list(ids) if p.n >= 2 else []
    if axiom == "BAL":
        return list(itertools.combinations(ids, 2))
    return [None]


def check(rule: Rule, axiom: str, p: MbcProblem, aux=None) -> AxiomReport:
    """Dispatch one axiom check; ``aux`` as produced by :func:`auxiliaries`."""
    axiom = axiom_tag(axiom)
    if axiom == "PEFF":
        return check_peff(rule, p)
    if axiom == "ETE":
        return check_ete(rule, p)
    if axiom == "PRI":
        return check_pri(rule(p), p, rule.order(p))
    if axiom == "CONS":
        return check_cons(rule, p, aux)
    if axiom == "R-MON":
        richer = [e + aux.get(i, 0) for i, e in zip(p.issues, p.estates)]
        return check_rmon(rule, p, richer)
    if axiom == "P-MON":
        return check_pmon(rule, p, aux)
    return check_bal(rule, p, *aux)


def _aux_survives(axiom: str, aux, p: MbcProblem) -> object | None:
    """Restate ``aux`` for a shrunken problem, or None if it no longer applies."""
    ids = set(p.claimants)
    if axiom == "CONS":
        kept = tuple(c for c in aux if c in ids)
        return kept if kept and len(kept) < p.n else None
    if axiom == "R-MON":
        bump = {i: v for i, v in aux.items() if i in p.issues}
        return bump or None
    if axiom == "P-MON":
        return aux if aux in ids and p.n >= 2 else None
    if axiom == "BAL":
        return aux if all(c in ids for c in aux) else None
    return aux


def _smaller_values(v: Fraction) -> list[Fraction]:
    out = []
    if v.denominator != 1:
        out.append(Fraction(v.numerator // v.denominator))
    half = Fraction(v.numerator // 2, v.denominator)
    if half < v:
        out.append(half)
    if v >= 1:
        out.append(v - 1)
    return [c for c in dict.fromkeys(out) if 0 <= c < v]


def _candidates(p: MbcProblem) -> Iterator[MbcProblem]:
    if p.n > 1:
        for j in range(p.n):
            keep = [k for k in range(p.n) if k != j]
            issues = sorted(set().union(*(p.alpha[k] for k in keep)))
            remap = {i: t for t, i in enumerate(issues)}
            yield MbcProblem(
                tuple(p.issues[i] for i in issues),
                tuple(p.claimants[k] for k in keep),
                tuple(p.estates[i] for i in issues),
                tuple(p.claims[k] for k in keep),
                tuple(frozenset(remap[i] for i in p.alpha[k]) for k in keep))
    for i, e in enumerate(p.estates):
        for smaller in _smaller_values(e):
            yield p.with_estates(p.estates[:i] + (smaller,) + p.estates[i + 1:])
    for j, c in enumerate(p.claims):
        for smaller in _smaller_values(c):
            yield replace(p, claims=p.claims[:j] + (smaller,) + p.claims[j + 1:])


def shrink(rule: Rule, axiom: str, report: AxiomReport, aux) -> tuple[AxiomReport, object]:
    """Greedy shrinking: drop claimants, then lower values, while still violated."""
    current, cur_aux = report, aux
    improved = True
    while improved:
        improved = False
        for cand in _candidates(current.problem):
            new_aux = _aux_survives(axiom, cur_aux, cand)
            if new_aux is None and axiom in ("CONS", "R-MON", "P-MON", "BAL"):
                continue
            try:
                rep = check(rule, axiom, cand, new_aux)
            except (ProblemError, KeyError):
                continue
            if rep.violated:
                current, cur_aux, improved = rep, new_aux, True
                break
    return current, cur_aux


def falsify(rule: Rule, axiom: str, params: GenParams | None = None, seed: int = 0,
            budget: int = 1000, minimize: bool = True) -> AxiomReport | None:
    """Search ``budget`` random instances for a violation of ``axiom`` by ``rule``.

    Instance ``t`` is drawn with a seed derived from ``(seed, t)``, so the first
    counterexample found is reproducible. Returns the (shrunk) report, or None.
    """
    axiom = axiom_tag(axiom)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    params = params or GenParams()
    if axiom == "ETE" and params.duplicates == 0:
        params = replace(params, duplicates=1)
    if axiom in ("P-MON", "BAL", "CONS") and params.claimants[0] < 2:
        params = replace(params, claimants=(2, max(2, params.claimants[1])))
    seeds = np.random.SeedSequence(seed).generate_state(budget, dtype=np.uint64)
    for t in range(budget):
        p = random_mbc(params, int(seeds[t]))
        rng = np.random.default_rng(int(seeds[t]) + 1)
        for aux in auxiliaries(axiom, p, rng):
            rep = check(rule, axiom, p, aux)
            if rep.violated:
                if minimize:
                    rep, aux = shrink(rule, axiom, rep, aux)
                return replace(rep, notes=rep.notes + (f"instance {t} of seed {seed}",))
    return None
