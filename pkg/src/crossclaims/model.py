"""Problem instances, allocations, feasibility and derived subproblems.

A problem is stored with dense indices: claimant ``j`` has claim ``claims[j]``
and demands the issue indices in ``alpha[j]``; issue ``i`` has ``estates[i]``.
The string identifiers are kept only for I/O and reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction


class ProblemError(ValueError):
    """Raised when a problem description is malformed or inconsistent.

    ``field`` names the offending entry (``"alpha.2"``, ``"estates.1"``...)
    so callers can point at it in the source document.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def to_rational(value: object, field: str | None = None) -> Fraction:
    """Parse an int, a decimal string or a ``"p/q"`` string into a Fraction."""
    if isinstance(value, bool):
        raise ProblemError(f"expected a rational, got {value!r}", field)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # JSON numbers such as 4.5 arrive as floats; go through the decimal text.
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ProblemError(f"expected a rational, got {value!r}", field)


@dataclass(frozen=True)
class MbcProblem:
    issues: tuple[str, ...]
    claimants: tuple[str, ...]
    estates: tuple[Fraction, ...]
    claims: tuple[Fraction, ...]
    alpha: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        m, n = len(self.issues), len(self.claimants)
        if len(set(self.issues)) != m:
            raise ProblemError("duplicate issue identifier", "issues")
        if len(set(self.claimants)) != n:
            raise ProblemError("duplicate claimant identifier", "claimants")
        if n == 0:
            raise ProblemError("a problem needs at least one claimant", "claimants")
        if len(self.estates) != m or len(self.claims) != n or len(self.alpha) != n:
            raise ProblemError("component lengths do not match issues/claimants")
        for i, e in enumerate(self.estates):
            if e < 0:
                raise ProblemError(f"negative estate for issue {self.issues[i]}",
                                   f"estates.{self.issues[i]}")
        claimed: set[int] = set()
        for j, (c, a) in enumerate(zip(self.claims, self.alpha)):
            cid = self.claimants[j]
            if c < 0:
                raise ProblemError(f"negative claim for claimant {cid}", f"claims.{cid}")
            if not a:
                raise ProblemError(f"claimant {cid} claims no issue", f"alpha.{cid}")
            if not all(0 <= i < m for i in a):
                raise ProblemError(f"claimant {cid} references an unknown issue", f"alpha.{cid}")
            claimed |= a
        for i in range(m):
            if i not in claimed:
                raise ProblemError(f"issue {self.issues[i]} is claimed by nobody",
                                   f"issues.{self.issues[i]}")

    @property
    def n(self) -> int:
        return len(self.claimants)

    @property
    def m(self) -> int:
        return len(self.issues)

    def claimants_of(self, issue: int) -> tuple[int, ...]:
        """Indices of the claimants demanding ``issue``, in problem order."""
        return tuple(j for j in range(self.n) if issue in self.alpha[j])

    def total_claim(self, issue: int) -> Fraction:
        return sum((self.claims[j] for j in self.claimants_of(issue)), Fraction(0))

    @property
    def binding(self) -> tuple[bool, ...]:
        """Per issue: does the total claim on it strictly exceed its estate?"""
        return tuple(self.total_claim(i) > self.estates[i] for i in range(self.m))

    def claimant_index(self, claimant: str | int) -> int:
        if isinstance(claimant, int) and not isinstance(claimant, bool):
            if 0 <= claimant < self.n:
                return claimant
            raise KeyError(claimant)
        return self.claimants.index(claimant)

    def issue_index(self, issue: str) -> int:
        return self.issues.index(issue)

    def with_estates(self, estates: Sequence[Fraction]) -> MbcProblem:
        return MbcProblem(self.issues, self.claimants, tuple(Fraction(e) for e in estates),
                          self.claims, self.alpha)

    def to_raw(self) -> dict:
        """Plain-data form using identifiers; inverse of :func:`validate_problem`."""
        return {
            "issues": list(self.issues),
            "claimants": list(self.claimants),
            "estates": {i: str(e) for i, e in zip(self.issues, self.estates)},
            "claims": {j: str(c) for j, c in zip(self.claimants, self.claims)},
            "alpha": {
                j: [self.issues[i] for i in sorted(a)]
                for j, a in zip(self.claimants, self.alpha)
            },
        }


@dataclass(frozen=True)
class Allocation:
    claimants: tuple[str, ...]
    values: tuple[Fraction, ...]

    @classmethod
    def of(cls, p: MbcProblem, values: Iterable) -> Allocation:
        vals = tuple(Fraction(v) for v in values)
        if len(vals) != p.n:
            raise ValueError(f"allocation has {len(vals)} entries for {p.n} claimants")
        return cls(p.claimants, vals)

    def __getitem__(self, claimant: str) -> Fraction:
        return self.values[self.claimants.index(claimant)]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.claimants, self.values))


@dataclass(frozen=True)
class ParetoVerdict:
    efficient: bool
    witness: tuple[str, Fraction] | None = None  # (claimant, improvement)


def validate_problem(raw: Mapping) -> MbcProblem:
    """Build a validated problem from a plain mapping.

    ``raw`` must hold ``issues`` and ``claimants`` (lists of identifiers),
    ``estates`` and ``claims`` (maps id -> rational) and ``alpha`` (map
    claimant -> list of issues). Identifiers are coerced to strings, so
    integer ids in JSON work too. Extra keys are ignored.
    """
    for key in ("issues", "claimants", "estates", "claims", "alpha"):
        if key not in raw:
            raise ProblemError(f"missing component {key!r}", key)
    issues = tuple(str(i) for i in raw["issues"])
    claimants = tuple(str(j) for j in raw["claimants"])
    if len(set(issues)) != len(issues):
        raise ProblemError("duplicate issue identifier", "issues")
    if len(set(claimants)) != len(claimants):
        raise ProblemError("duplicate claimant identifier", "claimants")

    def keyed(name: str, ids: tuple[str, ...]) -> dict[str, object]:
        table = raw[name]
        if not isinstance(table, Mapping):
            raise ProblemError(f"{name} must be a map", name)
        out = {str(k): v for k, v in table.items()}
        for k in out:
            if k not in ids:
                raise ProblemError(f"{name} mentions unknown identifier {k!r}", f"{name}.{k}")
        for k in ids:
            if k not in out:
                raise ProblemError(f"{name} has no entry for {k!r}", f"{name}.{k}")
        return out

    estates_raw = keyed("estates", issues)
    claims_raw = keyed("claims", claimants)
    alpha_raw = keyed("alpha", claimants)
    estates = tuple(to_rational(estates_raw[i], f"estates.{i}") for i in issues)
    claims = tuple(to_rational(claims_raw[j], f"claims.{j}") for j in claimants)
    position = {i: k for k, i in enumerate(issues)}
    alpha = []
    for j in claimants:
        demanded = alpha_raw[j]
        if isinstance(demanded, (str, int)):
            demanded = [demanded]
        idx = set()
        for i in demanded:
            if str(i) not in position:
                raise ProblemError(f"claimant {j} references unknown issue {i!r}", f"alpha.{j}")
            idx.add(position[str(i)])
        alpha.append(frozenset(idx))
    return MbcProblem(issues, claimants, estates, claims, tuple(alpha))


def _values(p: MbcProblem, x: Allocation | Sequence) -> tuple[Fraction, ...]:
    if isinstance(x, Allocation):
        if x.claimants != p.claimants:
            raise ValueError("allocation is indexed by different claimants")
        return x.values
    vals = tuple(Fraction(v) for v in x)
    if len(vals) != p.n:
        raise ValueError(f"allocation has {len(vals)} entries for {p.n} claimants")
    return vals


def residuals(p: MbcProblem, x: Allocation | Sequence) -> tuple[Fraction, ...]:
    """Unallocated amount of every issue: e_i minus what its claimants hold."""
    vals = _values(p, x)
    r = list(p.estates)
    for j, a in enumerate(p.alpha):
        for i in a:
            r[i] -= vals[j]
    return tuple(r)


def is_feasible(p: MbcProblem, x: Allocation | Sequence) -> bool:
    vals = _values(p, x)
    if any(v < 0 or v > c for v, c in zip(vals, p.claims)):
        return False
    return all(r >= 0 for r in residuals(p, vals))


def is_pareto_efficient(p: MbcProblem, x: Allocation | Sequence) -> ParetoVerdict:
    """Test Pareto efficiency by single-coordinate improvement.

    If some feasible ``a >= x`` is strictly larger for claimant ``j`` then every
    issue of ``j`` has slack at ``x``, so raising ``x_j`` alone is enough; the
    first such claimant is reported together with the largest feasible raise.
    """
    vals = _values(p, x)
    if not is_feasible(p, vals):
        raise ValueError("Pareto efficiency is only defined for feasible allocations")
    r = residuals(p, vals)
    for j, a in enumerate(p.alpha):
        slack = min(r[i] for i in a)
        room = p.claims[j] - vals[j]
        if room > 0 and slack > 0:
            return ParetoVerdict(False, (p.claimants[j], min(room, slack)))
    return ParetoVerdict(True)


def _restrict(p: MbcProblem, keep: Sequence[int], estates: Sequence[Fraction]) -> MbcProblem:
    """Sub-instance over the claimants ``keep`` and the issues they still claim."""
    issues_kept = sorted(set().union(*(p.alpha[j] for j in keep)))
    remap = {i: k for k, i in enumerate(issues_kept)}
    return MbcProblem(
        tuple(p.issues[i] for i in issues_kept),
        tuple(p.claimants[j] for j in keep),
        tuple(estates[i] for i in issues_kept),
        tuple(p.claims[j] for j in keep),
        tuple(frozenset(remap[i] for i in p.alpha[j]) for j in keep),
    )


def _indices(p: MbcProblem, claimants: Iterable[str | int]) -> list[int]:
    return sorted({p.claimant_index(c) for c in claimants})


def reduced_problem(p: MbcProblem, x: Allocation | Sequence,
                    keep: Iterable[str | int]) -> MbcProblem:
    """Problem left to ``keep`` once everybody else departs with their share of ``x``."""
    vals = _values(p, x)
    kept = _indices(p, keep)
    if not kept:
        raise ValueError("keep must be nonempty")
    gone = [j for j in range(p.n) if j not in kept]
    estates = list(p.estates)
    for j in gone:
        for i in p.alpha[j]:
            estates[i] -= vals[j]
    sub = _restrict(p, kept, estates)
    if any(e < 0 for e in sub.estates):
        raise AssertionError("reduced problem has a negative estate; x is not feasible")
    return sub


def removal_clamped(p: MbcProblem, leaver: str | int) -> bool:
    """True when removing ``leaver`` would push some estate below zero."""
    j = p.claimant_index(leaver)
    return any(p.claims[j] > p.estates[i] for i in p.alpha[j])


def removal_problem(p: MbcProblem, leaver: str | int) -> MbcProblem:
    """Problem after ``leaver`` is paid her full claim and leaves.

    Estates of her issues drop by her claim, clamped at zero; issues no remaining
    claimant demands are dropped.
    """
    j = p.claimant_index(leaver)
    if p.n < 2:
        raise ValueError("cannot remove the only claimant")
    estates = list(p.estates)
    for i in p.alpha[j]:
        estates[i] = max(Fraction(0), estates[i] - p.claims[j])
    return _restrict(p, [k for k in range(p.n) if k != j], estates)


def truncate(claims: Sequence[Fraction], estates: Sequence[Fraction],
             alpha: Sequence[frozenset[int]]) -> tuple[Fraction, ...]:
    return tuple(min(c, min(estates[i] for i in a)) for c, a in zip(claims, alpha))


def truncated_claims(p: MbcProblem) -> tuple[Fraction, ...]:
    """Each claim capped by the smallest estate among the claimant's issues."""
    return truncate(p.claims, p.estates, p.alpha)


def are_homologous(p: MbcProblem, j: str | int, k: str | int) -> bool:
    return p.alpha[p.claimant_index(j)] == p.alpha[p.claimant_index(k)]


def are_equal(p: MbcProblem, j: str | int, k: str | int) -> bool:
    a, b = p.claimant_index(j), p.claimant_index(k)
    return p.alpha[a] == p.alpha[b] and p.claims[a] == p.claims[b]
