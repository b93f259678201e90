"""Seeded random problem instances for property suites and falsification."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Mapping

import numpy as np

from crossclaims.model import MbcProblem


@dataclass(frozen=True)
class GenParams:
    claimants: tuple[int, int] = (2, 5)
    issues: tuple[int, int] = (1, 3)
    claim_range: tuple[int, int] = (1, 8)
    # Binding issues get an estate of this fraction of their total claim.
    estate_fraction: tuple[float, float] = (0.3, 0.95)
    binding_prob: float = 0.9
    alpha_density: float = 0.5
    duplicates: int = 0
    rational: bool = False

    def __post_init__(self) -> None:
        for name in ("claimants", "issues", "claim_range", "estate_fraction"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"empty range for {name}: {lo} > {hi}")
        if self.claimants[0] < 1 or self.issues[0] < 1:
            raise ValueError("need at least one claimant and one issue")
        if self.claim_range[0] < 0:
            raise ValueError("claims must be nonnegative")

    @classmethod
    def from_mapping(cls, raw: Mapping) -> GenParams:
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown generator parameters: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
        return cls(**kw)

    def to_mapping(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def _draw_alpha(rng: np.random.Generator, n: int, m: int, density: float) -> list[set[int]]:
    for _ in range(100):
        alpha = [{i for i in range(m) if rng.random() < density} for _ in range(n)]
        if all(alpha) and set().union(*alpha) == set(range(m)):
            return alpha
    # Very sparse densities: repair the last draw instead of looping forever.
    for a in alpha:
        if not a:
            a.add(int(rng.integers(m)))
    for i in range(m):
        if not any(i in a for a in alpha):
            alpha[int(rng.integers(n))].add(i)
    return alpha


def random_mbc(params: GenParams = GenParams(), seed: int = 0) -> MbcProblem:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(params.claimants[0], params.claimants[1] + 1))
    m = int(rng.integers(params.issues[0], params.issues[1] + 1))
    lo, hi = params.claim_range

    def value() -> Fraction:
        v = Fraction(int(rng.integers(lo, hi + 1)))
        if params.rational:
            v += Fraction(int(rng.integers(0, 4)), 4)
        return v

    claims = [value() for _ in range(n)]
    alpha = _draw_alpha(rng, n, m, params.alpha_density)
    for _ in range(params.duplicates):
        src = int(rng.integers(len(claims)))
        claims.append(claims[src])
        alpha.append(set(alpha[src]))
    estates = []
    for i in range(m):
        total = sum((c for c, a in zip(claims, alpha) if i in a), Fraction(0))
        if rng.random() < params.binding_prob and total > 0:
            frac = rng.uniform(*params.estate_fraction)
            e = Fraction(int(frac * float(total)))
            if params.rational:
                e += Fraction(int(rng.integers(0, 4)), 4)
            estates.append(min(e, total - Fraction(1, 4) if params.rational else total - 1))
        else:
            estates.append(total + int(rng.integers(0, hi + 1)))
    estates = [max(e, Fraction(0)) for e in estates]
    return MbcProblem(
        tuple(str(i + 1) for i in range(m)),
        tuple(str(j + 1) for j in range(len(claims))),
        tuple(estates),
        tuple(claims),
        tuple(frozenset(a) for a in alpha),
    )
