"""Problem files and rational formatting."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

from crossclaims.model import MbcProblem, validate_problem

FIXTURES = ("example1", "rmon", "peff", "figure2", "crastar_example")


def fmt(v: Fraction, decimals: int | None = None) -> str:
    """``"p/q"`` in lowest terms (bare ``"p"`` for integers), or fixed-point."""
    v = Fraction(v)
    if decimals is None:
        return str(v)
    return _fixed(v, decimals)


def _fixed(v: Fraction, decimals: int) -> str:
    scaled = round(v * 10 ** decimals)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10 ** decimals)
    return f"{sign}{whole}.{frac:0{decimals}d}" if decimals else f"{sign}{whole}"


def loads(text: str) -> MbcProblem:
    return validate_problem(json.loads(text))


def load(path: str | Path) -> MbcProblem:
    return loads(Path(path).read_text())


def dumps(p: MbcProblem, **extra) -> str:
    """Canonical JSON for ``p``; ``extra`` keys are appended (loaders ignore them)."""
    doc = p.to_raw()
    doc.update(extra)
    return json.dumps(doc, indent=2) + "\n"


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    return Path(str(resources.files("crossclaims.fixtures").joinpath(f"{name}.json")))


def load_fixture(name: str) -> MbcProblem:
    return load(fixture_path(name))
