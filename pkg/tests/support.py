"""Shared helpers: corpus loading, subject parsing, seeded random generators."""

from __future__ import annotations

import json
import random
from pathlib import Path

from thinspan.syntax import Arrow, Base, SimpleType, annotate, parse_context, parse_simple_type, parse_term
from thinspan.rigidtypes import IArrow, IType, Star, canonicalize_it, point_from_json

CORPUS_PATH = Path(__file__).resolve().parent.parent / "corpus" / "points.json"


def load_corpus() -> list[dict]:
    with open(CORPUS_PATH) as f:
        return json.load(f)


def parse_entry(entry: dict):
    """Parse a corpus entry into (ctx, annotated term, type, point)."""
    ctx = parse_context(entry.get("ctx", ""))
    term = parse_term(entry["term"])
    expected = parse_simple_type(entry["type"]) if "type" in entry else None
    term, ty = annotate(ctx, term, expected)
    point = point_from_json(entry["point"], ctx, ty)
    return ctx, term, ty, point


def entry_budget(entry: dict, default: int = 4) -> int:
    return int(entry.get("budget", default))


def rand_stype(rng: random.Random, depth: int) -> SimpleType:
    if depth <= 0 or rng.random() < 0.4:
        return Base()
    return Arrow(rand_stype(rng, depth - 1), rand_stype(rng, depth - 1))


def rand_itype(rng: random.Random, t: SimpleType, width: int = 3) -> IType:
    """A random rigid refinement of t, not necessarily canonical."""
    if isinstance(t, Base):
        return Star()
    seq = tuple(rand_itype(rng, t.domain, width) for _ in range(rng.randint(0, width)))
    return IArrow(seq, rand_itype(rng, t.codomain, width))


def rand_canonical(rng: random.Random, t: SimpleType, width: int = 3) -> IType:
    return canonicalize_it(rand_itype(rng, t, width))


def rand_reorder(rng: random.Random, a: IType) -> IType:
    """Shuffle sequence orders throughout, keeping the underlying multiset."""
    if isinstance(a, Star):
        return a
    elems = [rand_reorder(rng, x) for x in a.domain]
    rng.shuffle(elems)
    return IArrow(tuple(elems), rand_reorder(rng, a.codomain))
