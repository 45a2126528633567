"""Rigid and multiset intersection types refining simple types.

Rigid types use ordered sequences <a1,...,an>; collapsing the order gives
the usual non-idempotent multiset types [a1,...,an].  Multiset domains are
stored sorted under a fixed total order so that multiset equality is plain
structural equality.

A sequence type is represented as a bare tuple of ITypes.
"""

from __future__ import annotations

from dataclasses import dataclass
import re

from .syntax import Arrow, Base, SimpleType, TypingContext, type_to_text


class RefinementError(Exception):
    """Raised when a rigid or multiset type does not refine the simple type."""


####################################################################
# rigid types

@dataclass(frozen=True)
class Star:
    def __repr__(self) -> str:
        return "*"


@dataclass(frozen=True)
class IArrow:
    domain: tuple["IType", ...]
    codomain: "IType"

    def __repr__(self) -> str:
        return it_to_text(self)


IType = Star | IArrow
SeqType = tuple[IType, ...]

STAR = Star()


####################################################################
# multiset types

@dataclass(frozen=True)
class MStar:
    def __repr__(self) -> str:
        return "*"


@dataclass(frozen=True)
class MArrow:
    domain: tuple["MultisetIType", ...]
    codomain: "MultisetIType"

    def __post_init__(self):
        # multiset domains are kept sorted; order of construction is irrelevant
        object.__setattr__(self, "domain", tuple(sorted(self.domain, key=key_mit)))

    def __repr__(self) -> str:
        return mit_to_text(self)


MultisetIType = MStar | MArrow

MSTAR = MStar()


####################################################################
# total orders
#
# star sorts before arrows; arrows sort by domain length, then by the
# domain components lexicographically, then by the codomain.

def key_it(a: IType):
    match a:
        case Star():
            return (0,)
        case IArrow(d, c):
            return (1, len(d), tuple(key_it(x) for x in d), key_it(c))
    raise TypeError(f"not a rigid type: {a!r}")


def key_mit(a: MultisetIType):
    match a:
        case MStar():
            return (0,)
        case MArrow(d, c):
            return (1, len(d), tuple(key_mit(x) for x in d), key_mit(c))
    raise TypeError(f"not a multiset type: {a!r}")


def compare_it(a: IType, b: IType) -> int:
    ka, kb = key_it(a), key_it(b)
    return -1 if ka < kb else (0 if ka == kb else 1)


def compare_mit(a: MultisetIType, b: MultisetIType) -> int:
    ka, kb = key_mit(a), key_mit(b)
    return -1 if ka < kb else (0 if ka == kb else 1)


####################################################################
# refinement

def refines(a: IType, t: SimpleType) -> bool:
    match a, t:
        case Star(), Base():
            return True
        case IArrow(d, c), Arrow(td, tc):
            return all(refines(x, td) for x in d) and refines(c, tc)
        case _:
            return False


def refines_seq(seq: SeqType, t: SimpleType) -> bool:
    return all(refines(a, t) for a in seq)


def mrefines(m: MultisetIType, t: SimpleType) -> bool:
    match m, t:
        case MStar(), Base():
            return True
        case MArrow(d, c), Arrow(td, tc):
            return all(mrefines(x, td) for x in d) and mrefines(c, tc)
        case _:
            return False


def require_refines(a: IType, t: SimpleType, what: str = "type") -> None:
    if not refines(a, t):
        raise RefinementError(f"{what} {it_to_text(a)} does not refine {type_to_text(t)}")


####################################################################
# collapse and canonical representatives

def collapse_it(a: IType) -> MultisetIType:
    match a:
        case Star():
            return MSTAR
        case IArrow(d, c):
            return MArrow(tuple(collapse_it(x) for x in d), collapse_it(c))
    raise TypeError(f"not a rigid type: {a!r}")


def collapse_seq(seq: SeqType) -> tuple[MultisetIType, ...]:
    return tuple(sorted((collapse_it(a) for a in seq), key=key_mit))


def canonicalize_it(a: IType) -> IType:
    """Sort every sequence after canonicalizing its components."""
    match a:
        case Star():
            return a
        case IArrow(d, c):
            return IArrow(canonicalize_seq(d), canonicalize_it(c))
    raise TypeError(f"not a rigid type: {a!r}")


def canonicalize_seq(seq: SeqType) -> SeqType:
    return tuple(sorted((canonicalize_it(a) for a in seq), key=key_it))


def is_canonical(a: IType) -> bool:
    return canonicalize_it(a) == a


def rigidify_mit(m: MultisetIType) -> IType:
    """The canonical rigid representative of a multiset type."""
    match m:
        case MStar():
            return STAR
        case MArrow(d, c):
            return IArrow(tuple(sorted((rigidify_mit(x) for x in d), key=key_it)),
                          rigidify_mit(c))
    raise TypeError(f"not a multiset type: {m!r}")


def rigidify_mset(ms: tuple[MultisetIType, ...]) -> SeqType:
    return tuple(sorted((rigidify_mit(m) for m in ms), key=key_it))


####################################################################
# resource contexts

@dataclass(frozen=True)
class ResourceContext:
    """Per-variable sequence types over a fixed list of typed variables."""

    entries: tuple[tuple[str, SeqType, SimpleType], ...] = ()

    def lookup(self, name: str) -> SeqType:
        for x, seq, _ in self.entries:
            if x == name:
                return seq
        raise KeyError(name)

    def names(self) -> tuple[str, ...]:
        return tuple(x for x, _, _ in self.entries)

    def shape(self) -> tuple[tuple[str, SimpleType], ...]:
        return tuple((x, t) for x, _, t in self.entries)

    def is_empty(self) -> bool:
        return all(len(seq) == 0 for _, seq, _ in self.entries)

    def __add__(self, other: "ResourceContext") -> "ResourceContext":
        return concat_ctx(self, other)

    def __repr__(self) -> str:
        return ctx_to_text(self)


def concat_ctx(a: ResourceContext, b: ResourceContext) -> ResourceContext:
    if a.shape() != b.shape():
        raise RefinementError(
            f"cannot concatenate contexts over different variables: "
            f"{a.shape()} vs {b.shape()}")
    return ResourceContext(tuple(
        (x, sa + sb, t)
        for (x, sa, t), (_, sb, _) in zip(a.entries, b.entries)))


def empty_ctx_like(shape: tuple[tuple[str, SimpleType], ...]) -> ResourceContext:
    return ResourceContext(tuple((x, (), t) for x, t in shape))


def singleton_ctx(shape: tuple[tuple[str, SimpleType], ...], name: str, a: IType) -> ResourceContext:
    if name not in [x for x, _ in shape]:
        raise RefinementError(f"variable {name!r} not in context")
    return ResourceContext(tuple(
        (x, (a,) if x == name else (), t) for x, t in shape))


def canonicalize_ctx(c: ResourceContext) -> ResourceContext:
    return ResourceContext(tuple(
        (x, canonicalize_seq(seq), t) for x, seq, t in c.entries))


def ctx_refines(c: ResourceContext) -> bool:
    return all(refines_seq(seq, t) for _, seq, t in c.entries)


####################################################################
# points of the multiset web

@dataclass(frozen=True)
class PointSpec:
    """A context of per-variable multisets plus a result multiset type."""

    ctx: tuple[tuple[str, tuple[MultisetIType, ...]], ...]
    result: MultisetIType

    def __post_init__(self):
        object.__setattr__(self, "ctx", tuple(
            (x, tuple(sorted(ms, key=key_mit))) for x, ms in self.ctx))

    def ctx_lookup(self, name: str) -> tuple[MultisetIType, ...]:
        for x, ms in self.ctx:
            if x == name:
                return ms
        return ()


def canonicalize_point(p: PointSpec, ctx: TypingContext,
                       result_type: SimpleType) -> tuple[ResourceContext, IType]:
    """Turn a multiset point into its canonical rigid point, checking refinement.

    The resource context ranges over every variable of ctx, in ctx order;
    variables missing from the point get the empty sequence.
    """
    known = set(ctx.names())
    for x, _ in p.ctx:
        if x not in known:
            raise RefinementError(f"point mentions variable {x!r} not bound in the context")
    entries = []
    for x, t in ctx:
        ms = p.ctx_lookup(x)
        for m in ms:
            if not mrefines(m, t):
                raise RefinementError(
                    f"entry {mit_to_text(m)} for variable {x!r} does not refine {type_to_text(t)}")
        entries.append((x, rigidify_mset(ms), t))
    if not mrefines(p.result, result_type):
        raise RefinementError(
            f"result {mit_to_text(p.result)} does not refine {type_to_text(result_type)}")
    return ResourceContext(tuple(entries)), rigidify_mit(p.result)


####################################################################
# text notation
#
#   *                      base
#   <a1,...,an> -o b       rigid arrow (ordered domain)
#   [a1,...,an] -o b       multiset arrow
#
# -o is right-associative; whitespace is free.

_IT_TOKEN_RE = re.compile(r"\s*(?:(?P<lolli>-o)|(?P<punct>[*<>\[\](),]))")


def _it_tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _IT_TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise RefinementError(f"unexpected character {text[pos]!r} at position {pos} in type notation")
        toks.append(("-o" if m.lastgroup == "lolli" else m.group("punct"), m.start()))
        pos = m.end()
    toks.append(("eof", len(text)))
    return toks


class _ITParser:
    def __init__(self, text: str, allow_multiset: bool, allow_seq: bool):
        self.toks = _it_tokenize(text)
        self.i = 0
        self.allow_multiset = allow_multiset
        self.allow_seq = allow_seq

    def peek(self):
        return self.toks[self.i][0]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str):
        k, p = self.next()
        if k != kind:
            raise RefinementError(f"expected {kind!r} at position {p} in type notation, found {k!r}")

    def parse_type(self) -> IType:
        k = self.peek()
        if k in ("<", "["):
            seq = self.parse_seq()
            self.expect("-o")
            return IArrow(seq, self.parse_type())
        if k == "*":
            self.next()
            return STAR
        if k == "(":
            self.next()
            t = self.parse_type()
            self.expect(")")
            return t
        raise RefinementError(f"expected a type at position {self.toks[self.i][1]}, found {k!r}")

    def parse_seq(self) -> SeqType:
        k, p = self.next()
        close = {"<": ">", "[": "]"}[k]
        if k == "[" and not self.allow_multiset:
            raise RefinementError(f"multiset brackets at position {p} where a rigid type is required")
        if k == "<" and not self.allow_seq:
            raise RefinementError(f"sequence brackets at position {p} where a multiset type is required")
        items: list[IType] = []
        if self.peek() == close:
            self.next()
            return ()
        while True:
            items.append(self.parse_type())
            k2, p2 = self.next()
            if k2 == close:
                return tuple(items)
            if k2 != ",":
                raise RefinementError(f"expected ',' or {close!r} at position {p2} in type notation")

    def finish(self):
        if self.peek() != "eof":
            raise RefinementError(f"trailing input at position {self.toks[self.i][1]} in type notation")


def parse_itype(text: str) -> IType:
    p = _ITParser(text, allow_multiset=False, allow_seq=True)
    t = p.parse_type()
    p.finish()
    return t


def parse_mit(text: str) -> MultisetIType:
    """Multiset type notation; rigid sequence brackets are accepted and collapsed."""
    p = _ITParser(text, allow_multiset=True, allow_seq=True)
    t = p.parse_type()
    p.finish()
    return collapse_it(t)


def parse_mset(text: str) -> tuple[MultisetIType, ...]:
    """A bare multiset of types, e.g. "[[*,*]-o*]"; used for context entries."""
    p = _ITParser(text, allow_multiset=True, allow_seq=True)
    seq = p.parse_seq()
    p.finish()
    return tuple(sorted((collapse_it(t) for t in seq), key=key_mit))


def it_to_text(a: IType) -> str:
    match a:
        case Star():
            return "*"
        case IArrow(d, c):
            return f"{seq_to_text(d)}-o{it_to_text(c)}"
    raise TypeError(f"not a rigid type: {a!r}")


def seq_to_text(seq: SeqType) -> str:
    return "<" + ",".join(it_to_text(a) for a in seq) + ">"


def mit_to_text(m: MultisetIType) -> str:
    match m:
        case MStar():
            return "*"
        case MArrow(d, c):
            return f"{mset_to_text(d)}-o{mit_to_text(c)}"
    raise TypeError(f"not a multiset type: {m!r}")


def mset_to_text(ms: tuple[MultisetIType, ...]) -> str:
    return "[" + ",".join(mit_to_text(m) for m in ms) + "]"


def ctx_to_text(c: ResourceContext) -> str:
    return ", ".join(f"{x}:{seq_to_text(seq)}" for x, seq, _ in c.entries)


def point_from_json(obj: dict, ctx: TypingContext, result_type: SimpleType) -> PointSpec:
    """Build a PointSpec from {"ctx": {var: "<mset>"}, "type": "<mit>"} data."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise RefinementError('point must be an object with "ctx" and "type" fields')
    raw_ctx = obj.get("ctx", {})
    if not isinstance(raw_ctx, dict):
        raise RefinementError('point "ctx" must map variable names to multiset notation')
    entries = []
    for x, text in raw_ctx.items():
        if ctx.lookup(x) is None:
            raise RefinementError(f"point mentions variable {x!r} not bound in the context")
        entries.append((x, parse_mset(text)))
    result = parse_mit(obj["type"])
    p = PointSpec(tuple(entries), result)
    # fail fast on refinement errors
    canonicalize_point(p, ctx, result_type)
    return p


def point_to_json(p: PointSpec) -> dict:
    return {
        "ctx": {x: mset_to_text(ms) for x, ms in p.ctx if ms},
        "type": mit_to_text(p.result),
    }
