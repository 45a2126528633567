"""Simply-typed lambda-terms: parsing, typing, beta-normalization.

Terms follow the Barendregt convention: after parsing (and again after
normalization) all binders are pairwise distinct and distinct from every
free variable.  The rest of the package leans on this -- resource contexts
are keyed by variable name, so shadowing is never allowed to survive.

Binder annotations are optional in the concrete syntax.  An unannotated
binder is only legal when the full simple type of the term is supplied,
in which case annotations are filled in by structural matching against
the expected type (`annotate`).
"""

from __future__ import annotations

from dataclasses import dataclass
import re


class ParseError(Exception):
    """Raised on malformed input text, with a position in the message."""


class TypeCheckError(Exception):
    """Raised when a term has no simple type in the given context."""


####################################################################
# simple types

@dataclass(frozen=True)
class Base:
    def __repr__(self) -> str:
        return "o"


@dataclass(frozen=True)
class Arrow:
    domain: "SimpleType"
    codomain: "SimpleType"

    def __repr__(self) -> str:
        return type_to_text(self)


SimpleType = Base | Arrow

O = Base()


def type_to_text(t: SimpleType) -> str:
    match t:
        case Base():
            return "o"
        case Arrow(d, c):
            left = type_to_text(d)
            if isinstance(d, Arrow):
                left = f"({left})"
            return f"{left} -> {type_to_text(c)}"
    raise TypeError(f"not a simple type: {t!r}")


def type_order(t: SimpleType) -> int:
    match t:
        case Base():
            return 0
        case Arrow(d, c):
            return max(type_order(d) + 1, type_order(c))
    raise TypeError(f"not a simple type: {t!r}")


####################################################################
# terms

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    binder: str
    body: "Term"
    annot: SimpleType | None = None


Term = Var | App | Lam


def free_vars(t: Term) -> set[str]:
    match t:
        case Var(x):
            return {x}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Lam(x, b, _):
            return free_vars(b) - {x}
    raise TypeError(f"not a term: {t!r}")


def binders(t: Term) -> list[str]:
    match t:
        case Var(_):
            return []
        case App(f, a):
            return binders(f) + binders(a)
        case Lam(x, b, _):
            return [x] + binders(b)
    raise TypeError(f"not a term: {t!r}")


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Unwind nested applications: spine(f a b) = (f, [a, b])."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def term_to_text(t: Term) -> str:
    match t:
        case Var(x):
            return x
        case Lam(x, b, ann):
            a = f":{type_to_text(ann)}" if ann is not None else ""
            return f"\\{x}{a}. {term_to_text(b)}"
        case App(_, _):
            head, args = spine(t)
            parts = [_atom_text(head)] + [_atom_text(a) for a in args]
            return " ".join(parts)
    raise TypeError(f"not a term: {t!r}")


def _atom_text(t: Term) -> str:
    s = term_to_text(t)
    return s if isinstance(t, Var) else f"({s})"


####################################################################
# tokenizer, shared by terms / simple types / contexts

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<ident>[a-zA-Z_][a-zA-Z0-9_']*)"
    r"|(?P<punct>[\\.():,]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
        if m.lastgroup == "arrow":
            toks.append(("arrow", "->", m.start()))
        elif m.lastgroup == "ident":
            toks.append(("ident", m.group("ident"), m.start("ident")))
        else:
            toks.append((m.group("punct"), m.group("punct"), m.start("punct")))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Tokens:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> tuple[str, str, int]:
        k, v, p = self.next()
        if k != kind:
            raise ParseError(f"expected {kind!r} but found {v or 'end of input'!r} at position {p}")
        return k, v, p

    def done(self) -> bool:
        return self.peek()[0] == "eof"


####################################################################
# parsing

def parse_simple_type(text: str) -> SimpleType:
    ts = _Tokens(text)
    t = _parse_stype(ts)
    if not ts.done():
        k, v, p = ts.peek()
        raise ParseError(f"trailing input {v!r} at position {p}")
    return t


def _parse_stype(ts: _Tokens) -> SimpleType:
    left = _parse_stype_atom(ts)
    if ts.peek()[0] == "arrow":
        ts.next()
        return Arrow(left, _parse_stype(ts))
    return left


def _parse_stype_atom(ts: _Tokens) -> SimpleType:
    k, v, p = ts.next()
    if k == "ident":
        if v == "o":
            return O
        raise ParseError(f"unknown base type {v!r} at position {p}")
    if k == "(":
        t = _parse_stype(ts)
        ts.expect(")")
        return t
    raise ParseError(f"expected a type but found {v or 'end of input'!r} at position {p}")


def parse_term(text: str) -> Term:
    """Parse and freshen so the Barendregt convention holds."""
    ts = _Tokens(text)
    t = _parse_term(ts)
    if not ts.done():
        k, v, p = ts.peek()
        raise ParseError(f"trailing input {v!r} at position {p}")
    return ensure_distinct_binders(t)


def _parse_term(ts: _Tokens) -> Term:
    if ts.peek()[0] == "\\":
        ts.next()
        _, x, _ = ts.expect("ident")
        ann = None
        if ts.peek()[0] == ":":
            ts.next()
            ann = _parse_stype(ts)
        ts.expect(".")
        return Lam(x, _parse_term(ts), ann)
    t = _parse_atom(ts)
    while ts.peek()[0] in ("ident", "(", "\\"):
        if ts.peek()[0] == "\\":
            # juxtaposed lambda argument must be parenthesized; stop here
            break
        t = App(t, _parse_atom(ts))
    return t


def _parse_atom(ts: _Tokens) -> Term:
    k, v, p = ts.next()
    if k == "ident":
        return Var(v)
    if k == "(":
        t = _parse_term(ts)
        ts.expect(")")
        return t
    raise ParseError(f"expected a term but found {v or 'end of input'!r} at position {p}")


####################################################################
# typing contexts

@dataclass(frozen=True)
class TypingContext:
    bindings: tuple[tuple[str, SimpleType], ...] = ()

    def __post_init__(self):
        names = [x for x, _ in self.bindings]
        if len(set(names)) != len(names):
            raise TypeCheckError(f"duplicate variable in context: {names}")

    def lookup(self, name: str) -> SimpleType | None:
        for x, t in self.bindings:
            if x == name:
                return t
        return None

    def extend(self, name: str, ty: SimpleType) -> "TypingContext":
        if self.lookup(name) is not None:
            raise TypeCheckError(f"variable {name!r} already bound in context")
        return TypingContext(self.bindings + ((name, ty),))

    def names(self) -> tuple[str, ...]:
        return tuple(x for x, _ in self.bindings)

    def __iter__(self):
        return iter(self.bindings)

    def __repr__(self) -> str:
        return context_to_text(self)


def context_to_text(ctx: TypingContext) -> str:
    return ", ".join(f"{x}:{type_to_text(t)}" for x, t in ctx.bindings)


def parse_context(text: str) -> TypingContext:
    text = text.strip()
    if not text:
        return TypingContext()
    ts = _Tokens(text)
    bindings = []
    while True:
        _, x, _ = ts.expect("ident")
        ts.expect(":")
        bindings.append((x, _parse_stype(ts)))
        if ts.peek()[0] != ",":
            break
        ts.next()
    if not ts.done():
        k, v, p = ts.peek()
        raise ParseError(f"trailing input {v!r} at position {p}")
    return TypingContext(tuple(bindings))


####################################################################
# freshness

def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    stem = base.rstrip("0123456789")
    i = 1
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


def ensure_distinct_binders(t: Term, reserved: set[str] | None = None) -> Term:
    """Rename binders so all are distinct from each other and from free vars."""
    taken = set(free_vars(t)) | (reserved or set())

    def go(t: Term, env: dict[str, str]) -> Term:
        match t:
            case Var(x):
                return Var(env.get(x, x))
            case App(f, a):
                return App(go(f, env), go(a, env))
            case Lam(x, b, ann):
                x2 = fresh_name(x, taken)
                taken.add(x2)
                return Lam(x2, go(b, {**env, x: x2}), ann)
        raise TypeError(f"not a term: {t!r}")

    return go(t, {})


####################################################################
# typing

def annotate(ctx: TypingContext, t: Term, expected: SimpleType | None = None) -> tuple[Term, SimpleType]:
    """Return a fully annotated copy of t together with its simple type.

    With expected=None every binder must already carry an annotation.
    """
    match t:
        case Var(x):
            ty = ctx.lookup(x)
            if ty is None:
                raise TypeCheckError(f"unbound variable {x!r}")
            if expected is not None and ty != expected:
                raise TypeCheckError(
                    f"variable {x!r} has type {type_to_text(ty)}, expected {type_to_text(expected)}")
            return t, ty
        case Lam(x, b, ann):
            if expected is not None:
                if not isinstance(expected, Arrow):
                    raise TypeCheckError(
                        f"lambda \\{x} cannot have base type {type_to_text(expected)}")
                if ann is not None and ann != expected.domain:
                    raise TypeCheckError(
                        f"binder {x!r} annotated {type_to_text(ann)} but expected {type_to_text(expected.domain)}")
                b2, _ = annotate(ctx.extend(x, expected.domain), b, expected.codomain)
                return Lam(x, b2, expected.domain), expected
            if ann is None:
                raise TypeCheckError(
                    f"binder {x!r} lacks an annotation and no expected type is available")
            b2, bt = annotate(ctx.extend(x, ann), b, None)
            return Lam(x, b2, ann), Arrow(ann, bt)
        case App(f, a):
            if isinstance(f, Lam) and f.annot is None:
                # redex with an unannotated binder: the argument determines it
                a2, at = annotate(ctx, a, None)
                b2, bt = annotate(ctx.extend(f.binder, at), f.body, expected)
                return App(Lam(f.binder, b2, at), a2), bt
            f2, ft = annotate(ctx, f, None)
            if not isinstance(ft, Arrow):
                raise TypeCheckError(
                    f"cannot apply {term_to_text(f)} of base type to {term_to_text(a)}")
            a2, _ = annotate(ctx, a, ft.domain)
            if expected is not None and ft.codomain != expected:
                raise TypeCheckError(
                    f"application has type {type_to_text(ft.codomain)}, expected {type_to_text(expected)}")
            return App(f2, a2), ft.codomain
    raise TypeError(f"not a term: {t!r}")


def typecheck(ctx: TypingContext, t: Term, expected: SimpleType | None = None) -> SimpleType:
    _, ty = annotate(ctx, t, expected)
    return ty


####################################################################
# reduction

def substitute(t: Term, x: str, s: Term) -> Term:
    """Capture-avoiding substitution t[s/x]."""
    match t:
        case Var(y):
            return s if y == x else t
        case App(f, a):
            return App(substitute(f, x, s), substitute(a, x, s))
        case Lam(y, b, ann):
            if y == x:
                return t
            if y in free_vars(s):
                y2 = fresh_name(y, free_vars(s) | free_vars(b) | {x})
                b = substitute(b, y, Var(y2))
                return Lam(y2, substitute(b, x, s), ann)
            return Lam(y, substitute(b, x, s), ann)
    raise TypeError(f"not a term: {t!r}")


def is_beta_normal(t: Term) -> bool:
    match t:
        case Var(_):
            return True
        case Lam(_, b, _):
            return is_beta_normal(b)
        case App(f, a):
            return not isinstance(f, Lam) and is_beta_normal(f) and is_beta_normal(a)
    raise TypeError(f"not a term: {t!r}")


def _whnf(t: Term) -> Term:
    match t:
        case App(f, a):
            fh = _whnf(f)
            if isinstance(fh, Lam):
                return _whnf(substitute(fh.body, fh.binder, a))
            return App(fh, a)
        case _:
            return t


def _nf(t: Term) -> Term:
    t = _whnf(t)
    match t:
        case Var(_):
            return t
        case Lam(x, b, ann):
            return Lam(x, _nf(b), ann)
        case App(f, a):
            # head is rigid after _whnf; normalize the pieces
            return App(_nf(f), _nf(a))
    raise TypeError(f"not a term: {t!r}")


def beta_normalize(t: Term) -> Term:
    """Leftmost-outermost reduction to beta-normal form, then re-freshened."""
    return ensure_distinct_binders(_nf(t))


####################################################################
# alpha-equivalence

def _debruijn(t: Term, env: tuple[str, ...]):
    match t:
        case Var(x):
            for i, y in enumerate(reversed(env)):
                if x == y:
                    return ("b", i)
            return ("f", x)
        case App(f, a):
            return ("a", _debruijn(f, env), _debruijn(a, env))
        case Lam(x, b, ann):
            return ("l", ann, _debruijn(b, env + (x,)))
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(s: Term, t: Term) -> bool:
    return _debruijn(s, ()) == _debruijn(t, ())
