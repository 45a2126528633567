"""Rigid derivations, resource terms, witness enumeration, and the
groupoid of derivations.

A derivation assigns a rigid point (resource context, rigid type) to a
simply-typed term.  The rules, one per node kind:

  var:    x picks a single label; every other variable gets the empty
          sequence.
  app:    the function part concludes <a1,...,an> -o b, the argument part
          is a multi node concluding exactly <a1,...,an>; contexts
          concatenate, function part first.
  multi:  n independent derivations of the same term, one per sequence
          element, contexts concatenated left to right.
  lam:    the binder's entry (last in the body context) moves into the
          arrow domain.

Derivations of a fixed term biject with rigid resource terms, so resource
terms double as a canonical serialization, and morphisms between
derivations are enumerated structurally on the underlying resource terms.

Morphisms between derivations rebase every node: var nodes carry a label
morphism, multi nodes a permutation acting on children, app nodes share
the argument sequence morphism with the function side's domain.  This last
constraint is what distinguishes rigid terms from plain multiset resource
terms: in a redex, the argument sequence can only be permuted together
with the matching occurrences of the bound variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product

from .syntax import (
    App, Lam, SimpleType, Term, TypingContext, Var,
    annotate, binders, is_beta_normal, spine, term_to_text, type_to_text, typecheck,
)
from .rigidtypes import (
    IArrow, IType, MArrow, MStar, MSTAR, MultisetIType, ResourceContext, SeqType, Star,
    canonicalize_ctx, canonicalize_it, collapse_it, concat_ctx, ctx_refines, ctx_to_text,
    empty_ctx_like, it_to_text, key_mit, refines, singleton_ctx,
)
from .symmetry import (
    ArrowMorphism, CtxMorphism, ITMorphism, MorphismError, SeqMorphism,
    compose_it, compose_perm, ctx_sigma_action, concat_ctxm, empty_ctxm_like,
    enumerate_homs_it, identity_it, identity_perm, invert_it, inverse_perm,
    singleton_ctxm, src_ctx, src_it, src_seq, tgt_ctx, tgt_it, tgt_seq,
)


class DerivationError(Exception):
    """Raised when derivation pieces do not fit a rule."""


class BudgetRequiredError(Exception):
    """Raised when enumerating witnesses of a non-normal term without a budget."""


####################################################################
# derivations

@dataclass(frozen=True)
class VarRule:
    name: str
    label: IType
    context: ResourceContext

    @property
    def result(self) -> IType:
        return self.label


@dataclass(frozen=True)
class MultiDerivation:
    children: tuple["Derivation", ...]
    context: ResourceContext
    result: SeqType


@dataclass(frozen=True)
class AppRule:
    fn: "Derivation"
    arg: MultiDerivation
    context: ResourceContext
    result: IType


@dataclass(frozen=True)
class LamRule:
    binder: str
    binder_type: SimpleType
    body: "Derivation"
    context: ResourceContext
    result: IType


Derivation = VarRule | AppRule | LamRule

Shape = tuple[tuple[str, SimpleType], ...]


def mk_var(shape: Shape, name: str, label: IType) -> VarRule:
    ty = dict(shape).get(name)
    if ty is None:
        raise DerivationError(f"variable {name!r} not in scope")
    if not refines(label, ty):
        raise DerivationError(f"label {it_to_text(label)} does not refine {type_to_text(ty)}")
    return VarRule(name, label, singleton_ctx(shape, name, label))


def mk_multi(shape: Shape, children: tuple[Derivation, ...]) -> MultiDerivation:
    ctx = empty_ctx_like(shape)
    for c in children:
        ctx = concat_ctx(ctx, c.context)
    return MultiDerivation(tuple(children), ctx, tuple(c.result for c in children))


def mk_app(fn: Derivation, arg: MultiDerivation) -> AppRule:
    if not isinstance(fn.result, IArrow):
        raise DerivationError(f"function part concludes {it_to_text(fn.result)}, not an arrow")
    if fn.result.domain != arg.result:
        raise DerivationError(
            f"argument multi concludes {arg.result}, function domain is {fn.result.domain}")
    return AppRule(fn, arg, concat_ctx(fn.context, arg.context), fn.result.codomain)


def mk_lam(binder: str, binder_type: SimpleType, body: Derivation) -> LamRule:
    entries = body.context.entries
    if not entries or entries[-1][0] != binder or entries[-1][2] != binder_type:
        raise DerivationError(f"body context does not end with binder {binder!r}")
    dom = entries[-1][1]
    return LamRule(binder, binder_type, body,
                   ResourceContext(entries[:-1]), IArrow(dom, body.result))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_derivation(d: Derivation | MultiDerivation) -> CheckResult:
    """Re-validate every node against its rule."""
    try:
        _check(d)
    except DerivationError as e:
        return CheckResult(False, str(e))
    return CheckResult(True)


def _check(d: Derivation | MultiDerivation) -> None:
    match d:
        case VarRule(name, label, context):
            rebuilt = mk_var(context.shape(), name, label)
            if rebuilt != d:
                raise DerivationError(f"var node for {name!r} has a wrong context")
        case MultiDerivation(children, context, result):
            for c in children:
                _check(c)
            rebuilt = mk_multi(context.shape(), children)
            if rebuilt != d:
                raise DerivationError("multi node conclusion does not match its children")
        case AppRule(fn, arg, _, _):
            _check(fn)
            _check(arg)
            if mk_app(fn, arg) != d:
                raise DerivationError("app node conclusion does not match its parts")
        case LamRule(binder, btype, body, _, _):
            _check(body)
            if mk_lam(binder, btype, body) != d:
                raise DerivationError(f"lam node for {binder!r} does not match its body")
        case _:
            raise DerivationError(f"not a derivation node: {d!r}")


####################################################################
# resource terms

@dataclass(frozen=True)
class RVar:
    name: str
    label: IType


@dataclass(frozen=True)
class RLam:
    binder: str
    body: "ResourceTerm"
    annot: SimpleType | None = None


@dataclass(frozen=True)
class RApp:
    fn: "ResourceTerm"
    args: tuple["ResourceTerm", ...]


ResourceTerm = RVar | RLam | RApp


def resource_to_text(r: ResourceTerm) -> str:
    match r:
        case RVar(x, a):
            return f"{x}^{{{it_to_text(a)}}}"
        case RLam(x, b, _):
            return f"\\{x}. {resource_to_text(b)}"
        case RApp(f, args):
            fs = resource_to_text(f)
            if isinstance(f, RLam):
                fs = f"({fs})"
            return f"{fs} <" + ",".join(resource_to_text(a) for a in args) + ">"
    raise TypeError(f"not a resource term: {r!r}")


def derivation_to_resource(d: Derivation) -> ResourceTerm:
    match d:
        case VarRule(name, label, _):
            return RVar(name, label)
        case AppRule(fn, arg, _, _):
            return RApp(derivation_to_resource(fn),
                        tuple(derivation_to_resource(c) for c in arg.children))
        case LamRule(binder, btype, body, _, _):
            return RLam(binder, derivation_to_resource(body), btype)
    raise TypeError(f"not a derivation: {d!r}")


def resource_to_derivation(ctx: TypingContext, term: Term, r: ResourceTerm) -> Derivation:
    """Rebuild the unique derivation of `term` with underlying resource term r."""
    term, _ = annotate(ctx, term)
    return _rebuild(tuple(ctx.bindings), term, r)


def _rebuild(shape: Shape, term: Term, r: ResourceTerm) -> Derivation:
    match term, r:
        case Var(x), RVar(y, label):
            if x != y:
                raise DerivationError(f"resource term mentions {y!r} where the term has {x!r}")
            return mk_var(shape, x, label)
        case App(f, a), RApp(rf, rargs):
            dfn = _rebuild(shape, f, rf)
            children = tuple(_rebuild(shape, a, ra) for ra in rargs)
            return mk_app(dfn, mk_multi(shape, children))
        case Lam(x, b, ann), RLam(y, rb, _):
            if x != y:
                raise DerivationError(f"resource binder {y!r} differs from term binder {x!r}")
            assert ann is not None
            body = _rebuild(shape + ((x, ann),), b, rb)
            return mk_lam(x, ann, body)
    raise DerivationError(
        f"resource term {resource_to_text(r)} does not match term {term_to_text(term)}")


def rt_occurrence_labels(r: ResourceTerm, x: str) -> list[IType]:
    """Labels of the free occurrences of x, left to right."""
    match r:
        case RVar(y, a):
            return [a] if y == x else []
        case RLam(y, b, _):
            return [] if y == x else rt_occurrence_labels(b, x)
        case RApp(f, args):
            out = rt_occurrence_labels(f, x)
            for a in args:
                out.extend(rt_occurrence_labels(a, x))
            return out
    raise TypeError(f"not a resource term: {r!r}")


def rt_type(r: ResourceTerm) -> IType:
    """The rigid type a resource term concludes; determined bottom-up."""
    match r:
        case RVar(_, a):
            return a
        case RLam(x, b, _):
            return IArrow(tuple(rt_occurrence_labels(b, x)), rt_type(b))
        case RApp(f, args):
            ft = rt_type(f)
            if not isinstance(ft, IArrow):
                raise DerivationError(f"applied resource term concludes {it_to_text(ft)}")
            got = tuple(rt_type(a) for a in args)
            if ft.domain != got:
                raise DerivationError(
                    f"argument types {tuple(map(it_to_text, got))} do not match domain "
                    f"{tuple(map(it_to_text, ft.domain))}")
            return ft.codomain
    raise TypeError(f"not a resource term: {r!r}")


def omega_substitute(r: ResourceTerm) -> ResourceTerm:
    """Contract a toplevel redex, pairing occurrences with arguments in order."""
    if not (isinstance(r, RApp) and isinstance(r.fn, RLam)):
        raise DerivationError("omega substitution needs a toplevel redex (\\x. m) <...>")
    x, body = r.fn.binder, r.fn.body
    labels = rt_occurrence_labels(body, x)
    if len(labels) != len(r.args):
        raise DerivationError(
            f"{len(labels)} occurrences of {x!r} but {len(r.args)} arguments")
    for i, (lab, a) in enumerate(zip(labels, r.args)):
        if rt_type(a) != lab:
            raise DerivationError(
                f"occurrence {i + 1} of {x!r} has label {it_to_text(lab)} but the "
                f"argument concludes {it_to_text(rt_type(a))}")
    args = list(r.args)

    def go(t: ResourceTerm) -> ResourceTerm:
        match t:
            case RVar(y, _):
                return args.pop(0) if y == x else t
            case RLam(y, b, ann):
                return t if y == x else RLam(y, go(b), ann)
            case RApp(f, aa):
                f2 = go(f)
                return RApp(f2, tuple(go(a) for a in aa))
        raise TypeError(f"not a resource term: {t!r}")

    return go(body)


####################################################################
# multiset collapse of resource terms

@dataclass(frozen=True)
class MRVar:
    name: str
    label: MultisetIType


@dataclass(frozen=True)
class MRLam:
    binder: str
    body: "MResourceTerm"


@dataclass(frozen=True)
class MRApp:
    fn: "MResourceTerm"
    args: tuple["MResourceTerm", ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(sorted(self.args, key=key_mrt)))


MResourceTerm = MRVar | MRLam | MRApp


def key_mrt(t: MResourceTerm):
    match t:
        case MRVar(x, a):
            return (0, x, key_mit(a))
        case MRLam(x, b):
            return (1, x, key_mrt(b))
        case MRApp(f, args):
            return (2, key_mrt(f), tuple(key_mrt(a) for a in args))
    raise TypeError(f"not a multiset resource term: {t!r}")


def multiset_collapse_term(r: ResourceTerm) -> MResourceTerm:
    match r:
        case RVar(x, a):
            return MRVar(x, collapse_it(a))
        case RLam(x, b, _):
            return MRLam(x, multiset_collapse_term(b))
        case RApp(f, args):
            return MRApp(multiset_collapse_term(f),
                         tuple(multiset_collapse_term(a) for a in args))
    raise TypeError(f"not a resource term: {r!r}")


def mresource_to_text(t: MResourceTerm) -> str:
    match t:
        case MRVar(x, a):
            from .rigidtypes import mit_to_text
            return f"{x}^{{{mit_to_text(a)}}}"
        case MRLam(x, b):
            return f"\\{x}. {mresource_to_text(b)}"
        case MRApp(f, args):
            fs = mresource_to_text(f)
            if isinstance(f, MRLam):
                fs = f"({fs})"
            return f"{fs} [" + ",".join(mresource_to_text(a) for a in args) + "]"
    raise TypeError(f"not a multiset resource term: {t!r}")


####################################################################
# witness enumeration

@dataclass(frozen=True)
class Exact:
    def __repr__(self) -> str:
        return "exact"


@dataclass(frozen=True)
class BoundedAt:
    budget: int

    def __repr__(self) -> str:
        return f"bounded:{self.budget}"


Completeness = Exact | BoundedAt


@dataclass(frozen=True)
class WitnessSet:
    ctx: TypingContext
    term: Term
    point: tuple[ResourceContext, IType]
    derivations: tuple[Derivation, ...]
    completeness: Completeness

    def __len__(self) -> int:
        return len(self.derivations)


def enumerate_witnesses(ctx: TypingContext, term: Term, theta: ResourceContext,
                        alpha: IType, budget: int | None = None) -> WitnessSet:
    """All derivations of term at the rigid point (theta, alpha).

    Exact for beta-normal terms.  Otherwise a budget is required and the
    result contains at least the derivations all of whose cut types (the
    sequence types introduced at redexes) have length and width at most
    the budget.  Cuts on bare-variable arguments are determined by the
    context split and are always enumerated in full, whatever the budget.
    """
    term, ty = annotate(ctx, term)
    bs = binders(term)
    if len(set(bs)) != len(bs) or set(bs) & set(ctx.names()):
        raise DerivationError("term must have distinct binders, disjoint from the context")
    if theta.shape() != tuple(ctx.bindings):
        raise DerivationError(
            f"context {ctx_to_text(theta)} does not range over the typing context")
    if not ctx_refines(theta):
        raise DerivationError(f"context {ctx_to_text(theta)} fails refinement")
    if not refines(alpha, ty):
        raise DerivationError(f"result {it_to_text(alpha)} does not refine {type_to_text(ty)}")
    normal = is_beta_normal(term)
    if not normal and budget is None:
        raise BudgetRequiredError(
            f"term {term_to_text(term)} is not beta-normal; witness enumeration needs a budget")
    found = _enum(term, theta, alpha, budget if not normal else None)
    uniq = list(dict.fromkeys(found))
    uniq.sort(key=lambda d: resource_to_text(derivation_to_resource(d)))
    return WitnessSet(ctx, term, (theta, alpha), tuple(uniq),
                      Exact() if normal else BoundedAt(budget))  # type: ignore[arg-type]


# candidate cut types at redexes make subproblems recur across splits,
# so both enumerators share a cache
_enum_cache: dict = {}


def _enum(term: Term, theta: ResourceContext, alpha: IType,
          budget: int | None) -> list[Derivation]:
    key = (term, theta, alpha, budget)
    hit = _enum_cache.get(key)
    if hit is None:
        hit = _enum_cache[key] = _enum_raw(term, theta, alpha, budget)
    return hit


def _enum_raw(term: Term, theta: ResourceContext, alpha: IType,
              budget: int | None) -> list[Derivation]:
    shape = theta.shape()
    match term:
        case Lam(x, b, ann):
            if not isinstance(alpha, IArrow):
                return []
            assert ann is not None
            inner = ResourceContext(theta.entries + ((x, alpha.domain, ann),))
            return [mk_lam(x, ann, d) for d in _enum(b, inner, alpha.codomain, budget)]
        case Var(_) | App(_, _):
            head, args = spine(term)
            if isinstance(head, Var):
                return _enum_spine(head.name, args, theta, alpha, budget)
            assert isinstance(term, App)
            f, a = term.fn, term.arg
            out: list[Derivation] = []
            if isinstance(a, Var):
                # the cut is forced: each copy of a bare variable consumes
                # exactly one context element, in order
                for th_f, th_a in _split_ctx(theta, 2):
                    if any(s for x, s, _ in th_a.entries if x != a.name):
                        continue
                    abar = th_a.lookup(a.name)
                    fns = _enum(f, th_f, IArrow(abar, alpha), budget)
                    if not fns:
                        continue
                    for m in _enum_multi(a, th_a, abar, budget):
                        for dfn in fns:
                            out.append(mk_app(dfn, m))
                return out
            # otherwise cut over candidate sequence types for the argument
            aty = typecheck(TypingContext(shape), a)
            for th_f, th_a in _split_ctx(theta, 2):
                for abar in _bounded_seqs(aty, budget):
                    fns = _enum(f, th_f, IArrow(abar, alpha), budget)
                    if not fns:
                        continue
                    for m in _enum_multi(a, th_a, abar, budget):
                        for dfn in fns:
                            out.append(mk_app(dfn, m))
            return out
    raise TypeError(f"not a term: {term!r}")


def _enum_spine(name: str, args: list[Term], theta: ResourceContext, alpha: IType,
                budget: int | None) -> list[Derivation]:
    shape = theta.shape()
    seq = theta.lookup(name)
    if not seq:
        return []
    label = seq[0]
    doms: list[SeqType] = []
    cur: IType = label
    for _ in args:
        if not isinstance(cur, IArrow):
            return []
        doms.append(cur.domain)
        cur = cur.codomain
    if cur != alpha:
        return []
    rest = ResourceContext(tuple(
        (x, s[1:] if x == name else s, t) for x, s, t in theta.entries))
    out: list[Derivation] = []
    if not args:
        if rest.is_empty():
            out.append(mk_var(shape, name, label))
        return out
    for parts in _split_ctx(rest, len(args)):
        multis: list[list[MultiDerivation]] = []
        for j, arg in enumerate(args):
            ms = _enum_multi(arg, parts[j], doms[j], budget)
            if not ms:
                break
            multis.append(ms)
        if len(multis) != len(args):
            continue
        for choice in product(*multis):
            d: Derivation = mk_var(shape, name, label)
            for m in choice:
                d = mk_app(d, m)
            out.append(d)
    return out


def _enum_multi(term: Term, theta: ResourceContext, targets: SeqType,
                budget: int | None) -> list[MultiDerivation]:
    key = (term, theta, targets, budget)
    hit = _enum_cache.get(key)
    if hit is None:
        hit = _enum_cache[key] = _enum_multi_raw(term, theta, targets, budget)
    return hit


def _enum_multi_raw(term: Term, theta: ResourceContext, targets: SeqType,
                    budget: int | None) -> list[MultiDerivation]:
    shape = theta.shape()
    if not targets:
        return [mk_multi(shape, ())] if theta.is_empty() else []
    out = []
    for blocks in _split_ctx(theta, len(targets)):
        pools = [_enum(term, blocks[i], targets[i], budget) for i in range(len(targets))]
        if any(not p for p in pools):
            continue
        for children in product(*pools):
            out.append(mk_multi(shape, tuple(children)))
    return out


def _compositions(total: int, k: int):
    if k == 0:
        if total == 0:
            yield ()
        return
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def _split_ctx(theta: ResourceContext, k: int):
    """All ways to write theta as a concatenation of k contexts."""
    per_var = []
    for x, seq, t in theta.entries:
        options = []
        for comp in _compositions(len(seq), k):
            blocks = []
            i = 0
            for c in comp:
                blocks.append(seq[i:i + c])
                i += c
            options.append(blocks)
        per_var.append((x, t, options))
    for choice in product(*[opts for _, _, opts in per_var]):
        yield tuple(
            ResourceContext(tuple(
                (x, choice[v][j], t)
                for v, (x, t, _) in enumerate(per_var)))
            for j in range(k))


@lru_cache(maxsize=None)
def _bounded_refinements(t: SimpleType, budget: int) -> tuple[IType, ...]:
    from .syntax import Arrow, Base
    match t:
        case Base():
            return (Star(),)
        case Arrow(td, tc):
            return tuple(IArrow(s, c)
                         for s in _bounded_seqs(td, budget)
                         for c in _bounded_refinements(tc, budget))
    raise TypeError(f"not a simple type: {t!r}")


@lru_cache(maxsize=None)
def _bounded_seqs(t: SimpleType, budget: int | None) -> tuple[SeqType, ...]:
    if budget is None:
        raise BudgetRequiredError("cut types at a redex need a budget")
    pool = _bounded_refinements(t, budget)
    out: list[SeqType] = []
    for n in range(budget + 1):
        out.extend(product(pool, repeat=n))
    return tuple(out)


####################################################################
# morphisms between derivations

@dataclass(frozen=True)
class VarMorphism:
    name: str
    phi: ITMorphism
    ctxm: CtxMorphism


@dataclass(frozen=True)
class MultiMorphism:
    sigma: tuple[int, ...]
    children: tuple["DerivationMorphism", ...]
    phi: SeqMorphism
    ctxm: CtxMorphism


@dataclass(frozen=True)
class AppMorphism:
    fn: "DerivationMorphism"
    arg: MultiMorphism
    phi: ITMorphism
    ctxm: CtxMorphism


@dataclass(frozen=True)
class LamMorphism:
    binder: str
    binder_type: SimpleType
    body: "DerivationMorphism"
    phi: ITMorphism
    ctxm: CtxMorphism


DerivationMorphism = VarMorphism | AppMorphism | LamMorphism


def dm_var(shape: Shape, name: str, phi: ITMorphism) -> VarMorphism:
    return VarMorphism(name, phi, singleton_ctxm(shape, name, phi))


def dm_multi(shape: Shape, sigma: tuple[int, ...],
             children: tuple[DerivationMorphism, ...]) -> MultiMorphism:
    phi = SeqMorphism(sigma, tuple(c.phi for c in children))
    if children:
        ctxm = ctx_sigma_action(sigma, [c.ctxm for c in children])
    else:
        ctxm = empty_ctxm_like(shape)
    return MultiMorphism(sigma, tuple(children), phi, ctxm)


def dm_app(fn: DerivationMorphism, arg: MultiMorphism) -> AppMorphism:
    if not isinstance(fn.phi, ArrowMorphism):
        raise MorphismError("function side of an app morphism must be an arrow morphism")
    if fn.phi.domain != arg.phi:
        raise MorphismError("app morphism must share its sequence morphism on both sides")
    return AppMorphism(fn, arg, fn.phi.codomain, concat_ctxm(fn.ctxm, arg.ctxm))


def dm_lam(body: DerivationMorphism) -> LamMorphism:
    entries = body.ctxm.entries
    if not entries:
        raise MorphismError("lam morphism needs a binder entry in the body context")
    x, sm, t = entries[-1]
    return LamMorphism(x, t, body, ArrowMorphism(sm, body.phi),
                       CtxMorphism(entries[:-1]))


def src_dm(m: DerivationMorphism | MultiMorphism):
    match m:
        case VarMorphism(name, phi, ctxm):
            return mk_var(src_ctx(ctxm).shape(), name, src_it(phi))
        case MultiMorphism(_, children, phi, ctxm):
            return mk_multi(src_ctx(ctxm).shape(), tuple(src_dm(c) for c in children))
        case AppMorphism(fn, arg, _, _):
            return mk_app(src_dm(fn), src_dm(arg))
        case LamMorphism(binder, btype, body, _, _):
            return mk_lam(binder, btype, src_dm(body))
    raise TypeError(f"not a derivation morphism: {m!r}")


def tgt_dm(m: DerivationMorphism | MultiMorphism):
    match m:
        case VarMorphism(name, phi, ctxm):
            return mk_var(tgt_ctx(ctxm).shape(), name, tgt_it(phi))
        case MultiMorphism(sigma, children, phi, ctxm):
            inv = inverse_perm(sigma)
            kids = tuple(tgt_dm(children[inv[j]]) for j in range(len(children)))
            return mk_multi(tgt_ctx(ctxm).shape(), kids)
        case AppMorphism(fn, arg, _, _):
            return mk_app(tgt_dm(fn), tgt_dm(arg))
        case LamMorphism(binder, btype, body, _, _):
            return mk_lam(binder, btype, tgt_dm(body))
    raise TypeError(f"not a derivation morphism: {m!r}")


def identity_dm(d: Derivation | MultiDerivation):
    match d:
        case VarRule(name, label, context):
            return dm_var(context.shape(), name, identity_it(label))
        case MultiDerivation(children, context, _):
            return dm_multi(context.shape(), identity_perm(len(children)),
                            tuple(identity_dm(c) for c in children))
        case AppRule(fn, arg, _, _):
            return dm_app(identity_dm(fn), identity_dm(arg))
        case LamRule(binder, btype, body, _, _):
            return dm_lam(identity_dm(body))
    raise TypeError(f"not a derivation: {d!r}")


def compose_dm(g, f):
    """g after f, defined when tgt(f) = src(g); both must rebase the same term."""
    match g, f:
        case VarMorphism(gn, gphi, gctx), VarMorphism(fn_, fphi, _):
            if gn != fn_:
                raise MorphismError(f"cannot compose morphisms at {fn_!r} and {gn!r}")
            return dm_var(src_ctx(gctx).shape(), gn, compose_it(gphi, fphi))
        case MultiMorphism(gs, gc, _, gctx), MultiMorphism(fs, fc, _, _):
            if len(gc) != len(fc):
                raise MorphismError("cannot compose multi morphisms of different widths")
            sigma = compose_perm(gs, fs)
            kids = tuple(compose_dm(gc[fs[i]], fc[i]) for i in range(len(fc)))
            return dm_multi(src_ctx(gctx).shape(), sigma, kids)
        case AppMorphism(gfn, garg, _, _), AppMorphism(ffn, farg, _, _):
            return dm_app(compose_dm(gfn, ffn), compose_dm(garg, farg))
        case LamMorphism(_, _, gb, _, _), LamMorphism(_, _, fb, _, _):
            return dm_lam(compose_dm(gb, fb))
    raise MorphismError(f"cannot compose {f!r} then {g!r}")


def invert_dm(m):
    match m:
        case VarMorphism(name, phi, ctxm):
            return dm_var(src_ctx(ctxm).shape(), name, invert_it(phi))
        case MultiMorphism(sigma, children, _, ctxm):
            inv = inverse_perm(sigma)
            kids = tuple(invert_dm(children[inv[j]]) for j in range(len(children)))
            return dm_multi(tgt_ctx(ctxm).shape(), inv, kids)
        case AppMorphism(fn, arg, _, _):
            return dm_app(invert_dm(fn), invert_dm(arg))
        case LamMorphism(_, _, body, _, _):
            return dm_lam(invert_dm(body))
    raise TypeError(f"not a derivation morphism: {m!r}")


####################################################################
# enumeration of derivation morphisms
#
# Works on the underlying resource terms: a derivation is determined by its
# term and resource term, and every rule constraint is local.

def enumerate_derivation_morphisms(d1: Derivation, d2: Derivation) -> tuple[DerivationMorphism, ...]:
    """All morphisms d1 -> d2; both must derive the same term."""
    if d1.context.shape() != d2.context.shape():
        return ()
    r1 = derivation_to_resource(d1)
    r2 = derivation_to_resource(d2)
    return enumerate_resource_morphisms(d1.context.shape(), r1, r2)


def enumerate_resource_morphisms(shape: Shape, r1: ResourceTerm,
                                 r2: ResourceTerm) -> tuple[DerivationMorphism, ...]:
    cache: dict = {}

    def go(shape: Shape, a: ResourceTerm, b: ResourceTerm) -> tuple[DerivationMorphism, ...]:
        key = (shape, a, b)
        hit = cache.get(key)
        if hit is not None:
            return hit
        out: list[DerivationMorphism] = []
        match a, b:
            case RVar(x, la), RVar(y, lb):
                if x == y:
                    out = [dm_var(shape, x, phi) for phi in enumerate_homs_it(la, lb)]
            case RLam(x, ba, ta), RLam(y, bb, tb):
                if x == y and ta == tb:
                    if ta is None:
                        raise MorphismError(
                            f"binder {x!r} needs a simple type to enumerate morphisms")
                    inner = shape + ((x, ta),)
                    out = [dm_lam(m) for m in go(inner, ba, bb)]
            case RApp(fa, argsa), RApp(fb, argsb):
                fns = go(shape, fa, fb)
                if fns:
                    multis = multi_go(shape, argsa, argsb)
                    by_dom: dict[SeqMorphism, list[MultiMorphism]] = {}
                    for m in multis:
                        by_dom.setdefault(m.phi, []).append(m)
                    for fm in fns:
                        if isinstance(fm.phi, ArrowMorphism):
                            for m in by_dom.get(fm.phi.domain, []):
                                out.append(dm_app(fm, m))
        cache[key] = tuple(out)
        return cache[key]

    def multi_go(shape: Shape, aa: tuple[ResourceTerm, ...],
                 bb: tuple[ResourceTerm, ...]) -> list[MultiMorphism]:
        n = len(aa)
        if n != len(bb):
            return []
        pair = [[go(shape, aa[i], bb[j]) for j in range(n)] for i in range(n)]
        out = []
        for sigma in permutations(range(n)):
            pools = [pair[i][sigma[i]] for i in range(n)]
            if any(not p for p in pools):
                continue
            for kids in product(*pools):
                out.append(dm_multi(shape, sigma, tuple(kids)))
        return out

    return go(shape, r1, r2)


def symmetric(d1: Derivation, d2: Derivation) -> bool:
    return bool(enumerate_derivation_morphisms(d1, d2))


def endo_count(d: Derivation) -> int:
    return len(enumerate_derivation_morphisms(d, d))


def partition_by_symmetry(derivations) -> tuple[tuple[Derivation, ...], ...]:
    """Group derivations of a common term into symmetry classes."""
    classes: list[list[Derivation]] = []
    for d in derivations:
        for cls in classes:
            if symmetric(cls[0], d):
                cls.append(d)
                break
        else:
            classes.append([d])
    return tuple(tuple(c) for c in classes)
