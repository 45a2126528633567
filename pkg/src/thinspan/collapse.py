"""Positive witnesses and the quantitative collapse identities.

A point is given up to symmetry by a multiset context and a multiset result
type; its canonical rigid representative (gamma, a) is fixed by sorting.  A
positive witness for a term at that point is a derivation d at some rigid
point (Theta, alpha) together with a negative context morphism
gamma -> Theta and a positive type morphism alpha -> a.

The identities checked here:

  * the weighted-relational coefficient equals the number of positive
    witnesses;
  * grouping witnesses by symmetry, each class s contributes
    deg+(gamma) * deg-(a) / deg(s) many positive witnesses, an integer;
  * the count of witness triples (theta-, d, theta+) with unconstrained
    polarized morphisms factors as deg-(gamma) * #witnesses * deg+(a),
    which is the coefficient of the term in the plain (symmetrized) model,
    so the two models differ exactly by that product of degrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    Term, TypingContext, annotate, ensure_distinct_binders, is_beta_normal, term_to_text,
)
from .rigidtypes import (
    IType, PointSpec, ResourceContext, canonicalize_point, ctx_to_text, it_to_text,
)
from .symmetry import (
    CtxMorphism, Degrees, ITMorphism,
    enumerate_homs_ctx, enumerate_homs_it, is_negative_ctx, is_positive_it,
    neg_targets_ctx, pos_sources_it, sym_degrees_ctx, sym_degrees_it,
)
from .derivation import (
    BoundedAt, Completeness, Derivation, Exact, WitnessSet,
    endo_count, enumerate_witnesses, partition_by_symmetry,
)
from .wrel import NatInf, wrel_coefficient


@dataclass(frozen=True)
class PositiveWitness:
    derivation: Derivation
    neg: CtxMorphism   # canonical context -> derivation context, negative
    pos: ITMorphism    # derivation result -> canonical result, positive


@dataclass(frozen=True)
class WitnessReport:
    ctx: TypingContext
    term: Term
    point: PointSpec
    rep: tuple[ResourceContext, IType]
    witnesses: tuple[PositiveWitness, ...]
    classes: tuple[tuple[int, ...], ...]      # indices into witnesses
    class_endos: tuple[int, ...]              # deg(s) per class
    ctx_degrees: Degrees                      # of the canonical context
    res_degrees: Degrees                      # of the canonical result type
    completeness: Completeness

    @property
    def wit_plus(self) -> int:
        return len(self.witnesses)

    @property
    def esp(self) -> int:
        """Count of witness triples with both polarized morphisms free."""
        return self.ctx_degrees.negative * self.wit_plus * self.res_degrees.positive


def positive_witnesses(ctx: TypingContext, term: Term, point: PointSpec,
                       budget: int | None = None) -> WitnessReport:
    """Enumerate positive witnesses at a point, grouped into symmetry classes."""
    term = ensure_distinct_binders(term, set(ctx.names()))
    term, ty = annotate(ctx, term)
    gamma, a = canonicalize_point(point, ctx, ty)
    cdeg = sym_degrees_ctx(gamma)
    rdeg = sym_degrees_it(a, ty)

    witnesses: list[PositiveWitness] = []
    completeness: Completeness = Exact()
    for theta in neg_targets_ctx(gamma):
        neg = _first_negative(gamma, theta)
        for alpha in pos_sources_it(a, ty):
            pos = _first_positive(alpha, a, ty)
            ws = enumerate_witnesses(ctx, term, theta, alpha, budget)
            if isinstance(ws.completeness, BoundedAt):
                completeness = ws.completeness
            for d in ws.derivations:
                witnesses.append(PositiveWitness(d, neg, pos))

    classes = partition_by_symmetry([w.derivation for w in witnesses])
    index = {w.derivation: i for i, w in enumerate(witnesses)}
    class_ix = tuple(tuple(sorted(index[d] for d in cls)) for cls in classes)
    endos = tuple(endo_count(cls[0]) for cls in classes)
    return WitnessReport(ctx, term, point, (gamma, a), tuple(witnesses),
                         class_ix, endos, cdeg, rdeg, completeness)


def _first_negative(gamma: ResourceContext, theta: ResourceContext) -> CtxMorphism:
    for cm in enumerate_homs_ctx(gamma, theta):
        if is_negative_ctx(cm):
            return cm
    raise AssertionError(
        f"no negative morphism {ctx_to_text(gamma)} -> {ctx_to_text(theta)}")


def _first_positive(alpha: IType, a: IType, ty) -> ITMorphism:
    for phi in enumerate_homs_it(alpha, a):
        if is_positive_it(phi, ty):
            return phi
    raise AssertionError(f"no positive morphism {it_to_text(alpha)} -> {it_to_text(a)}")


def weight_by_classes(report: WitnessReport) -> int:
    """Sum over symmetry classes of deg+(ctx) * deg-(result) / deg(class).

    Each summand is the class's witness count, so the total must be an
    integer equal to the number of positive witnesses.
    """
    total = Fraction(0)
    for deg in report.class_endos:
        total += Fraction(report.ctx_degrees.positive * report.res_degrees.negative, deg)
    if total.denominator != 1:
        raise AssertionError(f"class weights sum to a non-integer {total}")
    return int(total)


def class_counts_check(report: WitnessReport) -> list[str]:
    """Per class, the size must equal deg+(ctx) * deg-(result) / deg(class)."""
    problems = []
    expected_product = report.ctx_degrees.positive * report.res_degrees.negative
    for i, cls in enumerate(report.classes):
        deg = report.class_endos[i]
        want = Fraction(expected_product, deg)
        if want.denominator != 1 or len(cls) != want:
            problems.append(
                f"class {i}: size {len(cls)}, expected {expected_product}/{deg}")
    return problems


def esp_explicit(report: WitnessReport) -> int:
    """Count witness triples by full enumeration of the polarized morphisms."""
    gamma, a = report.rep
    ty = annotate(report.ctx, report.term)[1]
    total = 0
    for w in report.witnesses:
        theta = w.derivation.context
        alpha = w.derivation.result
        negs = sum(1 for cm in enumerate_homs_ctx(gamma, theta) if is_negative_ctx(cm))
        poss = sum(1 for phi in enumerate_homs_it(alpha, a) if is_positive_it(phi, ty))
        total += negs * poss
    return total


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class IdentityReport:
    report: WitnessReport
    wrel: NatInf
    checks: tuple[IdentityCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def verify_identities(ctx: TypingContext, term: Term, point: PointSpec,
                      budget: int | None = None,
                      expected: int | None = None) -> IdentityReport:
    """Run every collapse identity at one point and report each outcome."""
    report = positive_witnesses(ctx, term, point, budget)
    coeff = wrel_coefficient(ctx, term, point)
    checks: list[IdentityCheck] = []

    def add(name: str, ok: bool, detail: str) -> None:
        checks.append(IdentityCheck(name, ok, detail))

    add("wrel-equals-witness-count", coeff.value == report.wit_plus,
        f"coefficient {coeff}, witnesses {report.wit_plus}")

    try:
        w = weight_by_classes(report)
        add("class-weights-sum", w == report.wit_plus,
            f"class-weighted sum {w}, witnesses {report.wit_plus}")
    except AssertionError as e:
        add("class-weights-sum", False, str(e))

    problems = class_counts_check(report)
    add("class-sizes", not problems, "; ".join(problems) or
        f"{len(report.classes)} classes as predicted")

    esp = esp_explicit(report)
    add("triple-count-factors", esp == report.esp,
        f"enumerated {esp}, degrees give {report.esp}")

    divisor = report.ctx_degrees.negative * report.res_degrees.positive
    add("coefficient-division",
        coeff.value is not None and coeff.value * divisor == esp,
        f"{esp} = {coeff} * {divisor}")

    if expected is not None:
        add("expected-value", coeff.value == expected,
            f"coefficient {coeff}, expected {expected}")

    return IdentityReport(report, coeff, checks)
