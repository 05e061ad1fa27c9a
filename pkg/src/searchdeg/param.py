"""Parameterized search problems and parameter-bound-certified morphisms.

A parameterization assigns a positive integer parameter to every carrier
element.  Morphisms between parameterized objects carry a finite monotone
bound table F and are valid when the parameter of every output is bounded
by F of the parameter of its input.  Only this parameter-bound half of the
membership condition is modeled; run-time bounds have no meaning over
finite carriers, and every report labels the check "parameter-bound only".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import rel
from .objects import (
    AtomContext,
    Coprod,
    Element,
    ObjExpr,
    PairElem,
    Prod,
    TagElem,
    obj_to_str,
)
from .rel import HomOrderWitness, SearchProblem
from .reduction import ReductionCert, check_cert, reduction_composite
from .terms import TermEnv, WitnessTerm, eval_term


class ParamError(ValueError):
    pass


class IncompleteBoundError(ParamError):
    """A needed parameter value is absent from a bound table."""


@dataclass(frozen=True)
class Parameterization:
    """A total map from the carrier of obj to positive integers."""

    obj: ObjExpr
    kappa: Mapping[Element, int]

    def __post_init__(self):
        object.__setattr__(self, "kappa", dict(self.kappa))
        for e, k in self.kappa.items():
            if not isinstance(k, int) or k < 1:
                raise ParamError(f"parameter value {k!r} is not a positive integer")

    def validate(self, ctx: AtomContext) -> None:
        for e in ctx.carrier(self.obj):
            if e not in self.kappa:
                raise ParamError(
                    f"parameterization of {obj_to_str(self.obj)} is not total"
                )

    def __call__(self, e: Element) -> int:
        try:
            return self.kappa[e]
        except KeyError:
            raise ParamError(
                f"element outside the parameterized carrier of {obj_to_str(self.obj)}"
            ) from None


def trivial_parameterization(obj: ObjExpr, ctx: AtomContext) -> Parameterization:
    """The bottom parameterization: identically 1."""
    return Parameterization(obj, {e: 1 for e in ctx.carrier(obj)})


def kappa_product(
    k1: Parameterization, k2: Parameterization, ctx: AtomContext
) -> Parameterization:
    """Pairs carry the larger of their component parameters."""
    obj = Prod(k1.obj, k2.obj)
    return Parameterization(
        obj,
        {
            e: max(k1(e.left), k2(e.right))
            for e in ctx.carrier(obj)
            if isinstance(e, PairElem)
        },
    )


def kappa_coproduct(
    k1: Parameterization, k2: Parameterization, ctx: AtomContext
) -> Parameterization:
    """Tagged elements carry the parameter of their side."""
    obj = Coprod(k1.obj, k2.obj)
    out = {}
    for e in ctx.carrier(obj):
        assert isinstance(e, TagElem)
        out[e] = k1(e.value) if e.side == 1 else k2(e.value)
    return Parameterization(obj, out)


# --- bound tables -------------------------------------------------------------
#
# A bound table is a finite map from parameter values to bounds.  Lookups
# below the largest key must be present; past the largest key the table
# extends monotonically by its last value, the weakest safe completion of
# a computable bound known at finitely many points.

BoundTable = Mapping[int, int]


def _validate_table(table: BoundTable) -> dict[int, int]:
    t = dict(table)
    if not t:
        raise IncompleteBoundError("bound table is empty")
    items = sorted(t.items())
    for (k1, v1), (k2, v2) in zip(items, items[1:]):
        if v2 < v1:
            raise ParamError(
                f"bound table is not monotone: F({k1})={v1} but F({k2})={v2}"
            )
    return t


def bound_lookup(table: BoundTable, k: int) -> int:
    top = max(table)
    if k in table:
        return table[k]
    if k > top:
        return table[top]
    raise IncompleteBoundError(f"bound table has no entry for parameter value {k}")


@dataclass(frozen=True)
class ParamMorphism:
    """A single-valued morphism with a certified parameter bound."""

    underlying: SearchProblem
    src_k: Parameterization
    dst_k: Parameterization
    bound_F: BoundTable
    provenance: Optional[WitnessTerm] = None

    def __post_init__(self):
        if not self.underlying.is_single_valued():
            raise ParamError("underlying morphism is not single-valued")
        if self.src_k.obj != self.underlying.src or self.dst_k.obj != self.underlying.dst:
            raise ParamError("parameterizations do not match the underlying morphism")
        object.__setattr__(self, "bound_F", _validate_table(self.bound_F))


@dataclass(frozen=True)
class ParamCheck:
    holds: bool
    counterexample: Optional[Element] = None
    detail: str = ""
    scope: str = "parameter-bound only"


def check_param_morphism(m: ParamMorphism) -> ParamCheck:
    """Exhaustively check dst parameter <= F(src parameter) on the domain."""
    for w, y in sorted(m.underlying.pairs, key=lambda p: (p[0]._key, p[1]._key)):
        kin = m.src_k(w)
        kout = m.dst_k(y)
        bound = bound_lookup(m.bound_F, kin)
        if kout > bound:
            return ParamCheck(
                False,
                counterexample=w,
                detail=f"output parameter {kout} exceeds bound {bound} "
                f"at input parameter {kin}",
            )
    return ParamCheck(True)


def compose_param(f: ParamMorphism, g: ParamMorphism) -> ParamMorphism:
    """f after g, with the composed bound table F_f(F_g(-))."""
    if g.dst_k != f.src_k:
        raise ParamError("parameterizations do not compose")
    table = {k: bound_lookup(f.bound_F, v) for k, v in g.bound_F.items()}
    prov = None
    if f.provenance is not None and g.provenance is not None:
        from .terms import TComp

        prov = TComp(f.provenance, g.provenance)
    return ParamMorphism(
        rel.compose(f.underlying, g.underlying), g.src_k, f.dst_k, table, prov
    )


def _merged_table(f: ParamMorphism, g: ParamMorphism) -> dict[int, int]:
    keys = set(f.bound_F) | set(g.bound_F)
    return {
        k: max(bound_lookup(f.bound_F, k), bound_lookup(g.bound_F, k))
        for k in keys
    }


def product_param(
    f: ParamMorphism, g: ParamMorphism, ctx: AtomContext
) -> ParamMorphism:
    """Componentwise product; both component bounds must hold, so the
    table is the pointwise max."""
    return ParamMorphism(
        rel.product_m(f.underlying, g.underlying),
        kappa_product(f.src_k, g.src_k, ctx),
        kappa_product(f.dst_k, g.dst_k, ctx),
        _merged_table(f, g),
    )


def coproduct_param(
    f: ParamMorphism, g: ParamMorphism, ctx: AtomContext
) -> ParamMorphism:
    """Case split on the tag; either component bound may apply, so the
    table is again the pointwise max."""
    return ParamMorphism(
        rel.coproduct_m(f.underlying, g.underlying),
        kappa_coproduct(f.src_k, g.src_k, ctx),
        kappa_coproduct(f.dst_k, g.dst_k, ctx),
        _merged_table(f, g),
    )


# --- parameterized problems and reductions ------------------------------------


@dataclass(frozen=True)
class ParamProblem:
    """A search problem whose question object carries a parameterization."""

    problem: SearchProblem
    src_k: Parameterization

    def __post_init__(self):
        if self.src_k.obj != self.problem.src:
            raise ParamError("parameterization does not match the question object")


def param_entails(p: ParamProblem, q: ParamProblem) -> HomOrderWitness:
    """The entailment order ignores parameterizations entirely."""
    if p.src_k != q.src_k:
        raise ParamError("parameterized problems live over different parameterizations")
    return rel.entails(p.problem, q.problem)


@dataclass(frozen=True)
class ParamReduceReport:
    ok: bool
    reason: str = ""
    scope: str = "parameter-bound only"


def param_reduce_check(
    cert: ReductionCert,
    f: ParamProblem,
    g: ParamProblem,
    k_morph: ParamMorphism,
    h_morph: ParamMorphism,
    env: TermEnv,
) -> ParamReduceReport:
    """Validate a reduction certificate between parameterized problems.

    On top of the plain certificate check, both witnesses must carry
    validated parameter bounds: K from f's input parameterization to g's,
    and H into the bottom parameterization (identically 1) on f's answer
    object — the simply-parameterized reading, where answers themselves
    are not parameter-graded.
    """
    if cert.f is not f.problem or cert.f != f.problem:
        raise ParamError("certificate is not about the given problem")
    base = check_cert(cert, env)
    if not base.holds:
        return ParamReduceReport(False, f"underlying certificate fails: {base.reason}")
    for name, morph, term in (("K", k_morph, cert.K), ("H", h_morph, cert.H)):
        if morph.underlying != eval_term(term, env):
            return ParamReduceReport(
                False, f"witness {name} does not match the certificate term"
            )
    if k_morph.src_k != f.src_k or k_morph.dst_k != g.src_k:
        return ParamReduceReport(
            False, "K is not bounded from the source to the oracle parameterization"
        )
    if any(k != 1 for k in h_morph.dst_k.kappa.values()):
        return ParamReduceReport(
            False, "H must land in the bottom parameterization"
        )
    for name, morph in (("K", k_morph), ("H", h_morph)):
        try:
            res = check_param_morphism(morph)
        except IncompleteBoundError as e:
            return ParamReduceReport(False, f"witness {name}: {e}")
        if not res.holds:
            return ParamReduceReport(False, f"witness {name}: {res.detail}")
    return ParamReduceReport(True)
