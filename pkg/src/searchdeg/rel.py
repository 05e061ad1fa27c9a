"""Finite multi-valued search problems (typed relations) and their algebra.

A ``SearchProblem`` is a relation between the carriers of two object
expressions.  Operations here are total functions on graphs: composition,
product, coproduct, the structural morphisms (diagonal, projections,
injections, codiagonal, the associativity/commutativity/distributivity
isomorphisms, constants), domain idempotents, the entailment order, the
pointwise infimum, the pairing infimum, and iterated/truncated powers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .objects import (
    AtomContext,
    Coprod,
    Element,
    ObjExpr,
    PairElem,
    Prod,
    TagElem,
    elem_key,
    elem_to_str,
    obj_to_str,
)


class TypeMismatchError(TypeError):
    """Raised when an operation is applied at incompatible objects."""


Pair = tuple[Element, Element]


def _canon(pairs: Iterable[Pair]) -> tuple[Pair, ...]:
    return tuple(sorted(set(pairs), key=lambda p: (elem_key(p[0]), elem_key(p[1]))))


@dataclass(frozen=True)
class SearchProblem:
    src: ObjExpr
    dst: ObjExpr
    pairs: tuple[Pair, ...]

    @staticmethod
    def make(src: ObjExpr, dst: ObjExpr, pairs: Iterable[Pair]) -> "SearchProblem":
        return SearchProblem(src, dst, _canon(pairs))

    def graph(self) -> frozenset[Pair]:
        return frozenset(self.pairs)

    def values(self, x: Element) -> frozenset[Element]:
        return frozenset(y for (x_, y) in self.pairs if x_ == x)

    def domain_set(self) -> frozenset[Element]:
        return frozenset(x for (x, _) in self.pairs)

    def is_single_valued(self) -> bool:
        seen: dict[Element, Element] = {}
        for x, y in self.pairs:
            if x in seen and seen[x] != y:
                return False
            seen[x] = y
        return True

    def is_total(self, ctx: AtomContext) -> bool:
        return self.domain_set() == frozenset(ctx.carrier(self.src))

    def apply(self, x: Element) -> Optional[Element]:
        """Value at x for a single-valued relation (None when undefined)."""
        for x_, y in self.pairs:
            if x_ == x:
                return y
        return None

    def describe(self) -> str:
        body = ", ".join(
            f"{elem_to_str(x)}->{elem_to_str(y)}" for x, y in self.pairs
        )
        return f"{obj_to_str(self.src)} -> {obj_to_str(self.dst)} {{{body}}}"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise TypeMismatchError(msg)


def empty_problem(src: ObjExpr, dst: ObjExpr) -> SearchProblem:
    return SearchProblem.make(src, dst, ())


def identity(src: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(src, src, ((x, x) for x in ctx.carrier(src)))


def compose(f: SearchProblem, g: SearchProblem) -> SearchProblem:
    """Relational composition f . g (g first)."""
    _require(
        g.dst == f.src,
        f"cannot compose through {obj_to_str(g.dst)} != {obj_to_str(f.src)}",
    )
    by_src: dict[Element, list[Element]] = {}
    for x, y in f.pairs:
        by_src.setdefault(x, []).append(y)
    out = []
    for x, y in g.pairs:
        for z in by_src.get(y, ()):
            out.append((x, z))
    return SearchProblem.make(g.src, f.dst, out)


def product_m(f: SearchProblem, g: SearchProblem) -> SearchProblem:
    return SearchProblem.make(
        Prod(f.src, g.src),
        Prod(f.dst, g.dst),
        (
            (PairElem(x1, x2), PairElem(y1, y2))
            for (x1, y1) in f.pairs
            for (x2, y2) in g.pairs
        ),
    )


def coproduct_m(f: SearchProblem, g: SearchProblem) -> SearchProblem:
    out = [(TagElem(1, x), TagElem(1, y)) for (x, y) in f.pairs]
    out += [(TagElem(2, x), TagElem(2, y)) for (x, y) in g.pairs]
    return SearchProblem.make(Coprod(f.src, g.src), Coprod(f.dst, g.dst), out)


# --- structural morphisms --------------------------------------------------


def diag(a: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        a, Prod(a, a), ((x, PairElem(x, x)) for x in ctx.carrier(a))
    )


def proj1(a: ObjExpr, b: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        Prod(a, b), a, ((x, x.left) for x in ctx.carrier(Prod(a, b)))
    )


def proj2(a: ObjExpr, b: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        Prod(a, b), b, ((x, x.right) for x in ctx.carrier(Prod(a, b)))
    )


def inj1(a: ObjExpr, b: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        a, Coprod(a, b), ((x, TagElem(1, x)) for x in ctx.carrier(a))
    )


def inj2(a: ObjExpr, b: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        b, Coprod(a, b), ((x, TagElem(2, x)) for x in ctx.carrier(b))
    )


def codiag(a: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        Coprod(a, a), a, ((x, x.value) for x in ctx.carrier(Coprod(a, a)))
    )


def assoc(a: ObjExpr, b: ObjExpr, c: ObjExpr, ctx: AtomContext, inv: bool = False) -> SearchProblem:
    """((a*b)*c) -> (a*(b*c)), or its inverse."""
    fwd = [
        (PairElem(PairElem(x, y), z), PairElem(x, PairElem(y, z)))
        for x in ctx.carrier(a)
        for y in ctx.carrier(b)
        for z in ctx.carrier(c)
    ]
    if inv:
        fwd = [(v, u) for (u, v) in fwd]
        return SearchProblem.make(Prod(a, Prod(b, c)), Prod(Prod(a, b), c), fwd)
    return SearchProblem.make(Prod(Prod(a, b), c), Prod(a, Prod(b, c)), fwd)


def comm(a: ObjExpr, b: ObjExpr, ctx: AtomContext) -> SearchProblem:
    return SearchProblem.make(
        Prod(a, b),
        Prod(b, a),
        ((x, PairElem(x.right, x.left)) for x in ctx.carrier(Prod(a, b))),
    )


def distrib(a: ObjExpr, b: ObjExpr, c: ObjExpr, ctx: AtomContext, inv: bool = False) -> SearchProblem:
    """(a*(b+c)) -> ((a*b)+(a*c)), or its inverse."""
    fwd = []
    for x in ctx.carrier(a):
        for y in ctx.carrier(b):
            fwd.append((PairElem(x, TagElem(1, y)), TagElem(1, PairElem(x, y))))
        for z in ctx.carrier(c):
            fwd.append((PairElem(x, TagElem(2, z)), TagElem(2, PairElem(x, z))))
    if inv:
        fwd = [(v, u) for (u, v) in fwd]
        return SearchProblem.make(
            Coprod(Prod(a, b), Prod(a, c)), Prod(a, Coprod(b, c)), fwd
        )
    return SearchProblem.make(
        Prod(a, Coprod(b, c)), Coprod(Prod(a, b), Prod(a, c)), fwd
    )


def const(src: ObjExpr, dst: ObjExpr, value: Optional[Element], ctx: AtomContext) -> SearchProblem:
    """Total constant map, or the nowhere-defined map when dst is empty.

    With value=None the carrier of dst must be empty: the connecting
    morphism into an empty object is the empty relation.
    """
    if value is None:
        _require(
            len(ctx.carrier(dst)) == 0,
            f"constant into nonempty {obj_to_str(dst)} needs a value",
        )
        return empty_problem(src, dst)
    _require(
        ctx.is_element(value, dst),
        f"{elem_to_str(value)} is not an element of {obj_to_str(dst)}",
    )
    return SearchProblem.make(src, dst, ((x, value) for x in ctx.carrier(src)))


# --- domains and the entailment order --------------------------------------


def dom_m(f: SearchProblem) -> SearchProblem:
    """Domain idempotent: partial identity on the defined part of f."""
    return SearchProblem.make(f.src, f.src, ((x, x) for x in f.domain_set()))


def dom_via_composite(f: SearchProblem, ctx: AtomContext) -> SearchProblem:
    """dom(f) computed by its defining composite pi1.(id x f).delta."""
    idx = identity(f.src, ctx)
    return compose(
        proj1(f.src, f.dst, ctx), compose(product_m(idx, f), diag(f.src, ctx))
    )


def is_domain_morphism(d: SearchProblem) -> bool:
    return d.src == d.dst and all(x == y for (x, y) in d.pairs)


def dom_subset(d1: SearchProblem, d2: SearchProblem) -> bool:
    """Domain order: d1 below d2 iff d1.d2 = d1 (containment of parts)."""
    _require(
        is_domain_morphism(d1) and is_domain_morphism(d2) and d1.src == d2.src,
        "dom_subset expects domain idempotents on a common object",
    )
    return compose(d1, d2) == d1


@dataclass(frozen=True)
class HomOrderWitness:
    """Outcome of an entailment check, with a counterexample when it fails.

    violation is None when the order holds; otherwise it is either an
    element of dom(f) missing from dom(g), or a pair (x, y) with y a value
    of g at x that f does not admit.
    """

    holds: bool
    violation: Optional[tuple] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def entails(f: SearchProblem, g: SearchProblem) -> HomOrderWitness:
    """f below g: any solution regime for g restricts to one for f.

    Holds iff dom(f) is contained in dom(g) and g(x) is a subset of f(x)
    for every x in dom(f).
    """
    _require(
        f.src == g.src and f.dst == g.dst,
        "entails expects parallel problems",
    )
    gdom = g.domain_set()
    fvals: dict[Element, set[Element]] = {}
    for x, y in f.pairs:
        fvals.setdefault(x, set()).add(y)
    for x in sorted(fvals, key=elem_key):
        if x not in gdom:
            return HomOrderWitness(
                False, (x,), f"{elem_to_str(x)} in dom(f) but not in dom(g)"
            )
    for x, y in g.pairs:
        if x in fvals and y not in fvals[x]:
            return HomOrderWitness(
                False,
                (x, y),
                f"g admits {elem_to_str(y)} at {elem_to_str(x)}, f does not",
            )
    return HomOrderWitness(True)


def hom_inf(f: SearchProblem, g: SearchProblem) -> SearchProblem:
    """Pointwise infimum in the entailment order on a hom-set."""
    _require(
        f.src == g.src and f.dst == g.dst,
        "hom_inf expects parallel problems",
    )
    common = f.domain_set() & g.domain_set()
    out = [(x, y) for (x, y) in f.pairs if x in common]
    out += [(x, y) for (x, y) in g.pairs if x in common]
    return SearchProblem.make(f.src, f.dst, out)


def oplus(f: SearchProblem, g: SearchProblem) -> SearchProblem:
    """Pairing infimum: ask both, either answer (tagged) is acceptable."""
    out = []
    gdom = sorted(g.domain_set(), key=elem_key)
    fdom = sorted(f.domain_set(), key=elem_key)
    for x, y in f.pairs:
        for u in gdom:
            out.append((PairElem(x, u), TagElem(1, y)))
    for u, v in g.pairs:
        for x in fdom:
            out.append((PairElem(x, u), TagElem(2, v)))
    return SearchProblem.make(
        Prod(f.src, g.src), Coprod(f.dst, g.dst), out
    )


def oplus_via_composite(f: SearchProblem, g: SearchProblem, ctx: AtomContext) -> SearchProblem:
    """oplus computed as the infimum of the two tagged projections."""
    r1 = compose(
        inj1(f.dst, g.dst, ctx), compose(proj1(f.dst, g.dst, ctx), product_m(f, g))
    )
    r2 = compose(
        inj2(f.dst, g.dst, ctx), compose(proj2(f.dst, g.dst, ctx), product_m(f, g))
    )
    return hom_inf(r1, r2)


def power(f: SearchProblem, n: int) -> SearchProblem:
    """n-fold product of f with itself, left-nested; n >= 1."""
    if n < 1:
        raise ValueError("power requires n >= 1")
    out = f
    for _ in range(n - 1):
        out = product_m(out, f)
    return out


def star_trunc(f: SearchProblem, n: int) -> SearchProblem:
    """Truncated star: left-nested coproduct of the powers f^1 .. f^n."""
    if n < 1:
        raise ValueError("star_trunc requires n >= 1")
    out = f
    for k in range(2, n + 1):
        out = coproduct_m(out, power(f, k))
    return out


# --- domain classification --------------------------------------------------


def classify_domain(d: SearchProblem, context: Iterable[ObjExpr], ctx: AtomContext) -> str:
    """Classify a domain idempotent as 'empty', 'initial', 'final' or 'none'.

    Quantifiers range over the given finite context objects.  Counting
    replaces literal enumeration of relations: there are 2^(|D|*|A|)
    relations from the defined part D into A, and (2^|D| - 1)^|A| total
    relations from A with values inside D (with 0^0 = 1 for the empty A).
    """
    _require(is_domain_morphism(d), "classify_domain expects a domain idempotent")
    objs = list(context)
    ndef = len(d.domain_set())

    # exactly one relation into every context object iff 2^(|D|*|A|) = 1
    initial = all(ndef * ctx.size(a) == 0 for a in objs)

    # initial, and every total probe with values inside D starts at an
    # initial object; a total probe from A exists iff |A| = 0 or |D| > 0,
    # and A is initial (relative to the context) iff |A| = 0 here
    empty = initial and all(
        ctx.size(a) == 0 or ndef == 0 for a in objs
    )

    final = True
    for a in objs:
        na = ctx.size(a)
        count = (2**ndef - 1) ** na if na > 0 else 1
        if count != 1:
            final = False
            break

    if empty:
        return "empty"
    if initial:
        return "initial"
    if final:
        return "final"
    return "none"
