"""Randomised verification of the categorical laws of the relation algebra.

Each law is checked on seeded random instances; the report carries a
counterexample description on failure.  Compatibility of the entailment
order with composition is checked against the morphism classes for which
it holds in a relational model: pre-composition with single-valued maps
and post-composition with total maps (products and coproducts are
compatible with arbitrary relations).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import rel
from .objects import AtomContext, Atom, Coprod, ObjExpr, Prod
from .rel import SearchProblem


@dataclass
class LawResult:
    name: str
    cases: int = 0
    failures: int = 0
    counterexample: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failures == 0


@dataclass
class LawReport:
    seed: int
    cases: int
    results: list[LawResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)


# --- samplers ---------------------------------------------------------------


def sample_context(rng: random.Random, max_atom_size: int, n_atoms: int = 3) -> AtomContext:
    names = ["A", "B", "C", "D"][:n_atoms]
    atoms = {}
    for i, name in enumerate(names):
        # occasional empty carrier keeps the edge cases honest
        size = 0 if rng.random() < 0.05 else rng.randint(1, max_atom_size)
        atoms[name] = tuple(f"{name.lower()}{j}" for j in range(size))
    return AtomContext(atoms)


def sample_obj(rng: random.Random, ctx: AtomContext, depth: int = 1) -> ObjExpr:
    if depth == 0 or rng.random() < 0.6:
        return Atom(rng.choice(ctx.atom_names))
    cls = Prod if rng.random() < 0.5 else Coprod
    return cls(sample_obj(rng, ctx, depth - 1), sample_obj(rng, ctx, depth - 1))


def sample_rel(
    rng: random.Random, ctx: AtomContext, src: ObjExpr, dst: ObjExpr, density: float = 0.4
) -> SearchProblem:
    pairs = [
        (x, y)
        for x in ctx.carrier(src)
        for y in ctx.carrier(dst)
        if rng.random() < density
    ]
    return SearchProblem.make(src, dst, pairs)


def sample_single_valued(
    rng: random.Random, ctx: AtomContext, src: ObjExpr, dst: ObjExpr, total: bool = False
) -> SearchProblem:
    tgt = ctx.carrier(dst)
    pairs = []
    for x in ctx.carrier(src):
        if tgt and (total or rng.random() < 0.75):
            pairs.append((x, rng.choice(tgt)))
    return SearchProblem.make(src, dst, pairs)


def sample_entailing_pair(
    rng: random.Random, ctx: AtomContext, src: ObjExpr, dst: ObjExpr
) -> tuple[SearchProblem, SearchProblem]:
    """Sample (f, g) with f below g in the entailment order."""
    f = sample_rel(rng, ctx, src, dst, density=0.5)
    pairs = []
    fdom = f.domain_set()
    for x in ctx.carrier(src):
        if x in fdom:
            vals = sorted(f.values(x), key=rel.elem_key)
            keep = [y for y in vals if rng.random() < 0.6]
            if not keep:
                keep = [rng.choice(vals)]
            pairs += [(x, y) for y in keep]
        elif rng.random() < 0.3:
            for y in ctx.carrier(dst):
                if rng.random() < 0.3:
                    pairs.append((x, y))
    g = SearchProblem.make(src, dst, pairs)
    assert rel.entails(f, g)
    return f, g


# --- the law suite ----------------------------------------------------------


def _cotuple2(t1: SearchProblem, t2: SearchProblem, ctx: AtomContext) -> SearchProblem:
    """[t1, t2]: case analysis on a binary coproduct source."""
    assert t1.dst == t2.dst
    return rel.compose(rel.codiag(t1.dst, ctx), rel.coproduct_m(t1, t2))


def check_laws(seed: int = 0, cases: int = 200, max_atom_size: int = 3) -> LawReport:
    rng = random.Random(seed)
    report = LawReport(seed=seed, cases=cases)
    results: dict[str, LawResult] = {}

    def law(name: str, ok: bool, detail: Callable[[], str]) -> None:
        r = results.setdefault(name, LawResult(name))
        r.cases += 1
        if not ok:
            r.failures += 1
            if r.counterexample is None:
                r.counterexample = detail()

    for case in range(cases):
        ctx = sample_context(rng, max_atom_size)
        x = sample_obj(rng, ctx)
        y = sample_obj(rng, ctx)
        z = sample_obj(rng, ctx)
        idx = rel.identity(x, ctx)
        idy = rel.identity(y, ctx)
        idz = rel.identity(z, ctx)
        idxy = rel.identity(Prod(x, y), ctx)
        dx = rel.diag(x, ctx)

        def ce(msg: str, *ps: SearchProblem) -> Callable[[], str]:
            return lambda: f"case {case}: {msg}; " + "; ".join(
                p.describe() for p in ps
            )

        # projection/diagonal equations
        law("pi1.delta = id", rel.compose(rel.proj1(x, x, ctx), dx) == idx, ce("x"))
        law("pi2.delta = id", rel.compose(rel.proj2(x, x, ctx), dx) == idx, ce("x"))
        law(
            "(pi1 x pi2).delta = id",
            rel.compose(
                rel.product_m(rel.proj1(x, y, ctx), rel.proj2(x, y, ctx)),
                rel.diag(Prod(x, y), ctx),
            )
            == idxy,
            ce("x,y"),
        )
        law(
            "pi1.(id x pi1) = pi1",
            rel.compose(
                rel.proj1(x, y, ctx), rel.product_m(idx, rel.proj1(y, z, ctx))
            )
            == rel.proj1(x, Prod(y, z), ctx),
            ce("x,y,z"),
        )
        law(
            "pi1.(id x pi2) = pi1",
            rel.compose(
                rel.proj1(x, z, ctx), rel.product_m(idx, rel.proj2(y, z, ctx))
            )
            == rel.proj1(x, Prod(y, z), ctx),
            ce("x,y,z"),
        )
        law(
            "pi2.(pi1 x id) = pi2",
            rel.compose(
                rel.proj2(x, z, ctx), rel.product_m(rel.proj1(x, y, ctx), idz)
            )
            == rel.proj2(Prod(x, y), z, ctx),
            ce("x,y,z"),
        )
        law(
            "pi2.(pi2 x id) = pi2",
            rel.compose(
                rel.proj2(y, z, ctx), rel.product_m(rel.proj2(x, y, ctx), idz)
            )
            == rel.proj2(Prod(x, y), z, ctx),
            ce("x,y,z"),
        )

        # product bifunctor
        f1 = sample_rel(rng, ctx, x, y)
        f2 = sample_rel(rng, ctx, y, z)
        g1 = sample_rel(rng, ctx, x, y)
        g2 = sample_rel(rng, ctx, y, z)
        law(
            "(f2 x g2).(f1 x g1) = (f2.f1 x g2.g1)",
            rel.compose(rel.product_m(f2, g2), rel.product_m(f1, g1))
            == rel.product_m(rel.compose(f2, f1), rel.compose(g2, g1)),
            ce("bifunctor", f1, f2, g1, g2),
        )
        law(
            "id x id = id",
            rel.product_m(idx, idy) == idxy,
            ce("x,y"),
        )

        # projection/diagonal interaction with arbitrary relations
        f = sample_rel(rng, ctx, x, y)
        g = sample_rel(rng, ctx, x, z)
        law(
            "pi2.(f x g).delta = g.dom(f)",
            rel.compose(rel.proj2(y, z, ctx), rel.compose(rel.product_m(f, g), dx))
            == rel.compose(g, rel.dom_m(f)),
            ce("interaction", f, g),
        )
        law(
            "pi1.(f x g).delta = f.dom(g)",
            rel.compose(rel.proj1(y, z, ctx), rel.compose(rel.product_m(f, g), dx))
            == rel.compose(f, rel.dom_m(g)),
            ce("interaction", f, g),
        )
        h = sample_rel(rng, ctx, z, y)
        law(
            "pi1.(f x h) = f.pi1.(id x dom(h))",
            rel.compose(rel.proj1(y, h.dst, ctx), rel.product_m(f, h))
            == rel.compose(
                f,
                rel.compose(
                    rel.proj1(x, z, ctx),
                    rel.product_m(idx, rel.dom_m(h)),
                ),
            ),
            ce("general interaction", f, h),
        )

        # dom computed two ways
        law(
            "dom(f) = pi1.(id x f).delta",
            rel.dom_m(f) == rel.dom_via_composite(f, ctx),
            ce("dom", f),
        )

        # diagonal is natural for single-valued morphisms
        sv = sample_single_valued(rng, ctx, x, y)
        law(
            "delta natural (single-valued)",
            rel.compose(rel.diag(y, ctx), sv)
            == rel.compose(rel.product_m(sv, sv), dx),
            ce("naturality", sv),
        )

        # injections and codiagonal are total
        law(
            "dom(nabla) = id",
            rel.dom_m(rel.codiag(x, ctx)) == rel.identity(Coprod(x, x), ctx),
            ce("x"),
        )
        law("dom(in1) = id", rel.dom_m(rel.inj1(x, y, ctx)) == idx, ce("x,y"))
        law("dom(in2) = id", rel.dom_m(rel.inj2(x, y, ctx)) == idy, ce("x,y"))
        law(
            "nabla.in1 = id",
            rel.compose(rel.codiag(x, ctx), rel.inj1(x, x, ctx)) == idx,
            ce("x"),
        )

        # coproduct/diagonal identity (binary family)
        fa = sample_rel(rng, ctx, x, y)
        fb = sample_rel(rng, ctx, z, y)
        ga = sample_rel(rng, ctx, x, z)
        gb = sample_rel(rng, ctx, z, z)
        lhs_inner = rel.compose(
            rel.product_m(rel.coproduct_m(fa, fb), rel.coproduct_m(ga, gb)),
            rel.diag(Coprod(x, z), ctx),
        )
        # distribute (y+y') x (z+z') into the four tagged blocks, then
        # collapse the outer coproduct
        yy = Coprod(y, y)
        a_iso = rel.compose(
            rel.coproduct_m(
                _first_distrib(y, y, z, ctx), _first_distrib(y, y, z, ctx)
            ),
            rel.distrib(yy, z, z, ctx),
        )
        lhs = rel.compose(
            rel.codiag(Coprod(Prod(y, z), Prod(y, z)), ctx),
            rel.compose(a_iso, lhs_inner),
        )
        rhs = rel.coproduct_m(
            rel.compose(rel.product_m(fa, ga), rel.diag(x, ctx)),
            rel.compose(rel.product_m(fb, gb), rel.diag(z, ctx)),
        )
        law("coproduct-diagonal identity", lhs == rhs, ce("c/d", fa, fb, ga, gb))

        # entailment order: compatibility
        fe, ge = sample_entailing_pair(rng, ctx, x, y)
        ksv = sample_single_valued(rng, ctx, z, x)
        law(
            "compat: precompose single-valued",
            bool(rel.entails(rel.compose(fe, ksv), rel.compose(ge, ksv))),
            ce("pre", fe, ge, ksv),
        )
        htot = sample_rel(rng, ctx, y, z, density=0.5)
        if ctx.carrier(z):
            # force totality
            extra = [
                (u, ctx.carrier(z)[0])
                for u in ctx.carrier(y)
                if u not in htot.domain_set()
            ]
            htot = SearchProblem.make(y, z, htot.pairs + tuple(extra))
            law(
                "compat: postcompose total",
                bool(rel.entails(rel.compose(htot, fe), rel.compose(htot, ge))),
                ce("post", fe, ge, htot),
            )
        anyh = sample_rel(rng, ctx, z, z)
        law(
            "compat: product",
            bool(rel.entails(rel.product_m(fe, anyh), rel.product_m(ge, anyh))),
            ce("prod", fe, ge, anyh),
        )
        law(
            "compat: coproduct",
            bool(rel.entails(rel.coproduct_m(fe, anyh), rel.coproduct_m(ge, anyh))),
            ce("coprod", fe, ge, anyh),
        )

        # order facts
        law(
            "f below g implies dom(f) below dom(g)",
            bool(rel.entails(rel.dom_m(fe), rel.dom_m(ge))),
            ce("doms", fe, ge),
        )
        law(
            "infimum is a lower bound",
            bool(rel.entails(rel.hom_inf(fe, anyh2 := sample_rel(rng, ctx, x, y), ), fe))
            and bool(rel.entails(rel.hom_inf(fe, anyh2), anyh2)),
            ce("inf", fe, anyh2),
        )
        law(
            "oplus agrees with its composite",
            rel.oplus(f, g) == rel.oplus_via_composite(f, g, ctx),
            ce("oplus", f, g),
        )

    report.results = sorted(results.values(), key=lambda r: r.name)
    return report


def _first_distrib(a: ObjExpr, b: ObjExpr, c: ObjExpr, ctx: AtomContext) -> SearchProblem:
    """((a+b) x c) -> ((a*c)+(b*c)), derived from comm and distr."""
    step1 = rel.comm(Coprod(a, b), c, ctx)
    step2 = rel.distrib(c, a, b, ctx)
    step3 = rel.coproduct_m(rel.comm(c, a, ctx), rel.comm(c, b, ctx))
    return rel.compose(step3, rel.compose(step2, step1))
