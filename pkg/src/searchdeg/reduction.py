"""Reduction certificates, a brute-force decision oracle, and combinators.

A ``ReductionCert`` claims f <= g (kind ``sm`` or ``m``) with witness terms
H and K; ``check_cert`` evaluates the defining composite and decides the
entailment independently.  ``decide`` searches a saturated hom-set table
exhaustively for a certificate.  The combinators transform valid
certificates into valid certificates (reflexivity, transitivity,
sup/inf/product/star constructions); they refuse invalid inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from . import rel
from .objects import AtomContext, Coprod, ObjExpr, PairElem, Prod, TagElem, elem_key
from .rel import HomOrderWitness, SearchProblem, entails
from .subcat import SubcatTable, UniverseError
from .terms import (
    TAssoc,
    TCodiag,
    TComm,
    TComp,
    TConst,
    TCoprod,
    TDiag,
    TDistrib,
    TDom,
    TEmpty,
    TGen,
    TId,
    TInj1,
    TInj2,
    TProd,
    TProj1,
    TProj2,
    TermEnv,
    TermTypeError,
    WitnessTerm,
    eval_term,
    type_of,
)


class CertTypeError(TypeError):
    """Certificate witnesses do not have the required hom-types."""


class CombinatorError(ValueError):
    """A combinator was given an invalid or mismatched input certificate."""


class UndecidableHereError(ValueError):
    """An object required by the query lies outside the table's universe."""


class ChoiceFunctionError(ValueError):
    """The given relation is not a choice function of the stated problem."""


@dataclass(frozen=True)
class ReductionCert:
    kind: str  # "sm" | "m"
    f: SearchProblem
    g: SearchProblem
    H: WitnessTerm
    K: WitnessTerm


# --- term-building helpers ---------------------------------------------------


def t_comp(*terms: WitnessTerm) -> WitnessTerm:
    """Right-nested composition t1 . t2 . ... . tn (t1 applied last)."""
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = TComp(t, out)
    return out


def t_cotuple(t1: WitnessTerm, t2: WitnessTerm, target: ObjExpr) -> WitnessTerm:
    """Case analysis [t1, t2]: collapse of the coproduct of the two arms."""
    return TComp(TCodiag(target), TCoprod(t1, t2))


def t_first_distrib(a: ObjExpr, b: ObjExpr, c: ObjExpr) -> WitnessTerm:
    """((a+b) x c) -> (a x c) + (b x c), derived from comm and distrib."""
    return t_comp(
        TCoprod(TComm(c, a), TComm(c, b)),
        TDistrib(c, a, b),
        TComm(Coprod(a, b), c),
    )


def t_filler(src: ObjExpr, dst: ObjExpr, ctx: AtomContext) -> WitnessTerm:
    """A total constant src -> dst where possible, else the empty map."""
    cd = ctx.carrier(dst)
    if not cd:
        return TConst(src, dst, None)
    return TConst(src, dst, cd[0])


def problem_ref(env: TermEnv, sp: SearchProblem) -> WitnessTerm:
    """A generator term denoting sp, binding a fresh name if necessary."""
    for name in sorted(env.gens):
        if env.gens[name] == sp:
            return TGen(name)
    n = 0
    while f"_aux{n}" in env.gens:
        n += 1
    env.gens[f"_aux{n}"] = sp
    return TGen(f"_aux{n}")


# --- certificate checking ----------------------------------------------------


def _expected_types(c: ReductionCert) -> tuple[tuple[ObjExpr, ObjExpr], tuple[ObjExpr, ObjExpr]]:
    k_type = (c.f.src, c.g.src)
    if c.kind == "sm":
        h_type = (c.g.dst, c.f.dst)
    elif c.kind == "m":
        h_type = (Prod(c.f.src, c.g.dst), c.f.dst)
    else:
        raise CertTypeError(f"unknown certificate kind {c.kind!r}")
    return k_type, h_type


def reduction_composite(c: ReductionCert, env: TermEnv) -> SearchProblem:
    """The composite whose entailment against f defines validity."""
    k_type, h_type = _expected_types(c)
    try:
        kt = type_of(c.K, env)
        ht = type_of(c.H, env)
    except TermTypeError as e:
        raise CertTypeError(str(e)) from e
    if kt != k_type:
        raise CertTypeError(f"K has type {kt}, expected {k_type}")
    if ht != h_type:
        raise CertTypeError(f"H has type {ht}, expected {h_type}")
    K = eval_term(c.K, env)
    H = eval_term(c.H, env)
    gk = rel.compose(c.g, K)
    if c.kind == "sm":
        return rel.compose(H, gk)
    mid = rel.compose(
        rel.product_m(rel.identity(c.f.src, env.ctx), gk),
        rel.diag(c.f.src, env.ctx),
    )
    return rel.compose(H, mid)


def check_cert(c: ReductionCert, env: TermEnv) -> HomOrderWitness:
    """Decide whether the certificate's entailment f <= composite holds."""
    comp = reduction_composite(c, env)
    for term in (c.K, c.H):
        w = eval_term(term, env)
        if not w.is_single_valued():
            return HomOrderWitness(
                False, None, "witness term evaluates to a multi-valued relation"
            )
    return entails(c.f, comp)


# certificates already validated in this process, keyed by identity; avoids
# re-evaluating deeply nested composites when a cert feeds several combinators
_checked: dict[int, ReductionCert] = {}


def _require_valid(c: ReductionCert, env: TermEnv, who: str) -> None:
    if _checked.get(id(c)) is c:
        return
    w = check_cert(c, env)
    if not w:
        raise CombinatorError(f"{who}: input certificate is invalid ({w.reason})")
    _checked[id(c)] = c


# --- brute-force oracle -------------------------------------------------------


@dataclass(frozen=True)
class OracleVerdict:
    answer: str  # "yes" | "no"
    cert: Optional[ReductionCert]
    universe_depth: int
    candidates: int

    def __bool__(self) -> bool:
        return self.answer == "yes"


def _candidate_key(sp: SearchProblem):
    # widest-domain witnesses first; ties broken by the canonical graph order
    return (
        -len(sp.domain_set()),
        tuple((elem_key(x), elem_key(y)) for x, y in sp.pairs),
    )


def query_cells(
    f: SearchProblem, g: SearchProblem, table: SubcatTable, kind: str
) -> list:
    """The hom-cells decide(f, g, kind) will query, for batched prefetch."""
    h_src = g.dst if kind == "sm" else Prod(f.src, g.dst)
    cells = [(f.src, g.src)]
    if (
        kind == "m"
        and isinstance(g.dst, Coprod)
        and table.ctx.size(h_src) > table.closure_cap
    ):
        cells += [
            (Prod(f.src, leaf), f.dst)
            for leaf, _ in _coprod_leaves(g.dst, table.ctx)
        ]
    else:
        cells.append((h_src, f.dst))
    return cells


def decide(
    f: SearchProblem, g: SearchProblem, table: SubcatTable, kind: str
) -> OracleVerdict:
    """Exhaustive search for a reduction certificate over the table."""
    if kind not in ("sm", "m"):
        raise ValueError(f"unknown reduction kind {kind!r}")
    needed = [f.src, f.dst, g.src, g.dst]
    if kind == "m":
        needed.append(Prod(f.src, g.dst))
    for o in needed:
        if not table.universe.contains(o):
            raise UndecidableHereError(
                "object required by the query lies outside the universe "
                f"(depth {table.universe.depth})"
            )
    ctx = table.ctx
    h_src = g.dst if kind == "sm" else Prod(f.src, g.dst)
    distributed = (
        kind == "m"
        and isinstance(g.dst, Coprod)
        and ctx.size(h_src) > table.closure_cap
    )
    try:
        # one saturation pass covering the hom-set queries the chosen route
        # will make, including every component cell their factored
        # enumeration decomposes into
        table.prefetch(query_cells(f, g, table, kind))
        if distributed:
            # the post-processors on a large coproduct of answers would be
            # a cross product of component hom-sets; search componentwise
            return _decide_m_distributed(f, g, table)
        ks = sorted(
            table.hom_set(f.src, g.src), key=lambda e: _candidate_key(e[0])
        )
        hs = sorted(
            table.hom_set(h_src, f.dst), key=lambda e: _candidate_key(e[0])
        )
    except UniverseError as exc:
        # a cell decomposition needed an intermediate object past the
        # universe boundary; the query is unanswerable at this depth
        raise UndecidableHereError(str(exc)) from exc
    ident = rel.identity(f.src, ctx) if kind == "m" else None
    count = 0
    for K, k_term in ks:
        gk = rel.compose(g, K)
        if kind == "m":
            mid = rel.compose(rel.product_m(ident, gk), rel.diag(f.src, ctx))
        else:
            mid = gk
        if not f.domain_set() <= {x for x, _ in mid.pairs}:
            count += len(hs)
            continue
        for H, h_term in hs:
            count += 1
            if entails(f, rel.compose(H, mid)):
                cert = ReductionCert(kind, f, g, h_term, k_term)
                return OracleVerdict("yes", cert, table.universe.depth, count)
    return OracleVerdict("no", None, table.universe.depth, count)


def _coprod_leaves(obj: ObjExpr, ctx: AtomContext) -> list[tuple[ObjExpr, int]]:
    """Non-coproduct leaves of a coproduct tree with their carrier offsets."""
    out: list[tuple[ObjExpr, int]] = []

    def rec(o: ObjExpr, off: int) -> None:
        if isinstance(o, Coprod):
            rec(o.left, off)
            rec(o.right, off + ctx.size(o.left))
        else:
            out.append((o, off))

    rec(obj, 0)
    return out


def _dist_tree_term(x: ObjExpr, t: ObjExpr) -> WitnessTerm:
    """Prod(x, t) -> the coproduct tree of Prod(x, leaf) mirroring t."""
    if not isinstance(t, Coprod):
        return TId(Prod(x, t))
    lterm = _dist_tree_term(x, t.left)
    rterm = _dist_tree_term(x, t.right)
    return TComp(TCoprod(lterm, rterm), TDistrib(x, t.left, t.right))


def _cotuple_tree_term(
    t: ObjExpr, target: ObjExpr, leaf_terms: list[WitnessTerm]
) -> WitnessTerm:
    """Fold leaf terms into a cotuple along the shape of coproduct tree t."""
    cursor = iter(leaf_terms)

    def rec(o: ObjExpr) -> WitnessTerm:
        if not isinstance(o, Coprod):
            return next(cursor)
        return TComp(TCodiag(target), TCoprod(rec(o.left), rec(o.right)))

    return rec(t)


def _decide_m_distributed(
    f: SearchProblem, g: SearchProblem, table: SubcatTable
) -> OracleVerdict:
    """decide(f, g, m) for a large coproduct answer object g.dst.

    A post-processor H out of Prod(f.src, g.dst) distributes into one
    component per coproduct leaf of g.dst.  The wideness condition splits
    accordingly: each component must stay inside f's answer sets, and
    together the components must answer every question in dom(f).  The
    search filters each component's hom-set pointwise and then looks for a
    covering combination, instead of walking the cross product.
    """
    ctx = table.ctx
    leaves = _coprod_leaves(g.dst, ctx)
    src_c = ctx.carrier(f.src)
    dst_c = ctx.carrier(f.dst)
    gdst_index = {e: i for i, e in enumerate(ctx.carrier(g.dst))}
    dst_index = {e: i for i, e in enumerate(dst_c)}
    n_gdst = ctx.size(g.dst)
    dom_idx = frozenset(
        i for i, x in enumerate(src_c) if x in f.domain_set()
    )
    fx_idx = {
        i: {dst_index[y] for y in f.values(x)}
        for i, x in enumerate(src_c)
        if i in dom_idx
    }

    # component hom-set entries, deterministically ordered widest-first
    comp: list[list[tuple[tuple[int, ...], WitnessTerm]]] = []
    sizes: list[int] = []
    for leaf, _ in leaves:
        cell = dict(table._entries(Prod(f.src, leaf), f.dst))
        nsl = ctx.size(Prod(f.src, leaf))
        if ctx.size(f.dst) and nsl:
            cell.setdefault((-1,) * nsl, TEmpty(Prod(f.src, leaf), f.dst))
        entries = sorted(
            cell.items(),
            key=lambda it: (-sum(1 for j in it[0] if j >= 0), it[0]),
        )
        comp.append(entries)
        sizes.append(ctx.size(leaf))

    ks = sorted(table.hom_set(f.src, g.src), key=lambda e: _candidate_key(e[0]))
    count = 0
    for K, k_term in ks:
        gk = rel.compose(g, K)
        if not f.domain_set() <= {x for x, _ in gk.pairs}:
            count += 1
            continue
        # per leaf, the (question, local answer) slots the composite hits
        slots: list[list[tuple[int, int]]] = [[] for _ in leaves]
        for xi in sorted(dom_idx):
            for y in gk.values(src_c[xi]):
                j = gdst_index[y]
                for li in range(len(leaves) - 1, -1, -1):
                    if j >= leaves[li][1]:
                        slots[li].append((xi, j - leaves[li][1]))
                        break
        valids: list[list[tuple[frozenset, tuple[int, ...], WitnessTerm]]] = []
        for li, ((leaf, _), entries) in enumerate(zip(leaves, comp)):
            nl = sizes[li]
            good = []
            for tup, term in entries:
                covered = set()
                ok = True
                for xi, w in slots[li]:
                    v = tup[xi * nl + w]
                    if v < 0:
                        continue
                    if v not in fx_idx[xi]:
                        ok = False
                        break
                    covered.add(xi)
                if ok:
                    good.append((frozenset(covered), tup, term))
            valids.append(good)
        # what each component suffix could still cover, for pruning
        pot: list[frozenset] = [frozenset()] * (len(leaves) + 1)
        for li in range(len(leaves) - 1, -1, -1):
            u = set(pot[li + 1])
            for cov, _, _ in valids[li]:
                u |= cov
            pot[li] = frozenset(u)

        def dfs(li: int, covered: frozenset):
            nonlocal count
            if li == len(leaves):
                return [] if dom_idx <= covered else None
            if not dom_idx <= (covered | pot[li]):
                return None
            for cov, tup, term in valids[li]:
                count += 1
                rest = dfs(li + 1, covered | cov)
                if rest is not None:
                    return [(tup, term)] + rest
            return None

        chosen = dfs(0, frozenset())
        if chosen is not None:
            h_term = TComp(
                _cotuple_tree_term(g.dst, f.dst, [t for _, t in chosen]),
                _dist_tree_term(f.src, g.dst),
            )
            cert = ReductionCert("m", f, g, h_term, k_term)
            return OracleVerdict("yes", cert, table.universe.depth, count)
    return OracleVerdict("no", None, table.universe.depth, count)


def wtt_leq(
    f: SearchProblem, g: SearchProblem, table: SubcatTable, n: int
) -> OracleVerdict:
    """Bounded-truth-table reduction: f <= the truncated star of g."""
    return decide(f, rel.star_trunc(g, n), table, "m")


# --- basic combinators ---------------------------------------------------------


def refl_cert(f: SearchProblem) -> ReductionCert:
    return ReductionCert("sm", f, f, TId(f.dst), TId(f.src))


def sm_to_m(c: ReductionCert, env: TermEnv) -> ReductionCert:
    if c.kind != "sm":
        raise CombinatorError("sm_to_m expects an sm certificate")
    _require_valid(c, env, "sm_to_m")
    h = TComp(c.H, TProj2(c.f.src, c.g.dst))
    return ReductionCert("m", c.f, c.g, h, c.K)


def refl_m(f: SearchProblem, env: TermEnv) -> ReductionCert:
    return sm_to_m(refl_cert(f), env)


def _sm_trans(c1: ReductionCert, c2: ReductionCert) -> ReductionCert:
    return ReductionCert(
        "sm", c1.f, c2.g, TComp(c1.H, c2.H), TComp(c2.K, c1.K)
    )


def trans_cert(c1: ReductionCert, c2: ReductionCert, env: TermEnv) -> ReductionCert:
    """From f <=_m g and g <=_m h, the composite reduction f <=_m h."""
    if c1.kind != "m" or c2.kind != "m":
        raise CombinatorError("trans_cert expects m certificates")
    if c1.g != c2.f:
        raise CombinatorError("trans_cert: middle problems do not match")
    _require_valid(c1, env, "trans_cert")
    _require_valid(c2, env, "trans_cert")
    df, dg = c1.f.src, c1.g.src
    rh = c2.g.dst
    h = t_comp(
        c1.H,
        TProd(TId(df), c2.H),
        TAssoc(df, dg, rh),
        TProd(TComp(TProd(TId(df), c1.K), TDiag(df)), TId(rh)),
    )
    k = TComp(c2.K, c1.K)
    return ReductionCert("m", c1.f, c2.g, h, k)


def empty_dom_cert(f: SearchProblem, g: SearchProblem) -> ReductionCert:
    """Bottom: a problem with empty domain reduces to anything."""
    if f.pairs:
        raise CombinatorError("empty_dom_cert expects an empty problem")
    return ReductionCert(
        "sm", f, g, TEmpty(g.dst, f.dst), TEmpty(f.src, g.src)
    )


def _iso_sm_cert(
    f: SearchProblem,
    g: SearchProblem,
    k: WitnessTerm,
    h: WitnessTerm,
    env: TermEnv,
    who: str,
) -> ReductionCert:
    c = ReductionCert("sm", f, g, h, k)
    w = check_cert(c, env)
    if not w:
        raise CombinatorError(f"{who}: constructed certificate invalid ({w.reason})")
    return c


def comm_cert(p: SearchProblem, q: SearchProblem, env: TermEnv) -> ReductionCert:
    """p x q <=_sm q x p via the commutativity isomorphisms."""
    pq = rel.product_m(p, q)
    qp = rel.product_m(q, p)
    return _iso_sm_cert(
        pq, qp, TComm(p.src, q.src), TComm(q.dst, p.dst), env, "comm_cert"
    )


def assoc_cert(
    a: SearchProblem, b: SearchProblem, c: SearchProblem, env: TermEnv, inv: bool = False
) -> ReductionCert:
    """a x (b x c) <=_sm (a x b) x c (or the reverse with inv=True)."""
    nested = rel.product_m(a, rel.product_m(b, c))
    flat = rel.product_m(rel.product_m(a, b), c)
    if inv:
        return _iso_sm_cert(
            flat,
            nested,
            TAssoc(a.src, b.src, c.src),
            TAssoc(a.dst, b.dst, c.dst, inv=True),
            env,
            "assoc_cert",
        )
    return _iso_sm_cert(
        nested,
        flat,
        TAssoc(a.src, b.src, c.src, inv=True),
        TAssoc(a.dst, b.dst, c.dst),
        env,
        "assoc_cert",
    )


# --- supremum (coproduct) combinators ------------------------------------------


def _sup_problem(problems: list[SearchProblem]) -> SearchProblem:
    out = problems[0]
    for p in problems[1:]:
        out = rel.coproduct_m(out, p)
    return out


def _binary_inj_cert(
    p: SearchProblem, q: SearchProblem, side: int, ctx: AtomContext
) -> ReductionCert:
    sup = rel.coproduct_m(p, q)
    if side == 1:
        k = TInj1(p.src, q.src)
        h = t_cotuple(TId(p.dst), t_filler(q.dst, p.dst, ctx), p.dst)
        return ReductionCert("sm", p, sup, h, k)
    k = TInj2(p.src, q.src)
    h = t_cotuple(t_filler(p.dst, q.dst, ctx), TId(q.dst), q.dst)
    return ReductionCert("sm", q, sup, h, k)


def sup_inj_cert(
    problems: list[SearchProblem], index: int, env: TermEnv
) -> ReductionCert:
    """problems[index] <=_sm the left-nested coproduct of the family."""
    if not 0 <= index < len(problems):
        raise CombinatorError("sup_inj_cert: index out of range")
    if len(problems) == 1:
        return refl_cert(problems[0])
    left = _sup_problem(problems[:-1])
    last = problems[-1]
    if index == len(problems) - 1:
        return _binary_inj_cert(left, last, 2, env.ctx)
    inner = sup_inj_cert(problems[:-1], index, env)
    return _sm_trans(inner, _binary_inj_cert(left, last, 1, env.ctx))


def nabla_cert(g: SearchProblem, env: TermEnv) -> ReductionCert:
    """g |_| g <=_m g, collapsing the two tags with the codiagonal."""
    e, r = g.src, g.dst
    h = TComp(
        TCoprod(TProj2(e, r), TProj2(e, r)), t_first_distrib(e, e, r)
    )
    return ReductionCert("m", rel.coproduct_m(g, g), g, h, TCodiag(e))


def coprod_cert(c1: ReductionCert, c2: ReductionCert, env: TermEnv) -> ReductionCert:
    """From f1 <=_m g1 and f2 <=_m g2: (f1 |_| f2) <=_m (g1 |_| g2)."""
    for c in (c1, c2):
        if c.kind != "m":
            raise CombinatorError("coprod_cert expects m certificates")
        _require_valid(c, env, "coprod_cert")
    d1, d2 = c1.f.src, c2.f.src
    r1, r2 = c1.g.dst, c2.g.dst
    s1, s2 = c1.f.dst, c2.f.dst
    s = Coprod(s1, s2)
    k = TCoprod(c1.K, c2.K)
    # distribute both tags, route the diagonal components through the input
    # witnesses, and leave the unreachable mixed components nowhere defined
    branch1 = t_cotuple(
        TComp(TInj1(s1, s2), c1.H), TEmpty(Prod(d2, r1), s), s
    )
    branch2 = t_cotuple(
        TEmpty(Prod(d1, r2), s), TComp(TInj2(s1, s2), c2.H), s
    )
    h = t_comp(
        t_cotuple(
            TComp(branch1, t_first_distrib(d1, d2, r1)),
            TComp(branch2, t_first_distrib(d1, d2, r2)),
            s,
        ),
        TDistrib(Coprod(d1, d2), r1, r2),
    )
    return ReductionCert(
        "m", rel.coproduct_m(c1.f, c2.f), rel.coproduct_m(c1.g, c2.g), h, k
    )


def sup_univ_cert(c1: ReductionCert, c2: ReductionCert, env: TermEnv) -> ReductionCert:
    """From f1 <=_m g and f2 <=_m g: (f1 |_| f2) <=_m g."""
    if c1.g != c2.g:
        raise CombinatorError("sup_univ_cert: certificates target different problems")
    joined = coprod_cert(c1, c2, env)
    return trans_cert(joined, nabla_cert(c1.g, env), env)


# Sum-shaped binary trees are represented as two-element lists [left, right];
# anything that is not a list is a leaf.


def _map_tree(fn, tree):
    if isinstance(tree, list):
        return [_map_tree(fn, tree[0]), _map_tree(fn, tree[1])]
    return fn(tree)


def _tree_problem(tree) -> SearchProblem:
    if isinstance(tree, list):
        return rel.coproduct_m(_tree_problem(tree[0]), _tree_problem(tree[1]))
    return tree


def _sup_univ_fold(tree, env: TermEnv) -> ReductionCert:
    """Fold sup_univ_cert over a binary tree of certificates to a common g."""
    if isinstance(tree, list):
        return sup_univ_cert(
            _sup_univ_fold(tree[0], env), _sup_univ_fold(tree[1], env), env
        )
    return tree


def _coprod_fold(tree, env: TermEnv) -> ReductionCert:
    """Fold coprod_cert over a binary tree of certificates."""
    if isinstance(tree, list):
        return coprod_cert(
            _coprod_fold(tree[0], env), _coprod_fold(tree[1], env), env
        )
    return tree


# --- infimum combinators --------------------------------------------------------


def inf_proj_cert(
    f: SearchProblem, g: SearchProblem, side: int, env: TermEnv
) -> ReductionCert:
    """(f (+) g) <=_sm f (side 1) or g (side 2)."""
    p = rel.oplus(f, g)
    if side == 1:
        k = TComp(
            TProj1(f.src, g.src),
            TProd(TId(f.src), TDom(problem_ref(env, g))),
        )
        return ReductionCert("sm", p, f, TInj1(f.dst, g.dst), k)
    if side == 2:
        k = TComp(
            TProj2(f.src, g.src),
            TProd(TDom(problem_ref(env, f)), TId(g.src)),
        )
        return ReductionCert("sm", p, g, TInj2(f.dst, g.dst), k)
    raise CombinatorError("inf_proj_cert: side must be 1 or 2")


def inf_univ_cert(c1: ReductionCert, c2: ReductionCert, env: TermEnv) -> ReductionCert:
    """From h <=_m f and h <=_m g: h <=_m (f (+) g)."""
    if c1.f != c2.f:
        raise CombinatorError("inf_univ_cert: certificates have different sources")
    for c in (c1, c2):
        if c.kind != "m":
            raise CombinatorError("inf_univ_cert expects m certificates")
        _require_valid(c, env, "inf_univ_cert")
    h_prob = c1.f
    f, g = c1.g, c2.g
    dh, rh = h_prob.src, h_prob.dst
    # restrict the paired pre-processors to dom(h) before pairing
    k = TComp(
        TProd(c1.K, c2.K),
        TComp(TDiag(dh), TDom(problem_ref(env, h_prob))),
    )
    h = t_comp(
        TCodiag(rh),
        TCoprod(c1.H, c2.H),
        TDistrib(dh, f.dst, g.dst),
    )
    return ReductionCert("m", h_prob, rel.oplus(f, g), h, k)


# --- distributivity of (+) over |_| ---------------------------------------------


def distrib_cert(
    f: SearchProblem, g1: SearchProblem, g2: SearchProblem, env: TermEnv
) -> tuple[ReductionCert, ReductionCert]:
    """Both directions of f (+) (g1 |_| g2) == (f (+) g1) |_| (f (+) g2)."""
    lhs = rel.oplus(f, rel.coproduct_m(g1, g2))
    rhs = rel.coproduct_m(rel.oplus(f, g1), rel.oplus(f, g2))
    d, e1, e2 = f.src, g1.src, g2.src
    r, s1, s2 = f.dst, g1.dst, g2.dst
    # direction 1: the canonical isomorphisms do all the work
    k1 = TDistrib(d, e1, e2)
    merged = Coprod(r, Coprod(s1, s2))
    h1 = t_cotuple(
        TCoprod(TId(r), TInj1(s1, s2)),
        TCoprod(TId(r), TInj2(s1, s2)),
        merged,
    )
    dir1 = ReductionCert("sm", lhs, rhs, h1, k1)
    # direction 2 is assembled from the lattice combinators
    fg1 = rel.oplus(f, g1)
    fg2 = rel.oplus(f, g2)
    sup_g = rel.coproduct_m(g1, g2)

    def down_to_lhs(fgi: SearchProblem, gi: SearchProblem, side: int) -> ReductionCert:
        to_f = sm_to_m(inf_proj_cert(f, gi, 1, env), env)
        to_gi = sm_to_m(inf_proj_cert(f, gi, 2, env), env)
        gi_to_sup = sm_to_m(sup_inj_cert([g1, g2], side - 1, env), env)
        to_sup = trans_cert(to_gi, gi_to_sup, env)
        return inf_univ_cert(to_f, to_sup, env)

    dir2 = sup_univ_cert(down_to_lhs(fg1, g1, 1), down_to_lhs(fg2, g2, 2), env)
    if dir2.f != rhs or dir2.g != lhs:
        raise CombinatorError("distrib_cert: assembled certificate shape mismatch")
    return dir1, dir2


def times_distrib_cert(
    a: SearchProblem, b: SearchProblem, c: SearchProblem, env: TermEnv
) -> tuple[ReductionCert, ReductionCert]:
    """Both directions of a x (b |_| c) == (a x b) |_| (a x c)."""
    lhs = rel.product_m(a, rel.coproduct_m(b, c))
    rhs = rel.coproduct_m(rel.product_m(a, b), rel.product_m(a, c))
    dir1 = _iso_sm_cert(
        lhs,
        rhs,
        TDistrib(a.src, b.src, c.src),
        TDistrib(a.dst, b.dst, c.dst, inv=True),
        env,
        "times_distrib_cert",
    )
    dir2 = _iso_sm_cert(
        rhs,
        lhs,
        TDistrib(a.src, b.src, c.src, inv=True),
        TDistrib(a.dst, b.dst, c.dst),
        env,
        "times_distrib_cert",
    )
    return dir1, dir2


# --- products of reductions -----------------------------------------------------


def prod_cert(c1: ReductionCert, c2: ReductionCert, env: TermEnv) -> ReductionCert:
    """From f1 <=_m g1 and f2 <=_m g2: (f1 x f2) <=_m (g1 x g2)."""
    for c in (c1, c2):
        if c.kind != "m":
            raise CombinatorError("prod_cert expects m certificates")
        _require_valid(c, env, "prod_cert")
    d1, d2 = c1.f.src, c2.f.src
    r1, r2 = c1.g.dst, c2.g.dst
    # middle-four interchange ((d1 x d2) x (r1 x r2)) -> ((d1 x r1) x (d2 x r2))
    inner = t_comp(
        TAssoc(r1, d2, r2),
        TProd(TComm(d2, r1), TId(r2)),
        TAssoc(d2, r1, r2, inv=True),
    )
    midfour = t_comp(
        TAssoc(d1, r1, Prod(d2, r2), inv=True),
        TProd(TId(d1), inner),
        TAssoc(d1, d2, Prod(r1, r2)),
    )
    h = TComp(TProd(c1.H, c2.H), midfour)
    k = TProd(c1.K, c2.K)
    return ReductionCert(
        "m", rel.product_m(c1.f, c2.f), rel.product_m(c1.g, c2.g), h, k
    )


# --- truncated star -------------------------------------------------------------


def _powers(f: SearchProblem, n: int) -> list[SearchProblem]:
    return [rel.power(f, k) for k in range(1, n + 1)]


def star_intro_cert(f: SearchProblem, n: int, env: TermEnv) -> ReductionCert:
    """f <=_m its truncated star (injection into the first summand)."""
    if n < 1:
        raise CombinatorError("star_intro_cert requires n >= 1")
    return sm_to_m(sup_inj_cert(_powers(f, n), 0, env), env)


def _power_cert(c: ReductionCert, n: int, env: TermEnv) -> ReductionCert:
    """From f <=_m g: f^n <=_m g^n by iterated products."""
    out = c
    for _ in range(n - 1):
        out = prod_cert(out, c, env)
    return out


def star_mono_cert(c: ReductionCert, n: int, env: TermEnv) -> ReductionCert:
    """From f <=_m g: the truncated stars reduce component-wise."""
    if c.kind != "m":
        raise CombinatorError("star_mono_cert expects an m certificate")
    _require_valid(c, env, "star_mono_cert")
    out = c
    for k in range(2, n + 1):
        out = coprod_cert(out, _power_cert(c, k, env), env)
    return out


def _prodpow_cert(f: SearchProblem, s: int, n: int, env: TermEnv) -> ReductionCert:
    """f^s x f^n <=_m f^(s+n), re-associating to the left-nested power."""
    if n == 1:
        # the left-nested power f^(s+1) is literally f^s x f
        return refl_m(rel.power(f, s + 1), env)
    fs = rel.power(f, s)
    fn1 = rel.power(f, n - 1)
    step = sm_to_m(assoc_cert(fs, fn1, f, env), env)
    rest = prod_cert(_prodpow_cert(f, s, n - 1, env), refl_m(f, env), env)
    return trans_cert(step, rest, env)


def _dist_right(a: SearchProblem, tree, env: TermEnv):
    """a x (tree sum) <=_m the sum of a x leaf, preserving the tree shape."""
    if not isinstance(tree, list):
        return refl_m(rel.product_m(a, tree), env), tree
    cl, tl = _dist_right(a, tree[0], env)
    cr, tr = _dist_right(a, tree[1], env)
    law, _ = times_distrib_cert(
        a, _tree_problem(tree[0]), _tree_problem(tree[1]), env
    )
    joined = coprod_cert(cl, cr, env)
    cert = trans_cert(sm_to_m(law, env), joined, env)
    return cert, [tl, tr]


def _dist_left(tree, b: SearchProblem, env: TermEnv):
    """(tree sum) x b <=_m the sum of leaf x b, preserving the tree shape."""
    q = _tree_problem(tree)
    swap_in = sm_to_m(comm_cert(q, b, env), env)
    cert_r, _ = _dist_right(b, tree, env)
    swap_tree = _coprod_fold(
        _map_tree(lambda leaf: sm_to_m(comm_cert(b, leaf, env), env), tree), env
    )
    return trans_cert(trans_cert(swap_in, cert_r, env), swap_tree, env)


def star_collapse_cert(
    f: SearchProblem, n: int, m: int, env: TermEnv
) -> ReductionCert:
    """Truncated star of the truncated star collapses: level (n, m) -> n*m."""
    if n < 1 or m < 1:
        raise CombinatorError("star_collapse_cert requires n, m >= 1")
    t = rel.star_trunc(f, n)
    target_pows = _powers(f, n * m)

    def pow_to_u(s: int) -> ReductionCert:
        return sm_to_m(sup_inj_cert(target_pows, s - 1, env), env)

    # the tree of power summands of the inner truncated star
    star_tree = f
    for k in range(2, n + 1):
        star_tree = [star_tree, rel.power(f, k)]
    exps = {rel.power(f, k): k for k in range(1, n + 1)}

    def expand(level: int):
        """T^level <=_m a sum tree whose leaves carry certificates into powers."""
        if level == 1:
            leaf_tree = _map_tree(
                lambda p: (p, refl_m(p, env), exps[p]), star_tree
            )
            return refl_m(t, env), leaf_tree

        prev_cert, prev_tree = expand(level - 1)
        prev_sum_tree = _map_tree(lambda leaf: leaf[0], prev_tree)
        b_prob = _tree_problem(prev_sum_tree)
        c1 = prod_cert(prev_cert, refl_m(t, env), env)
        c2, n_tree = _dist_right(b_prob, star_tree, env)

        def per_power(p_n: SearchProblem):
            cert_l = _dist_left(prev_sum_tree, p_n, env)
            k_exp = exps[p_n]

            def leaf_payload(leaf):
                prob, cert_to_pow, s = leaf
                stepped = prod_cert(cert_to_pow, refl_m(p_n, env), env)
                merged = trans_cert(
                    stepped, _prodpow_cert(f, s, k_exp, env), env
                )
                return (rel.product_m(prob, p_n), merged, s + k_exp)

            return cert_l, _map_tree(leaf_payload, prev_tree)

        cert_tree = _map_tree(per_power, n_tree)
        c3 = _coprod_fold(_map_tree(lambda pair: pair[0], cert_tree), env)
        # grafting happens structurally: each leaf is replaced by a subtree
        new_leaf_tree = _map_tree(lambda pair: pair[1], cert_tree)
        cert = trans_cert(trans_cert(c1, c2, env), c3, env)
        return cert, new_leaf_tree

    def to_u(level: int) -> ReductionCert:
        cert, leaf_tree = expand(level)
        leaf_certs = _map_tree(
            lambda leaf: trans_cert(leaf[1], pow_to_u(leaf[2]), env), leaf_tree
        )
        return trans_cert(cert, _sup_univ_fold(leaf_certs, env), env)

    out = to_u(1)
    for level in range(2, m + 1):
        out = sup_univ_cert(out, to_u(level), env)
    return out


# --- choice functions and the dichotomy -----------------------------------------


def is_choice_function(c: SearchProblem, p: SearchProblem) -> bool:
    """A single-valued selector defined on all of dom(p) with values in p."""
    if c.src != p.src or c.dst != p.dst or not c.is_single_valued():
        return False
    for x in p.domain_set():
        y = c.apply(x)
        if y is None or y not in p.values(x):
            return False
    return True


def table_choice_function(
    p: SearchProblem, table: SubcatTable
) -> Optional[tuple[SearchProblem, WitnessTerm]]:
    """The first table morphism that is a choice function of p, if any."""
    for cand, term in table.hom_set(p.src, p.dst):
        if is_choice_function(cand, p):
            return cand, term
    return None


def choice_functions(p: SearchProblem, ctx: AtomContext) -> Iterable[SearchProblem]:
    """All single-valued selectors of p, in canonical order."""
    dom = sorted(p.domain_set(), key=elem_key)
    if not dom:
        yield rel.empty_problem(p.src, p.dst)
        return
    val_lists = [sorted(p.values(x), key=elem_key) for x in dom]
    for combo in itertools.product(*val_lists):
        yield SearchProblem.make(p.src, p.dst, zip(dom, combo))


@dataclass(frozen=True)
class DichotomyReport:
    psi: SearchProblem
    phi: SearchProblem
    psi_choice: bool
    phi_choice: bool

    @property
    def holds(self) -> bool:
        return self.psi_choice or self.phi_choice


def psi_phi(
    i_fun: SearchProblem, f: SearchProblem, g: SearchProblem, ctx: AtomContext
) -> DichotomyReport:
    """Split a choice function of f (+) g into candidate selectors of f and g.

    psi(x) scans dom(g) in canonical order for the first tag-1 answer;
    phi(y) scans dom(f) for the first tag-2 answer.  At least one of the
    two is a choice function of its factor.
    """
    p = rel.oplus(f, g)
    if not is_choice_function(i_fun, p):
        raise ChoiceFunctionError(
            "the given relation is not a choice function of the pairing"
        )
    fdom = sorted(f.domain_set(), key=elem_key)
    gdom = sorted(g.domain_set(), key=elem_key)
    psi_pairs = []
    for x in fdom:
        for y in gdom:
            v = i_fun.apply(PairElem(x, y))
            if isinstance(v, TagElem) and v.side == 1:
                psi_pairs.append((x, v.value))
                break
    phi_pairs = []
    for y in gdom:
        for x in fdom:
            v = i_fun.apply(PairElem(x, y))
            if isinstance(v, TagElem) and v.side == 2:
                phi_pairs.append((y, v.value))
                break
    psi = SearchProblem.make(f.src, f.dst, psi_pairs)
    phi = SearchProblem.make(g.src, g.dst, phi_pairs)
    return DichotomyReport(
        psi, phi, is_choice_function(psi, f), is_choice_function(phi, g)
    )
