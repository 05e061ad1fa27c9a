import random

import pytest
from hypothesis import given, settings, strategies as st

from searchdeg import rel
from searchdeg.objects import AtomContext, Coprod, PairElem, Prod, TagElem
from searchdeg.rel import SearchProblem, TypeMismatchError

from .conftest import ATOMS, PT, X, Y, Z, el, make_problem, random_problem

CTX = AtomContext(ATOMS)
OBJS = [X, Y, Z, PT, Prod(X, Y), Coprod(Y, Z)]


def _problems(src=None, dst=None):
    srcs = st.sampled_from(OBJS) if src is None else st.just(src)
    dsts = st.sampled_from(OBJS) if dst is None else st.just(dst)

    @st.composite
    def build(draw):
        s, d = draw(srcs), draw(dsts)
        pool = [(x, y) for x in CTX.carrier(s) for y in CTX.carrier(d)]
        chosen = draw(st.sets(st.sampled_from(pool)) if pool else st.just(set()))
        return SearchProblem.make(s, d, chosen)

    return build()


def _composable():
    @st.composite
    def build(draw):
        a, b, c = (draw(st.sampled_from(OBJS)) for _ in range(3))
        return draw(_problems(b, c)), draw(_problems(a, b))

    return build()


class TestSearchProblem:
    def test_graph_is_canonical(self):
        p1 = make_problem(X, Y, [("a", "0"), ("b", "1")])
        p2 = make_problem(X, Y, [("b", "1"), ("a", "0")])
        assert p1 == p2
        assert p1.pairs == p2.pairs

    def test_values_and_domain(self):
        f = make_problem(X, Y, [("a", "0"), ("a", "1")])
        assert f.values(el("a")) == frozenset({el("0"), el("1")})
        assert f.values(el("b")) == frozenset()
        assert f.domain_set() == frozenset({el("a")})
        assert not f.is_single_valued()
        assert not f.is_total(CTX)

    def test_apply_requires_single_value(self):
        g = make_problem(X, Y, [("a", "0")])
        assert g.apply(el("a")) == el("0")
        assert g.apply(el("b")) is None

    def test_foreign_pairs_never_match(self):
        # element membership is structural: pairs outside the carrier are inert
        odd = SearchProblem.make(X, Y, [(el("0"), el("a"))])
        assert rel.compose(odd, rel.identity(X, CTX)).pairs == ()


class TestComposition:
    @given(_problems())
    def test_identity_neutral(self, f):
        assert rel.compose(f, rel.identity(f.src, CTX)) == f
        assert rel.compose(rel.identity(f.dst, CTX), f) == f

    @given(_composable())
    def test_compose_types(self, fg):
        f, g = fg
        h = rel.compose(f, g)
        assert (h.src, h.dst) == (g.src, f.dst)

    def test_compose_is_relational(self):
        f = make_problem(X, Y, [("a", "0"), ("a", "1")])
        k = make_problem(Y, Z, [("0", "p"), ("1", "q")])
        h = rel.compose(k, f)
        assert h.values(el("a")) == frozenset({el("p"), el("q")})

    def test_compose_rejects_type_mismatch(self):
        f = make_problem(X, Y, [("a", "0")])
        with pytest.raises(TypeMismatchError):
            rel.compose(f, f)


class TestStructural:
    def test_diag_proj(self):
        d = rel.diag(X, CTX)
        assert d.apply(el("a")) == PairElem(el("a"), el("a"))
        p1 = rel.proj1(X, Y, CTX)
        assert p1.apply(PairElem(el("a"), el("0"))) == el("a")

    def test_inj_codiag(self):
        i1 = rel.inj1(X, Y, CTX)
        assert i1.apply(el("a")) == TagElem(1, el("a"))
        nb = rel.codiag(X, CTX)
        assert nb.apply(TagElem(2, el("b"))) == el("b")

    def test_comm_assoc_distrib_are_bijections(self):
        for iso in [
            rel.comm(X, Y, CTX),
            rel.assoc(X, Y, Z, CTX),
            rel.assoc(X, Y, Z, CTX, inv=True),
            rel.distrib(X, Y, Z, CTX),
            rel.distrib(X, Y, Z, CTX, inv=True),
        ]:
            assert iso.is_single_valued()
            assert iso.is_total(CTX)
            assert len({y for _, y in iso.pairs}) == len(iso.pairs)

    def test_distrib_inverse(self):
        d = rel.distrib(X, Y, Z, CTX)
        dinv = rel.distrib(X, Y, Z, CTX, inv=True)
        assert rel.compose(dinv, d) == rel.identity(d.src, CTX)
        assert rel.compose(d, dinv) == rel.identity(d.dst, CTX)

    def test_const(self):
        c = rel.const(X, Y, el("1"), CTX)
        assert c.is_total(CTX) and c.is_single_valued()
        with pytest.raises(TypeMismatchError):
            rel.const(X, Y, None, CTX)  # a nonempty target needs a value


class TestDomCalculus:
    @given(_problems())
    def test_dom_is_partial_identity(self, f):
        d = rel.dom_m(f)
        assert rel.is_domain_morphism(d)
        assert d.domain_set() == f.domain_set()

    @given(_problems())
    def test_dom_agrees_with_composite_form(self, f):
        assert rel.dom_m(f) == rel.dom_via_composite(f, CTX)

    @given(_problems())
    def test_f_dom_f_is_f(self, f):
        assert rel.compose(f, rel.dom_m(f)) == f

    def test_classify_domain(self):
        context = [X, Y, Z, PT]
        f = make_problem(X, Y, [("a", "0")])
        # a one-point domain behaves like the final object
        assert rel.classify_domain(rel.dom_m(f), context, CTX) == "final"
        assert (
            rel.classify_domain(rel.dom_m(rel.identity(X, CTX)), context, CTX)
            == "none"
        )
        assert (
            rel.classify_domain(rel.dom_m(rel.empty_problem(X, Y)), context, CTX)
            == "empty"
        )


class TestEntailment:
    def test_entails_restriction_reading(self):
        f = make_problem(X, Y, [("a", "0"), ("a", "1"), ("b", "1")])
        gp = make_problem(X, Y, [("a", "0"), ("b", "1")])
        # gp refines f on all of dom(f): solving gp solves f
        assert rel.entails(f, gp)
        assert not rel.entails(gp, make_problem(X, Y, [("a", "0")]))

    @given(_problems())
    def test_entails_reflexive(self, f):
        assert rel.entails(f, f)

    @given(_problems(X, Y), _problems(X, Y), _problems(X, Y))
    def test_entails_transitive(self, f, g, h):
        if rel.entails(f, g) and rel.entails(g, h):
            assert rel.entails(f, h)

    @given(_problems(X, Y), _problems(X, Y))
    def test_hom_inf_is_lower_bound(self, f, g):
        m = rel.hom_inf(f, g)
        assert rel.entails(m, f) and rel.entails(m, g)

    def test_entails_reports_violation(self):
        small = make_problem(X, Y, [("a", "0")])
        big = make_problem(X, Y, [("a", "1")])
        w = rel.entails(small, big)
        assert not w.holds and w.violation is not None


class TestCombinators:
    @given(_problems(X, Y), _problems(Z, PT))
    def test_product_graph(self, f, g):
        p = rel.product_m(f, g)
        for xy, uv in p.pairs:
            assert uv.left in f.values(xy.left)
            assert uv.right in g.values(xy.right)
        assert len(p.pairs) == len(f.pairs) * len(g.pairs)

    @given(_problems(X, Y), _problems(Z, PT))
    def test_coproduct_graph(self, f, g):
        s = rel.coproduct_m(f, g)
        assert len(s.pairs) == len(f.pairs) + len(g.pairs)
        for x, y in s.pairs:
            assert x.side == y.side

    @given(_problems(X, Y), _problems(Z, PT))
    def test_oplus_agrees_with_composite(self, f, g):
        assert rel.oplus(f, g) == rel.oplus_via_composite(f, g, CTX)

    def test_oplus_answers_either(self):
        f = make_problem(X, Y, [("a", "0")])
        g = make_problem(Z, PT, [("p", "star")])
        o = rel.oplus(f, g)
        got = o.values(PairElem(el("a"), el("p")))
        assert got == frozenset({TagElem(1, el("0")), TagElem(2, el("star"))})
        # a question pair outside both domains has no answers
        assert o.values(PairElem(el("b"), el("q"))) == frozenset()

    def test_power_and_star(self):
        f = make_problem(X, Y, [("a", "0")])
        assert rel.power(f, 1) == f
        assert rel.power(f, 2) == rel.product_m(f, f)
        s = rel.star_trunc(f, 3)
        assert s.src == Coprod(Coprod(X, Prod(X, X)), Prod(Prod(X, X), X))

    @settings(max_examples=20)
    @given(st.integers(0, 2**30))
    def test_random_problem_helper_is_seed_stable(self, seed):
        a = random_problem(random.Random(seed), CTX, X, Y)
        b = random_problem(random.Random(seed), CTX, X, Y)
        assert a == b
