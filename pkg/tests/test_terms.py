import pytest
from hypothesis import given, strategies as st

from searchdeg import rel
from searchdeg.objects import AtomContext, Coprod, Prod
from searchdeg.terms import (
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
    TermSyntaxError,
    TermTypeError,
    canonicalize,
    eval_term,
    parse_term,
    print_term,
    type_of,
)

from .conftest import ATOMS, PT, X, Y, Z, el, make_problem

CTX = AtomContext(ATOMS)
G = make_problem(X, Y, [("a", "0")])
GP = make_problem(X, Y, [("a", "0"), ("b", "1")])
ENV = TermEnv(CTX, {"g": G, "gp": GP})


def _terms():
    leaves = st.sampled_from(
        [
            TId(X),
            TDiag(Y),
            TProj1(X, Y),
            TProj2(X, Y),
            TInj1(X, Y),
            TInj2(Y, Z),
            TCodiag(PT),
            TConst(X, Y, el("1")),
            TEmpty(X, Z),
            TAssoc(X, Y, Z),
            TAssoc(X, Y, Z, inv=True),
            TComm(X, Y),
            TDistrib(X, Y, Z),
            TDistrib(X, Y, Z, inv=True),
            TGen("g"),
            TGen("gp"),
            TDom(TGen("g")),
        ]
    )
    return st.recursive(
        leaves,
        lambda inner: st.builds(TProd, inner, inner)
        | st.builds(TCoprod, inner, inner),
        max_leaves=4,
    )


class TestParsePrint:
    @given(_terms())
    def test_roundtrip(self, t):
        assert parse_term(print_term(t)) == t

    def test_composition_roundtrip(self):
        t = TComp(TProj1(Y, Y), TComp(TProd(TGen("g"), TGen("gp")), TDiag(X)))
        assert parse_term(print_term(t)) == t

    def test_rejects_garbage(self):
        for bad in ["", "pi1", "gen:", "id[X", "(g .)", "delta[X] y"]:
            with pytest.raises(TermSyntaxError):
                parse_term(bad)


class TestTyping:
    def test_type_of_structural(self):
        assert type_of(TDiag(X), ENV) == (X, Prod(X, X))
        assert type_of(TCodiag(Y), ENV) == (Coprod(Y, Y), Y)
        assert type_of(TGen("gp"), ENV) == (X, Y)
        assert type_of(TDom(TGen("g")), ENV) == (X, X)

    def test_type_mismatch_rejected(self):
        with pytest.raises(TermTypeError):
            type_of(TComp(TGen("g"), TGen("g")), ENV)

    def test_unknown_generator_rejected(self):
        with pytest.raises(TermTypeError):
            type_of(TGen("nope"), ENV)


class TestEval:
    @given(_terms())
    def test_eval_matches_declared_type(self, t):
        sp = eval_term(t, ENV)
        assert (sp.src, sp.dst) == type_of(t, ENV)

    def test_eval_agrees_with_direct_construction(self):
        cases = [
            (TId(X), rel.identity(X, CTX)),
            (TDiag(X), rel.diag(X, CTX)),
            (TProj2(X, Y), rel.proj2(X, Y, CTX)),
            (TInj1(X, Y), rel.inj1(X, Y, CTX)),
            (TCodiag(Y), rel.codiag(Y, CTX)),
            (TComm(X, Y), rel.comm(X, Y, CTX)),
            (TDistrib(X, Y, Z, inv=True), rel.distrib(X, Y, Z, CTX, inv=True)),
            (TConst(X, Y, el("0")), rel.const(X, Y, el("0"), CTX)),
            (TEmpty(X, Y), rel.empty_problem(X, Y)),
            (TDom(TGen("g")), rel.dom_m(G)),
            (TGen("gp"), GP),
            (TComp(TGen("gp"), TId(X)), GP),
            (TProd(TGen("g"), TGen("gp")), rel.product_m(G, GP)),
            (TCoprod(TGen("g"), TGen("gp")), rel.coproduct_m(G, GP)),
        ]
        for t, expected in cases:
            assert eval_term(t, ENV) == expected

    def test_single_valued_composites_stay_single_valued(self):
        t = TComp(TProd(TGen("gp"), TGen("gp")), TDiag(X))
        assert eval_term(t, ENV).is_single_valued()


class TestCanonicalize:
    def test_drops_identities_and_reassociates(self):
        t = TComp(TId(Y), TComp(TGen("gp"), TId(X)))
        c = canonicalize(t)
        assert c == TGen("gp")
        assert eval_term(c, ENV) == eval_term(t, ENV)

    @given(_terms(), _terms())
    def test_canonical_composition_preserves_meaning(self, t1, t2):
        a, b = type_of(t1, ENV), type_of(t2, ENV)
        if b[1] != a[0]:
            return
        t = TComp(t1, t2)
        assert eval_term(canonicalize(t), ENV) == eval_term(t, ENV)
