import random

import pytest

from searchdeg import rel
from searchdeg.objects import AtomContext, Prod
from searchdeg.reduction import (
    CertTypeError,
    ChoiceFunctionError,
    CombinatorError,
    ReductionCert,
    assoc_cert,
    check_cert,
    choice_functions,
    comm_cert,
    decide,
    distrib_cert,
    empty_dom_cert,
    inf_proj_cert,
    inf_univ_cert,
    is_choice_function,
    prod_cert,
    psi_phi,
    reduction_composite,
    refl_cert,
    refl_m,
    sm_to_m,
    star_intro_cert,
    star_mono_cert,
    sup_inj_cert,
    sup_univ_cert,
    table_choice_function,
    times_distrib_cert,
    trans_cert,
    wtt_leq,
)
from searchdeg.subcat import SubcatTable, build_universe
from searchdeg.terms import TId, TProj1, TermEnv, parse_term

from .conftest import PT, X, Y, Z, make_problem, random_problem

pytestmark = []


@pytest.fixture(scope="module")
def deep_table(ctx):
    """Depth-4 universe over the bare structure: enough room for wtt(3)."""
    return SubcatTable(ctx, build_universe([X, Y, Z, PT], 4), {})


class TestCheckCert:
    def test_valid_m_cert(self, fam, bare_env):
        f, gp = fam["f"], fam["gp"]
        # K = id, H = gp . pi1 is not available without generators; use projection
        cert = ReductionCert(
            "m", f, gp, parse_term("const[(X * Y)->Y:1]"), parse_term("const[X->X:a]")
        )
        assert check_cert(cert, bare_env)

    def test_sm_cert_ignores_original_instance(self, fam, bare_env):
        f, gp = fam["f"], fam["gp"]
        cert = ReductionCert("sm", gp, gp, TId(Y), TId(X))
        assert check_cert(cert, bare_env)

    def test_invalid_cert_reports_reason(self, fam, bare_env):
        gp, g = fam["gp"], fam["g"]
        cert = ReductionCert("m", gp, g, TProj1(Y, Y), TId(X))
        with pytest.raises(CertTypeError):
            check_cert(cert, bare_env)
        bad = ReductionCert(
            "m", gp, g, parse_term("const[(X * Y)->Y:0]"), TId(X)
        )
        w = check_cert(bad, bare_env)
        assert not w.holds and w.violation is not None

    def test_composite_matches_kind(self, fam, bare_env):
        f, gp = fam["f"], fam["gp"]
        cert = ReductionCert(
            "m", f, gp, parse_term("const[(X * Y)->Y:1]"), parse_term("const[X->X:a]")
        )
        comp = reduction_composite(cert, bare_env)
        assert (comp.src, comp.dst) == (f.src, f.dst)


class TestOracle:
    def test_decide_finds_golden_pairs(self, fam, bare_table):
        assert decide(fam["f"], fam["gp"], bare_table, "m")
        assert decide(fam["g"], fam["f"], bare_table, "m")
        assert not decide(fam["gp"], fam["g"], bare_table, "m")
        assert not decide(fam["gp"], fam["idpt"], bare_table, "m")

    def test_decide_emits_checkable_cert(self, fam, bare_table, bare_env):
        v = decide(fam["f"], fam["gp"], bare_table, "m")
        assert v.answer == "yes"
        assert check_cert(v.cert, bare_env)

    def test_sm_implies_m(self, fam, bare_table, bare_env):
        for a in ("empty", "f", "g", "gp"):
            for b in ("empty", "f", "g", "gp"):
                v = decide(fam[a], fam[b], bare_table, "sm")
                if v:
                    m = decide(fam[a], fam[b], bare_table, "m")
                    assert m, f"{a} <=sm {b} but not <=m"

    def test_generators_change_the_verdict(self, fam, bare_table, gen_table):
        # gp is itself a generator of gen_table, so anything single-valued
        # and total on dom(gp) becomes reachable
        assert not decide(fam["gp"], fam["g"], bare_table, "m")
        assert decide(fam["gp"], fam["g"], gen_table, "m")


class TestCombinators:
    def test_refl_and_trans(self, fam, bare_table, bare_env):
        c1 = decide(fam["g"], fam["f"], bare_table, "m").cert
        c2 = decide(fam["f"], fam["gp"], bare_table, "m").cert
        chained = trans_cert(c1, c2, bare_env)
        assert chained.f == fam["g"] and chained.g == fam["gp"]
        assert check_cert(chained, bare_env)
        assert check_cert(refl_m(fam["f"], bare_env), bare_env)
        assert check_cert(refl_cert(fam["f"]), bare_env)

    def test_sm_to_m(self, fam, bare_env):
        c = sm_to_m(refl_cert(fam["gp"]), bare_env)
        assert c.kind == "m" and check_cert(c, bare_env)

    def test_empty_dom_cert(self, fam, bare_env):
        c = empty_dom_cert(fam["empty"], fam["idpt"])
        assert check_cert(c, bare_env)
        with pytest.raises(CombinatorError):
            empty_dom_cert(fam["g"], fam["idpt"])

    def test_sup_injections_and_universal(self, fam, bare_table, bare_env):
        probs = [fam["f"], fam["g"], fam["gp"]]
        for i in range(3):
            c = sup_inj_cert(probs, i, bare_env)
            assert c.f == probs[i] and check_cert(c, bare_env)
        to_gp_1 = decide(fam["f"], fam["gp"], bare_table, "m").cert
        to_gp_2 = decide(fam["g"], fam["gp"], bare_table, "m").cert
        c = sup_univ_cert(to_gp_1, to_gp_2, bare_env)
        assert c.f == rel.coproduct_m(fam["f"], fam["g"])
        assert c.g == fam["gp"] and check_cert(c, bare_env)

    def test_inf_projections_and_universal(self, fam, bare_table, bare_env):
        f, g = fam["f"], fam["g"]
        for side in (1, 2):
            c = inf_proj_cert(f, g, side, bare_env)
            assert c.f == rel.oplus(f, g) and check_cert(c, bare_env)
        to_f = decide(fam["g"], f, bare_table, "m").cert
        to_gp = decide(fam["g"], fam["gp"], bare_table, "m").cert
        c = inf_univ_cert(to_f, to_gp, bare_env)
        assert c.g == rel.oplus(f, fam["gp"]) and check_cert(c, bare_env)

    def test_prod_cert(self, fam, bare_table, bare_env):
        c1 = decide(fam["f"], fam["gp"], bare_table, "m").cert
        c2 = decide(fam["g"], fam["f"], bare_table, "m").cert
        c = prod_cert(c1, c2, bare_env)
        assert c.f == rel.product_m(fam["f"], fam["g"])
        assert check_cert(c, bare_env)

    def test_structural_isos(self, fam, bare_env):
        f, g, gp = fam["f"], fam["g"], fam["gp"]
        assert check_cert(comm_cert(f, g, bare_env), bare_env)
        assert check_cert(assoc_cert(f, g, gp, bare_env), bare_env)
        assert check_cert(assoc_cert(f, g, gp, bare_env, inv=True), bare_env)

    def test_distrib_certs(self, fam, bare_env):
        f, g, gp = fam["f"], fam["g"], fam["gp"]
        d1, d2 = distrib_cert(f, g, gp, bare_env)
        assert check_cert(d1, bare_env) and check_cert(d2, bare_env)
        t1, t2 = times_distrib_cert(f, g, gp, bare_env)
        assert check_cert(t1, bare_env) and check_cert(t2, bare_env)


class TestStar:
    def test_star_intro(self, fam, bare_env):
        c = star_intro_cert(fam["g"], 3, bare_env)
        assert c.g == rel.star_trunc(fam["g"], 3)
        assert check_cert(c, bare_env)

    def test_star_mono(self, fam, bare_table, bare_env):
        base = decide(fam["f"], fam["gp"], bare_table, "m").cert
        c = star_mono_cert(base, 2, bare_env)
        assert c.f == rel.star_trunc(fam["f"], 2)
        assert c.g == rel.star_trunc(fam["gp"], 2)
        assert check_cert(c, bare_env)

    def test_wtt_reflexive(self, fam, deep_table):
        assert wtt_leq(fam["f"], fam["f"], deep_table, 3)

    def test_wtt_extends_m(self, fam, deep_table):
        prod = rel.product_m(fam["gp"], fam["gp"])
        # two parallel copies of the function gp need two answers, which a
        # single many-one query cannot deliver; the second star level can
        assert not decide(prod, fam["gp"], deep_table, "m")
        assert wtt_leq(prod, fam["gp"], deep_table, 2)


class TestChoiceAndDichotomy:
    def test_choice_function_enumeration(self, fam, ctx):
        f = fam["f"]
        cs = list(choice_functions(f, ctx))
        assert len(cs) == 2  # two answers at a, one at b
        assert all(is_choice_function(c, f) for c in cs)

    def test_table_choice_function(self, fam, bare_table):
        hit = table_choice_function(fam["f"], bare_table)
        assert hit is not None and is_choice_function(hit[0], fam["f"])
        assert table_choice_function(fam["gp"], bare_table) is None

    def test_psi_phi_requires_choice_function(self, fam, ctx):
        f, gp = fam["f"], fam["gp"]
        with pytest.raises(ChoiceFunctionError):
            psi_phi(rel.empty_problem(Prod(X, X), rel.oplus(f, gp).dst), f, gp, ctx)

    def test_dichotomy_on_fixture(self, fam, ctx):
        f, gp = fam["f"], fam["gp"]
        total = 0
        for i_fun in choice_functions(rel.oplus(f, gp), ctx):
            rep = psi_phi(i_fun, f, gp, ctx)
            assert rep.holds
            total += 1
        assert total == 36

    def test_dichotomy_random_pairs(self, ctx):
        rng = random.Random(1234)
        done = 0
        while done < 20:
            f = random_problem(rng, ctx, X, Y, density=0.7)
            g = random_problem(rng, ctx, Z, Y, density=0.7)
            if not (f.is_total(ctx) and g.is_total(ctx)):
                continue
            for i_fun in choice_functions(rel.oplus(f, g), ctx):
                assert psi_phi(i_fun, f, g, ctx).holds
            done += 1
