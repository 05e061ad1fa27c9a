import pytest

from searchdeg import rel
from searchdeg.objects import AtomContext, Coprod, Prod
from searchdeg.subcat import (
    SubcatTable,
    Universe,
    UniverseError,
    build_universe,
)
from searchdeg.terms import TermEnv, eval_term

from .conftest import ATOMS, PT, X, Y, Z, make_problem

CTX = AtomContext(ATOMS)


class TestUniverse:
    def test_contains_up_to_depth(self):
        u = build_universe([X, Y], 2)
        assert u.contains(X)
        assert u.contains(Prod(X, Y))
        assert u.contains(Prod(X, Prod(X, Y)))
        assert not u.contains(Prod(Prod(X, Prod(X, Y)), Y))
        assert not u.contains(Z)

    def test_objects_enumeration_is_sorted_and_closed(self):
        u = build_universe([X, Y], 1)
        objs = u.objects()
        assert X in objs and Coprod(X, Y) in objs
        assert len(objs) == len(set(objs))
        assert all(u.contains(o) for o in objs)


class TestSaturation:
    def test_empty_generator_table_has_structural_maps(self, bare_table):
        homs = dict(
            (sp, t) for sp, t in bare_table.hom_set(Prod(X, Y), X)
        )
        assert rel.proj1(X, Y, CTX) in homs

    def test_hom_cell_sizes_with_generators(self, gen_table):
        # pinned counts for the {g, gp} table at depth 2
        assert len(gen_table.hom_set(X, Y)) == 6
        assert len(gen_table.hom_set(Prod(X, Y), Y)) == 8

    def test_every_entry_is_single_valued_and_witnessed(self, gen_table, gen_env):
        for (a, b) in [(X, Y), (X, X), (Prod(X, Y), Y), (Coprod(X, Y), Y)]:
            for sp, term in gen_table.hom_set(a, b):
                assert sp.is_single_valued()
                assert eval_term(term, gen_env) == sp

    def test_contains_generator_and_composites(self, gen_table, fam):
        assert gen_table.contains(fam["gp"]) is not None
        assert gen_table.contains(rel.compose(fam["gp"], rel.identity(X, CTX)))
        # the double of gp through the diagonal
        sq = rel.compose(rel.product_m(fam["gp"], fam["gp"]), rel.diag(X, CTX))
        assert gen_table.contains(sq) is not None

    def test_multi_valued_relations_never_appear(self, gen_table, fam):
        assert gen_table.contains(fam["f"]) is None

    def test_bare_table_misses_gp(self, bare_table, fam):
        # (a -> 0, b -> 1) needs a generator; structure alone cannot build it
        assert bare_table.contains(fam["gp"]) is None

    def test_out_of_universe_query_raises(self, gen_table):
        deep = Prod(Prod(Prod(X, X), X), Prod(Prod(X, X), X))
        with pytest.raises(UniverseError):
            gen_table.hom_set(deep, Y)

    def test_demand_and_prefetch_are_idempotent(self, ctx, universe2, fam):
        t = SubcatTable(ctx, universe2, {"gp": fam["gp"]})
        cell = (Prod(X, Y), Y)
        t.prefetch([cell])
        first = t.hom_set(*cell)
        t.prefetch([cell, (X, Y)])
        assert t.hom_set(*cell) == first

    def test_total_constants_are_implicit_but_reported(self, bare_table):
        homs = [sp for sp, _ in bare_table.hom_set(Z, Y)]
        consts = [sp for sp in homs if sp.is_total(CTX) and len(
            {y for _, y in sp.pairs}) == 1]
        assert len(consts) == 2  # one per element of Y


class TestFactoredCells:
    def test_product_target_factors(self, gen_table, gen_env):
        # hom(X, Y x Y) entries all project back to hom(X, Y) entries
        pairs = gen_table.hom_set(X, Prod(Y, Y))
        singles = {sp for sp, _ in gen_table.hom_set(X, Y)}
        for sp, term in pairs:
            assert eval_term(term, gen_env) == sp
            left = rel.compose(rel.proj1(Y, Y, CTX), sp)
            assert left in singles or not left.is_total(CTX)

    def test_coproduct_source_factors(self, gen_table, gen_env):
        for sp, term in gen_table.hom_set(Coprod(X, X), Y):
            assert eval_term(term, gen_env) == sp
            assert sp.is_single_valued()

    def test_large_cell_served_by_focused_table(self, ctx, fam):
        universe4 = build_universe([X, Y, Z, PT], 4)
        t = SubcatTable(ctx, universe4, {"gp": fam["gp"]})
        big = Prod(X, Prod(Prod(Y, Y), Y))  # 16 elements, above the closure cap
        entries = t.hom_set(big, Y)
        env = TermEnv(ctx, {"gp": fam["gp"]})
        assert entries
        for sp, term in entries:
            assert eval_term(term, env) == sp
