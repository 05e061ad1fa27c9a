import pytest
from hypothesis import given, strategies as st

from searchdeg.objects import (
    Atom,
    AtomContext,
    Coprod,
    ObjSyntaxError,
    PairElem,
    Prod,
    TagElem,
    elem_key,
    elem_to_str,
    obj_atoms,
    obj_depth,
    obj_key,
    obj_to_str,
    parse_elem,
    parse_obj,
    subexpressions,
)

from .conftest import ATOMS, PT, X, Y, Z


def _objects(max_leaves=4):
    leaf = st.sampled_from([X, Y, Z, PT])
    return st.recursive(
        leaf,
        lambda inner: st.builds(Prod, inner, inner)
        | st.builds(Coprod, inner, inner),
        max_leaves=max_leaves,
    )


class TestObjectSyntax:
    @given(_objects())
    def test_obj_roundtrip(self, obj):
        assert parse_obj(obj_to_str(obj)) == obj

    def test_parse_rejects_garbage(self):
        for bad in ["", "(X", "X *", "X ** Y", "X + * Y", "X)"]:
            with pytest.raises(ObjSyntaxError):
                parse_obj(bad)

    def test_depth_and_atoms(self):
        o = Prod(X, Coprod(Y, Z))
        assert obj_depth(o) == 2
        assert obj_atoms(o) == frozenset({"X", "Y", "Z"})
        assert set(subexpressions(o)) == {o, X, Coprod(Y, Z), Y, Z}

    @given(_objects())
    def test_obj_key_total_order(self, obj):
        # keys sort consistently with structural equality
        assert obj_key(obj) == obj_key(parse_obj(obj_to_str(obj)))


class TestCarriers:
    def setup_method(self):
        self.ctx = AtomContext(ATOMS)

    def test_atom_carrier(self):
        assert [elem_to_str(e) for e in self.ctx.carrier(X)] == ["a", "b"]

    def test_product_carrier_size(self):
        assert self.ctx.size(Prod(X, Y)) == 4
        assert self.ctx.size(Coprod(X, Y)) == 4
        assert self.ctx.size(Prod(PT, Coprod(Y, Z))) == 4

    def test_carrier_is_sorted_and_duplicate_free(self):
        for o in [X, Prod(X, Y), Coprod(Y, Z), Prod(Coprod(X, Y), PT)]:
            carrier = self.ctx.carrier(o)
            keys = [elem_key(e) for e in carrier]
            assert keys == sorted(keys)
            assert len(set(keys)) == len(keys)

    def test_is_element(self):
        pair = PairElem(parse_elem("a"), parse_elem("0"))
        assert self.ctx.is_element(pair, Prod(X, Y))
        assert not self.ctx.is_element(pair, Prod(Y, X))
        tag = TagElem(1, parse_elem("a"))
        assert self.ctx.is_element(tag, Coprod(X, Y))
        assert not self.ctx.is_element(tag, Coprod(Y, X))

    def test_elem_roundtrip(self):
        for o in [X, Prod(X, Y), Coprod(X, Y), Prod(Coprod(X, Y), Z)]:
            for e in self.ctx.carrier(o):
                back = parse_elem(elem_to_str(e))
                assert back == e
                assert self.ctx.is_element(back, o)

    def test_unknown_atom_rejected(self):
        with pytest.raises(KeyError):
            self.ctx.carrier(Atom("W"))
