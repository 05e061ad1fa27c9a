"""Finite object expressions, their carriers, and element values.

Objects are binary trees of named atoms combined with a product or a
coproduct constructor.  Carriers are computed against an ``AtomContext``
binding every atom name to a finite tuple of labels.  Elements mirror the
object structure: labels for atoms, pairs for products, tagged values for
coproducts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence, Union


class ObjSyntaxError(ValueError):
    """Raised on malformed object/element notation."""


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Prod:
    left: "ObjExpr"
    right: "ObjExpr"


@dataclass(frozen=True)
class Coprod:
    left: "ObjExpr"
    right: "ObjExpr"


ObjExpr = Union[Atom, Prod, Coprod]


@dataclass(frozen=True, eq=False)
class AtomElem:
    label: str

    def __post_init__(self):
        key = ("a", self.label)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, AtomElem) and self.label == other.label
        )

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=False)
class PairElem:
    left: "Element"
    right: "Element"

    def __post_init__(self):
        key = ("p", self.left._key, self.right._key)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, PairElem) and self._key == other._key
        )

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=False)
class TagElem:
    side: int  # 1 or 2
    value: "Element"

    def __post_init__(self):
        key = ("t", self.side, self.value._key)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, TagElem) and self._key == other._key
        )

    def __hash__(self):
        return self._hash


Element = Union[AtomElem, PairElem, TagElem]


def obj_depth(obj: ObjExpr) -> int:
    """Nesting depth of Prod/Coprod constructors (atoms have depth 0)."""
    if isinstance(obj, Atom):
        return 0
    return 1 + max(obj_depth(obj.left), obj_depth(obj.right))


def obj_atoms(obj: ObjExpr) -> frozenset[str]:
    if isinstance(obj, Atom):
        return frozenset([obj.name])
    return obj_atoms(obj.left) | obj_atoms(obj.right)


def subexpressions(obj: ObjExpr) -> Iterator[ObjExpr]:
    """All subtrees of obj, including obj itself."""
    yield obj
    if not isinstance(obj, Atom):
        yield from subexpressions(obj.left)
        yield from subexpressions(obj.right)


def obj_to_str(obj: ObjExpr) -> str:
    if isinstance(obj, Atom):
        return obj.name
    op = "*" if isinstance(obj, Prod) else "+"
    return f"({obj_to_str(obj.left)} {op} {obj_to_str(obj.right)})"


def elem_to_str(e: Element) -> str:
    if isinstance(e, AtomElem):
        return e.label
    if isinstance(e, PairElem):
        return f"<{elem_to_str(e.left)},{elem_to_str(e.right)}>"
    return f"{e.side}:{elem_to_str(e.value)}"


def elem_key(e: Element):
    """Canonical sort key; total on elements of a common object shape."""
    return e._key


class AtomContext:
    """Immutable binding of atom names to finite label tuples."""

    def __init__(self, atoms: Mapping[str, Sequence[str]]):
        self._atoms = {name: tuple(labels) for name, labels in atoms.items()}
        for name, labels in self._atoms.items():
            if len(set(labels)) != len(labels):
                raise ValueError(f"atom {name!r} has duplicate labels")
        self._carriers: dict[ObjExpr, tuple[Element, ...]] = {}

    @property
    def atom_names(self) -> tuple[str, ...]:
        return tuple(self._atoms)

    def labels(self, name: str) -> tuple[str, ...]:
        if name not in self._atoms:
            raise KeyError(f"unknown atom {name!r}")
        return self._atoms[name]

    def carrier(self, obj: ObjExpr) -> tuple[Element, ...]:
        cached = self._carriers.get(obj)
        if cached is not None:
            return cached
        if isinstance(obj, Atom):
            out = tuple(AtomElem(lb) for lb in self.labels(obj.name))
        elif isinstance(obj, Prod):
            out = tuple(
                PairElem(a, b)
                for a in self.carrier(obj.left)
                for b in self.carrier(obj.right)
            )
        else:
            out = tuple(TagElem(1, a) for a in self.carrier(obj.left)) + tuple(
                TagElem(2, b) for b in self.carrier(obj.right)
            )
        self._carriers[obj] = out
        return out

    def size(self, obj: ObjExpr) -> int:
        return len(self.carrier(obj))

    def is_element(self, e: Element, obj: ObjExpr) -> bool:
        if isinstance(obj, Atom):
            return isinstance(e, AtomElem) and e.label in self.labels(obj.name)
        if isinstance(obj, Prod):
            return (
                isinstance(e, PairElem)
                and self.is_element(e.left, obj.left)
                and self.is_element(e.right, obj.right)
            )
        if not isinstance(e, TagElem):
            return False
        if e.side == 1:
            return self.is_element(e.value, obj.left)
        if e.side == 2:
            return self.is_element(e.value, obj.right)
        return False


# --- notation -------------------------------------------------------------
#
# obj  := NAME | '(' obj '*' obj ')' | '(' obj '+' obj ')'
# elem := LABEL | '<' elem ',' elem '>' | '1:' elem | '2:' elem

_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if not self.text.startswith(ch, self.pos):
            raise ObjSyntaxError(
                f"expected {ch!r} at position {self.pos} in {self.text!r}"
            )
        self.pos += len(ch)

    def name(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _NAME_CHARS:
            self.pos += 1
        if self.pos == start:
            raise ObjSyntaxError(
                f"expected a name at position {start} in {self.text!r}"
            )
        return self.text[start : self.pos]

    def done(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _parse_obj(sc: _Scanner) -> ObjExpr:
    if sc.peek() == "(":
        sc.expect("(")
        left = _parse_obj(sc)
        op = sc.peek()
        if op not in ("*", "+"):
            raise ObjSyntaxError(
                f"expected '*' or '+' at position {sc.pos} in {sc.text!r}"
            )
        sc.expect(op)
        right = _parse_obj(sc)
        sc.expect(")")
        return Prod(left, right) if op == "*" else Coprod(left, right)
    return Atom(sc.name())


def parse_obj(text: str) -> ObjExpr:
    sc = _Scanner(text)
    obj = _parse_obj(sc)
    if not sc.done():
        raise ObjSyntaxError(f"trailing input at position {sc.pos} in {text!r}")
    return obj


def _parse_elem(sc: _Scanner) -> Element:
    ch = sc.peek()
    if ch == "<":
        sc.expect("<")
        left = _parse_elem(sc)
        sc.expect(",")
        right = _parse_elem(sc)
        sc.expect(">")
        return PairElem(left, right)
    if ch in ("1", "2"):
        # Could be a tag '1:' / '2:' or a plain label starting with a digit.
        save = sc.pos
        name = sc.name()
        if name in ("1", "2") and sc.peek() == ":":
            sc.expect(":")
            return TagElem(int(name), _parse_elem(sc))
        sc.pos = save
    return AtomElem(sc.name())


def parse_elem(text: str) -> Element:
    sc = _Scanner(text)
    e = _parse_elem(sc)
    if not sc.done():
        raise ObjSyntaxError(f"trailing input at position {sc.pos} in {text!r}")
    return e


@lru_cache(maxsize=None)
def obj_key(obj: ObjExpr):
    """Canonical sort key for objects: by depth, then by printed form."""
    return (obj_depth(obj), obj_to_str(obj))
