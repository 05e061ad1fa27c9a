"""Witness terms: a small syntax for morphisms of the ambient category.

Terms name generators, structural morphisms, constants and the three
combining operations (composition, product, coproduct).  They are used as
checkable evidence inside reduction certificates and as provenance for
saturated hom-set entries.

Notation (fully parenthesised on output; one infix per level on input):

  term := 'gen:'NAME | 'id[' obj ']' | 'delta[' obj ']'
        | 'pi1[' obj ',' obj ']'   | 'pi2[' obj ',' obj ']'
        | 'in1[' obj ',' obj ']'   | 'in2[' obj ',' obj ']'
        | 'nabla[' obj ']'         | 'dom(' term ')'
        | 'const[' obj '->' obj (':' elem)? ']'
        | 'empty[' obj '->' obj ']'
        | 'assoc[' obj ',' obj ',' obj (';inv')? ']'
        | 'comm[' obj ',' obj ']'
        | 'distr[' obj ',' obj ',' obj (';inv')? ']'
        | '(' term '.' term ')' | '(' term '*' term ')' | '(' term '+' term ')'
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

from . import rel
from .objects import (
    AtomContext,
    Coprod,
    Element,
    ObjExpr,
    ObjSyntaxError,
    Prod,
    _Scanner,
    _parse_elem,
    _parse_obj,
    elem_to_str,
    obj_to_str,
)
from .rel import SearchProblem


class TermTypeError(TypeError):
    """Raised when a term is not well-typed."""


class TermSyntaxError(ValueError):
    """Raised on malformed term notation."""


@dataclass(frozen=True)
class TGen:
    name: str


@dataclass(frozen=True)
class TId:
    obj: ObjExpr


@dataclass(frozen=True)
class TDiag:
    obj: ObjExpr


@dataclass(frozen=True)
class TProj1:
    left: ObjExpr
    right: ObjExpr


@dataclass(frozen=True)
class TProj2:
    left: ObjExpr
    right: ObjExpr


@dataclass(frozen=True)
class TInj1:
    left: ObjExpr
    right: ObjExpr


@dataclass(frozen=True)
class TInj2:
    left: ObjExpr
    right: ObjExpr


@dataclass(frozen=True)
class TCodiag:
    obj: ObjExpr


@dataclass(frozen=True)
class TDom:
    inner: "WitnessTerm"


@dataclass(frozen=True)
class TConst:
    src: ObjExpr
    dst: ObjExpr
    value: Optional[Element]  # None only for an empty target carrier


@dataclass(frozen=True)
class TEmpty:
    src: ObjExpr
    dst: ObjExpr


@dataclass(frozen=True)
class TAssoc:
    a: ObjExpr
    b: ObjExpr
    c: ObjExpr
    inv: bool = False


@dataclass(frozen=True)
class TComm:
    a: ObjExpr
    b: ObjExpr


@dataclass(frozen=True)
class TDistrib:
    a: ObjExpr
    b: ObjExpr
    c: ObjExpr
    inv: bool = False


@dataclass(frozen=True)
class TComp:
    after: "WitnessTerm"
    first: "WitnessTerm"


@dataclass(frozen=True)
class TProd:
    left: "WitnessTerm"
    right: "WitnessTerm"


@dataclass(frozen=True)
class TCoprod:
    left: "WitnessTerm"
    right: "WitnessTerm"


WitnessTerm = Union[
    TGen, TId, TDiag, TProj1, TProj2, TInj1, TInj2, TCodiag, TDom,
    TConst, TEmpty, TAssoc, TComm, TDistrib, TComp, TProd, TCoprod,
]


class TermEnv:
    """Atom bindings plus named morphisms available to 'gen:' references."""

    def __init__(self, ctx: AtomContext, gens: Mapping[str, SearchProblem]):
        self.ctx = ctx
        self.gens = dict(gens)
        # identity-keyed memo tables; terms built by the combinators share
        # large subterms, and memoization keeps evaluation linear in DAG size
        self._type_memo: dict[int, tuple] = {}
        self._eval_memo: dict[int, tuple] = {}


def type_of(t: WitnessTerm, env: TermEnv) -> tuple[ObjExpr, ObjExpr]:
    hit = env._type_memo.get(id(t))
    if hit is not None and hit[0] is t:
        return hit[1]
    out = _type_of(t, env)
    env._type_memo[id(t)] = (t, out)
    return out


def _type_of(t: WitnessTerm, env: TermEnv) -> tuple[ObjExpr, ObjExpr]:
    if isinstance(t, TGen):
        if t.name not in env.gens:
            raise TermTypeError(f"unknown generator {t.name!r}")
        g = env.gens[t.name]
        return (g.src, g.dst)
    if isinstance(t, TId):
        return (t.obj, t.obj)
    if isinstance(t, TDiag):
        return (t.obj, Prod(t.obj, t.obj))
    if isinstance(t, TProj1):
        return (Prod(t.left, t.right), t.left)
    if isinstance(t, TProj2):
        return (Prod(t.left, t.right), t.right)
    if isinstance(t, TInj1):
        return (t.left, Coprod(t.left, t.right))
    if isinstance(t, TInj2):
        return (t.right, Coprod(t.left, t.right))
    if isinstance(t, TCodiag):
        return (Coprod(t.obj, t.obj), t.obj)
    if isinstance(t, TDom):
        s, _ = type_of(t.inner, env)
        return (s, s)
    if isinstance(t, (TConst, TEmpty)):
        return (t.src, t.dst)
    if isinstance(t, TAssoc):
        lhs = Prod(Prod(t.a, t.b), t.c)
        rhs = Prod(t.a, Prod(t.b, t.c))
        return (rhs, lhs) if t.inv else (lhs, rhs)
    if isinstance(t, TComm):
        return (Prod(t.a, t.b), Prod(t.b, t.a))
    if isinstance(t, TDistrib):
        lhs = Prod(t.a, Coprod(t.b, t.c))
        rhs = Coprod(Prod(t.a, t.b), Prod(t.a, t.c))
        return (rhs, lhs) if t.inv else (lhs, rhs)
    if isinstance(t, TComp):
        s1, d1 = type_of(t.first, env)
        s2, d2 = type_of(t.after, env)
        if d1 != s2:
            raise TermTypeError(
                f"composite mismatch: {print_term(t.first)} ends at "
                f"{obj_to_str(d1)} but {print_term(t.after)} starts at "
                f"{obj_to_str(s2)}"
            )
        return (s1, d2)
    if isinstance(t, TProd):
        s1, d1 = type_of(t.left, env)
        s2, d2 = type_of(t.right, env)
        return (Prod(s1, s2), Prod(d1, d2))
    if isinstance(t, TCoprod):
        s1, d1 = type_of(t.left, env)
        s2, d2 = type_of(t.right, env)
        return (Coprod(s1, s2), Coprod(d1, d2))
    raise TermTypeError(f"not a term: {t!r}")


def eval_term(t: WitnessTerm, env: TermEnv) -> SearchProblem:
    hit = env._eval_memo.get(id(t))
    if hit is not None and hit[0] is t:
        return hit[1]
    out = _eval_term(t, env)
    env._eval_memo[id(t)] = (t, out)
    return out


def _eval_term(t: WitnessTerm, env: TermEnv) -> SearchProblem:
    ctx = env.ctx
    if isinstance(t, TGen):
        if t.name not in env.gens:
            raise TermTypeError(f"unknown generator {t.name!r}")
        return env.gens[t.name]
    if isinstance(t, TId):
        return rel.identity(t.obj, ctx)
    if isinstance(t, TDiag):
        return rel.diag(t.obj, ctx)
    if isinstance(t, TProj1):
        return rel.proj1(t.left, t.right, ctx)
    if isinstance(t, TProj2):
        return rel.proj2(t.left, t.right, ctx)
    if isinstance(t, TInj1):
        return rel.inj1(t.left, t.right, ctx)
    if isinstance(t, TInj2):
        return rel.inj2(t.left, t.right, ctx)
    if isinstance(t, TCodiag):
        return rel.codiag(t.obj, ctx)
    if isinstance(t, TDom):
        return rel.dom_m(eval_term(t.inner, env))
    if isinstance(t, TConst):
        return rel.const(t.src, t.dst, t.value, ctx)
    if isinstance(t, TEmpty):
        return rel.empty_problem(t.src, t.dst)
    if isinstance(t, TAssoc):
        return rel.assoc(t.a, t.b, t.c, ctx, inv=t.inv)
    if isinstance(t, TComm):
        return rel.comm(t.a, t.b, ctx)
    if isinstance(t, TDistrib):
        return rel.distrib(t.a, t.b, t.c, ctx, inv=t.inv)
    if isinstance(t, TComp):
        type_of(t, env)  # surface type errors before evaluating
        return rel.compose(eval_term(t.after, env), eval_term(t.first, env))
    if isinstance(t, TProd):
        return rel.product_m(eval_term(t.left, env), eval_term(t.right, env))
    if isinstance(t, TCoprod):
        return rel.coproduct_m(eval_term(t.left, env), eval_term(t.right, env))
    raise TermTypeError(f"not a term: {t!r}")


def print_term(t: WitnessTerm) -> str:
    o = obj_to_str
    if isinstance(t, TGen):
        return f"gen:{t.name}"
    if isinstance(t, TId):
        return f"id[{o(t.obj)}]"
    if isinstance(t, TDiag):
        return f"delta[{o(t.obj)}]"
    if isinstance(t, TProj1):
        return f"pi1[{o(t.left)},{o(t.right)}]"
    if isinstance(t, TProj2):
        return f"pi2[{o(t.left)},{o(t.right)}]"
    if isinstance(t, TInj1):
        return f"in1[{o(t.left)},{o(t.right)}]"
    if isinstance(t, TInj2):
        return f"in2[{o(t.left)},{o(t.right)}]"
    if isinstance(t, TCodiag):
        return f"nabla[{o(t.obj)}]"
    if isinstance(t, TDom):
        return f"dom({print_term(t.inner)})"
    if isinstance(t, TConst):
        if t.value is None:
            return f"const[{o(t.src)}->{o(t.dst)}]"
        return f"const[{o(t.src)}->{o(t.dst)}:{elem_to_str(t.value)}]"
    if isinstance(t, TEmpty):
        return f"empty[{o(t.src)}->{o(t.dst)}]"
    if isinstance(t, TAssoc):
        tail = ";inv" if t.inv else ""
        return f"assoc[{o(t.a)},{o(t.b)},{o(t.c)}{tail}]"
    if isinstance(t, TComm):
        return f"comm[{o(t.a)},{o(t.b)}]"
    if isinstance(t, TDistrib):
        tail = ";inv" if t.inv else ""
        return f"distr[{o(t.a)},{o(t.b)},{o(t.c)}{tail}]"
    if isinstance(t, TComp):
        return f"({print_term(t.after)} . {print_term(t.first)})"
    if isinstance(t, TProd):
        return f"({print_term(t.left)} * {print_term(t.right)})"
    if isinstance(t, TCoprod):
        return f"({print_term(t.left)} + {print_term(t.right)})"
    raise TermTypeError(f"not a term: {t!r}")


_KEYWORDS = {
    "id", "delta", "pi1", "pi2", "in1", "in2", "nabla", "const", "empty",
    "assoc", "comm", "distr",
}


def _parse_primary(sc: _Scanner) -> WitnessTerm:
    ch = sc.peek()
    if ch == "(":
        sc.expect("(")
        left = _parse_infix(sc)
        sc.expect(")")
        return left
    save = sc.pos
    name = sc.name()
    if name == "gen":
        sc.expect(":")
        return TGen(sc.name())
    if name == "dom":
        sc.expect("(")
        inner = _parse_infix(sc)
        sc.expect(")")
        return TDom(inner)
    if name not in _KEYWORDS:
        raise TermSyntaxError(
            f"unknown term head {name!r} at position {save} in {sc.text!r}"
        )
    sc.expect("[")
    if name in ("id", "delta", "nabla"):
        obj = _parse_obj(sc)
        sc.expect("]")
        return {"id": TId, "delta": TDiag, "nabla": TCodiag}[name](obj)
    if name in ("pi1", "pi2", "in1", "in2", "comm"):
        a = _parse_obj(sc)
        sc.expect(",")
        b = _parse_obj(sc)
        sc.expect("]")
        cls = {
            "pi1": TProj1, "pi2": TProj2, "in1": TInj1, "in2": TInj2,
            "comm": TComm,
        }[name]
        return cls(a, b)
    if name in ("const", "empty"):
        src = _parse_obj(sc)
        sc.expect("->")
        dst = _parse_obj(sc)
        if name == "empty":
            sc.expect("]")
            return TEmpty(src, dst)
        value = None
        if sc.peek() == ":":
            sc.expect(":")
            value = _parse_elem(sc)
        sc.expect("]")
        return TConst(src, dst, value)
    # assoc / distr
    a = _parse_obj(sc)
    sc.expect(",")
    b = _parse_obj(sc)
    sc.expect(",")
    c = _parse_obj(sc)
    inv = False
    if sc.peek() == ";":
        sc.expect(";inv")
        inv = True
    sc.expect("]")
    return (TAssoc if name == "assoc" else TDistrib)(a, b, c, inv)


def _parse_infix(sc: _Scanner) -> WitnessTerm:
    left = _parse_primary(sc)
    op = sc.peek()
    if op in (".", "*", "+"):
        sc.expect(op)
        right = _parse_primary(sc)
        if op == ".":
            return TComp(left, right)
        if op == "*":
            return TProd(left, right)
        return TCoprod(left, right)
    return left


def parse_term(text: str) -> WitnessTerm:
    sc = _Scanner(text)
    try:
        t = _parse_infix(sc)
    except ObjSyntaxError as e:
        raise TermSyntaxError(str(e)) from e
    if not sc.done():
        raise TermSyntaxError(f"trailing input at position {sc.pos} in {text!r}")
    return t


def canonicalize(t: WitnessTerm) -> WitnessTerm:
    """Drop identity factors and right-associate composition chains."""

    def chain(u: WitnessTerm) -> list[WitnessTerm]:
        if isinstance(u, TComp):
            return chain(u.after) + chain(u.first)
        u = canonicalize(u)
        return [] if isinstance(u, TId) else [u]

    if isinstance(u := t, TComp):
        parts = chain(u)
        if not parts:
            # recover the endpoint object from any identity in the chain
            inner = u
            while isinstance(inner, TComp):
                inner = inner.first
            return canonicalize(inner)
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = TComp(p, out)
        return out
    if isinstance(t, TProd):
        return TProd(canonicalize(t.left), canonicalize(t.right))
    if isinstance(t, TCoprod):
        return TCoprod(canonicalize(t.left), canonicalize(t.right))
    if isinstance(t, TDom):
        return TDom(canonicalize(t.inner))
    return t
