"""Shared fixtures: a small two-atom world and its standard problem family."""

import pathlib
import random

import pytest

from searchdeg.objects import Atom, AtomContext, parse_elem
from searchdeg.rel import SearchProblem
from searchdeg.subcat import SubcatTable, build_universe
from searchdeg.terms import TermEnv

DATA = pathlib.Path(__file__).parent / "data"

X = Atom("X")
Y = Atom("Y")
Z = Atom("Z")
PT = Atom("PT")

ATOMS = {"X": ["a", "b"], "Y": ["0", "1"], "Z": ["p", "q"], "PT": ["star"]}


def el(text):
    return parse_elem(text)


def make_problem(src, dst, pairs):
    return SearchProblem.make(src, dst, [(el(x), el(y)) for x, y in pairs])


@pytest.fixture(scope="session")
def ctx():
    return AtomContext(ATOMS)


@pytest.fixture(scope="session")
def fam(ctx):
    """The standard family: empty, f, g, gp on X->Y plus idpt on PT->PT."""
    return {
        "empty": make_problem(X, Y, []),
        "f": make_problem(X, Y, [("a", "0"), ("a", "1"), ("b", "1")]),
        "g": make_problem(X, Y, [("a", "0")]),
        "gp": make_problem(X, Y, [("a", "0"), ("b", "1")]),
        "idpt": make_problem(PT, PT, [("star", "star")]),
    }


@pytest.fixture(scope="session")
def universe2(ctx):
    return build_universe([X, Y, Z, PT], 2)


@pytest.fixture(scope="session")
def bare_table(ctx, universe2):
    """Depth-2 table generated by nothing but the structural morphisms."""
    return SubcatTable(ctx, universe2, {})


@pytest.fixture(scope="session")
def gen_table(ctx, universe2, fam):
    """Depth-2 table generated by the single-valued g and gp."""
    return SubcatTable(ctx, universe2, {"g": fam["g"], "gp": fam["gp"]})


@pytest.fixture(scope="session")
def bare_env(ctx):
    return TermEnv(ctx, {})


@pytest.fixture(scope="session")
def gen_env(ctx, fam):
    return TermEnv(ctx, {"g": fam["g"], "gp": fam["gp"]})


def random_problem(rng: random.Random, ctx, src, dst, density=0.5):
    """A random relation src -> dst; pair (x, y) kept with the given density."""
    pairs = []
    for x in ctx.carrier(src):
        for y in ctx.carrier(dst):
            if rng.random() < density:
                pairs.append((x, y))
    return SearchProblem.make(src, dst, pairs)
