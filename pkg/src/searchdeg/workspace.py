"""Workspace files: the JSON input format binding atoms, generators and
named problems for the command-line tools.

Every diagnostic names the JSON path of the offending value, so a bad
workspace fails with a pointer rather than a stack trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .objects import (
    AtomContext,
    ObjExpr,
    ObjSyntaxError,
    parse_elem,
    parse_obj,
)
from .param import BoundTable, ParamError, Parameterization
from .rel import SearchProblem, TypeMismatchError
from .subcat import Universe, build_universe


class WorkspaceError(ValueError):
    """Schema or type-check failure, carrying the JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Workspace:
    ctx: AtomContext
    universe_depth: int
    star_truncation: int
    generators: dict[str, SearchProblem]
    gen_bounds: dict[str, BoundTable]
    problems: dict[str, SearchProblem]
    kappas: dict[str, Parameterization] = field(default_factory=dict)

    def universe(self, depth: Optional[int] = None) -> Universe:
        from .objects import Atom

        bases = [Atom(name) for name in self.ctx.atom_names]
        return build_universe(bases, self.universe_depth if depth is None else depth)

    def problem(self, name: str) -> SearchProblem:
        try:
            return self.problems[name]
        except KeyError:
            raise WorkspaceError(
                f"problems[{name!r}]", "no problem with this name"
            ) from None


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise WorkspaceError(path, message)


def _parse_object(text, path: str) -> ObjExpr:
    _expect(isinstance(text, str), path, "expected an object expression string")
    try:
        return parse_obj(text)
    except ObjSyntaxError as e:
        raise WorkspaceError(path, f"bad object expression: {e}") from e


def _parse_element(text, path: str, ctx: AtomContext, obj: ObjExpr):
    _expect(isinstance(text, str), path, "expected an element string")
    try:
        e = parse_elem(text)
    except ObjSyntaxError as exc:
        raise WorkspaceError(path, f"bad element: {exc}") from exc
    if e not in ctx.carrier(obj):
        raise WorkspaceError(path, f"element {text!r} is not in the carrier")
    return e


def _parse_pairs(raw, path: str, ctx: AtomContext, src: ObjExpr, dst: ObjExpr):
    _expect(isinstance(raw, list), path, "expected a list of [question, answer] pairs")
    pairs = []
    for i, item in enumerate(raw):
        p = f"{path}[{i}]"
        _expect(
            isinstance(item, list) and len(item) == 2, p, "expected a two-element list"
        )
        x = _parse_element(item[0], f"{p}[0]", ctx, src)
        y = _parse_element(item[1], f"{p}[1]", ctx, dst)
        pairs.append((x, y))
    return pairs


def _parse_bound(raw, path: str) -> BoundTable:
    _expect(isinstance(raw, dict), path, "expected a parameter-to-bound object")
    table = {}
    for k, v in raw.items():
        p = f"{path}[{k!r}]"
        try:
            key = int(k)
        except ValueError:
            raise WorkspaceError(p, "bound table keys must be integers") from None
        _expect(isinstance(v, int) and not isinstance(v, bool), p,
                "bound values must be integers")
        table[key] = v
    _expect(bool(table), path, "bound table must be non-empty")
    return table


def load_workspace(path: str) -> Workspace:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise WorkspaceError(path, f"cannot read workspace: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise WorkspaceError(path, f"not valid JSON: {e}") from e
    return parse_workspace(raw)


def parse_workspace(raw) -> Workspace:
    _expect(isinstance(raw, dict), "$", "workspace must be a JSON object")
    _expect("atoms" in raw, "$.atoms", "missing required field")
    atoms_raw = raw["atoms"]
    _expect(isinstance(atoms_raw, dict) and atoms_raw, "$.atoms",
            "expected a non-empty name-to-labels object")
    atoms = {}
    for name, labels in atoms_raw.items():
        p = f"$.atoms[{name!r}]"
        _expect(isinstance(labels, list), p, "expected a list of labels")
        _expect(all(isinstance(l, str) for l in labels), p, "labels must be strings")
        _expect(len(set(labels)) == len(labels), p, "duplicate labels")
        atoms[name] = tuple(labels)
    ctx = AtomContext(atoms)

    depth = raw.get("universe_depth", 2)
    _expect(isinstance(depth, int) and depth >= 0, "$.universe_depth",
            "expected a non-negative integer")
    trunc = raw.get("star_truncation", 3)
    _expect(isinstance(trunc, int) and trunc >= 1, "$.star_truncation",
            "expected a positive integer")

    generators: dict[str, SearchProblem] = {}
    gen_bounds: dict[str, BoundTable] = {}
    for i, g in enumerate(raw.get("generators", [])):
        p = f"$.generators[{i}]"
        _expect(isinstance(g, dict), p, "expected an object")
        for key in ("name", "src", "dst", "map"):
            _expect(key in g, f"{p}.{key}", "missing required field")
        name = g["name"]
        _expect(isinstance(name, str) and name, f"{p}.name", "expected a name string")
        _expect(name not in generators, f"{p}.name", f"duplicate generator {name!r}")
        src = _parse_object(g["src"], f"{p}.src")
        dst = _parse_object(g["dst"], f"{p}.dst")
        _expect(isinstance(g["map"], dict), f"{p}.map",
                "expected a question-to-answer object")
        pairs = []
        for xs, ys in g["map"].items():
            x = _parse_element(xs, f"{p}.map[{xs!r}]", ctx, src)
            y = _parse_element(ys, f"{p}.map[{xs!r}]", ctx, dst)
            pairs.append((x, y))
        try:
            generators[name] = SearchProblem.make(src, dst, pairs)
        except TypeMismatchError as e:
            raise WorkspaceError(f"{p}.map", str(e)) from e
        if "bound" in g:
            gen_bounds[name] = _parse_bound(g["bound"], f"{p}.bound")

    problems: dict[str, SearchProblem] = {}
    kappas: dict[str, Parameterization] = {}
    for i, pr in enumerate(raw.get("problems", [])):
        p = f"$.problems[{i}]"
        _expect(isinstance(pr, dict), p, "expected an object")
        for key in ("name", "src", "dst", "pairs"):
            _expect(key in pr, f"{p}.{key}", "missing required field")
        name = pr["name"]
        _expect(isinstance(name, str) and name, f"{p}.name", "expected a name string")
        _expect(
            name not in problems and name not in generators,
            f"{p}.name", f"duplicate name {name!r}",
        )
        src = _parse_object(pr["src"], f"{p}.src")
        dst = _parse_object(pr["dst"], f"{p}.dst")
        pairs = _parse_pairs(pr["pairs"], f"{p}.pairs", ctx, src, dst)
        try:
            problems[name] = SearchProblem.make(src, dst, pairs)
        except TypeMismatchError as e:
            raise WorkspaceError(f"{p}.pairs", str(e)) from e
        if "kappa" in pr:
            kp = f"{p}.kappa"
            _expect(isinstance(pr["kappa"], dict), kp,
                    "expected an element-to-parameter object")
            kmap = {}
            for es, kv in pr["kappa"].items():
                ep = f"{kp}[{es!r}]"
                e = _parse_element(es, ep, ctx, src)
                _expect(isinstance(kv, int) and not isinstance(kv, bool) and kv >= 1,
                        ep, "parameter values must be positive integers")
                kmap[e] = kv
            try:
                kappa = Parameterization(src, kmap)
                kappa.validate(ctx)
            except ParamError as e:
                raise WorkspaceError(kp, str(e)) from e
            kappas[name] = kappa

    return Workspace(
        ctx=ctx,
        universe_depth=depth,
        star_truncation=trunc,
        generators=generators,
        gen_bounds=gen_bounds,
        problems=problems,
        kappas=kappas,
    )
