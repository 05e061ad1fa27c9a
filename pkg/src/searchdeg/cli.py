"""Command-line entry points.

All output is deterministic for a fixed (workspace, command, flags, seed):
randomized suites take an explicit --seed, collections are emitted in
sorted or workspace order, and no timestamps or addresses are printed.
Exit codes: 0 affirmative/verified, 1 negative/violation, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import laws, rel
from .degrees import (
    MatrixError,
    degree_report,
    hasse_dot,
    parse_mode,
    preorder_matrix,
)
from .objects import obj_to_str
from .param import (
    IncompleteBoundError,
    ParamError,
    ParamMorphism,
    ParamProblem,
    Parameterization,
    check_param_morphism,
    kappa_product,
    param_reduce_check,
    trivial_parameterization,
)
from .reduction import (
    CertTypeError,
    ReductionCert,
    UndecidableHereError,
    check_cert,
    decide,
)
from .subcat import SubcatTable, UniverseError
from .terms import (
    TComp,
    TCoprod,
    TDom,
    TermEnv,
    TermSyntaxError,
    TGen,
    TProd,
    WitnessTerm,
    eval_term,
    parse_term,
    print_term,
)
from .workspace import Workspace, WorkspaceError, load_workspace


class _UsageError(Exception):
    pass


def _load(path: str) -> Workspace:
    return load_workspace(path)


def _table(ws: Workspace) -> SubcatTable:
    return SubcatTable(ws.ctx, ws.universe(), ws.generators)


def _named_problems(ws: Workspace) -> list:
    return list(ws.problems.items())


def _get_problem(ws: Workspace, name: str):
    if name not in ws.problems:
        raise _UsageError(f"unknown problem {name!r}; workspace defines: "
                          + ", ".join(sorted(ws.problems)))
    return ws.problems[name]


# --- subcommands ---------------------------------------------------------------


def _cmd_axioms(args) -> int:
    report = laws.check_laws(
        seed=args.seed, cases=args.cases, max_atom_size=args.max_atom_size
    )
    width = max(len(r.name) for r in report.results)
    print(f"axiom suite: {args.cases} cases, seed {args.seed}, "
          f"max atom size {args.max_atom_size}")
    for r in report.results:
        status = "ok" if r.ok else "FAIL"
        print(f"  {r.name:<{width}}  {r.cases:>5} cases  {status}")
        if not r.ok:
            print(f"    counterexample: {r.counterexample}")
    bad = sum(1 for r in report.results if not r.ok)
    print(f"{len(report.results)} laws checked, {bad} violated")
    return 0 if bad == 0 else 1


def _mode_and_target(ws: Workspace, g, mode: str, trunc: Optional[int]):
    """Resolve the reduction kind and the effective oracle problem."""
    if mode == "wtt":
        n = ws.star_truncation if trunc is None else trunc
        return "m", rel.star_trunc(g, n), n
    return mode, g, None


def _cmd_reduce(args) -> int:
    ws = _load(args.workspace)
    f = _get_problem(ws, args.f)
    g = _get_problem(ws, args.g)
    kind, target, n = _mode_and_target(ws, g, args.mode, args.trunc)
    table = _table(ws)
    label = args.mode if n is None else f"wtt({n})"
    try:
        verdict = decide(f, target, table, kind)
    except UndecidableHereError as e:
        print(f"UNDECIDED ({e})")
        return 1
    if verdict.answer != "yes":
        print(f"NO (exhaustive at depth {table.universe.depth}, "
              f"{verdict.candidates} candidates, mode {label})")
        return 1
    cert = verdict.cert
    print(f"YES: {args.f} <= {args.g} (mode {label}, "
          f"depth {table.universe.depth})")
    print(f"  K: {print_term(cert.K)}")
    print(f"  H: {print_term(cert.H)}")
    if args.emit_cert:
        payload = {
            "kind": cert.kind,
            "f": args.f,
            "g": args.g if n is None else f"star({args.g},{n})",
            "H": print_term(cert.H),
            "K": print_term(cert.K),
        }
        with open(args.emit_cert, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"  certificate written to {args.emit_cert}")
    return 0


def _resolve_cert_problem(ws: Workspace, name: str):
    """A cert's f/g field: a problem name, possibly star(name,N)."""
    if name.startswith("star(") and name.endswith(")"):
        inner = name[5:-1]
        base, _, n = inner.rpartition(",")
        if base in ws.problems and n.isdigit():
            return rel.star_trunc(ws.problems[base], int(n))
    return _get_problem(ws, name)


def _cmd_check_cert(args) -> int:
    ws = _load(args.workspace)
    try:
        with open(args.cert, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise _UsageError(f"cannot read certificate: {e}") from e
    for key in ("kind", "f", "g", "H", "K"):
        if key not in raw:
            raise _UsageError(f"certificate is missing field {key!r}")
    if raw["kind"] not in ("sm", "m"):
        raise _UsageError(f"unknown certificate kind {raw['kind']!r}")
    try:
        h_term = parse_term(raw["H"])
        k_term = parse_term(raw["K"])
    except TermSyntaxError as e:
        raise _UsageError(f"bad witness term: {e}") from e
    f = _resolve_cert_problem(ws, raw["f"])
    g = _resolve_cert_problem(ws, raw["g"])
    cert = ReductionCert(raw["kind"], f, g, h_term, k_term)
    env = TermEnv(ws.ctx, ws.generators)
    try:
        w = check_cert(cert, env)
    except CertTypeError as e:
        print(f"INVALID (type error: {e})")
        return 1
    if w.holds:
        print(f"VALID: {raw['f']} <= {raw['g']} (kind {raw['kind']})")
        return 0
    print(f"INVALID: {w.reason or 'entailment fails'}")
    if w.violation is not None:
        print(f"  violation: {w.violation}")
    return 1


def _cmd_order(args) -> int:
    ws = _load(args.workspace)
    parse_mode(args.mode)  # validate early; raises ValueError on bad syntax
    named = _named_problems(ws)
    table = _table(ws)
    matrix = preorder_matrix([p for _, p in named], table, mode=args.mode)
    names = [name for name, _ in named]
    print("\t".join([args.mode] + names))
    for name, row in zip(names, matrix):
        cells = ["1" if c else "?" if c is None else "0" for c in row]
        print("\t".join([name] + cells))
    return 0


def _cmd_hasse(args) -> int:
    ws = _load(args.workspace)
    named = _named_problems(ws)
    table = _table(ws)
    report = degree_report(named, table, mode=args.mode)
    dot = hasse_dot(report)
    if args.dot == "-":
        sys.stdout.write(dot)
    else:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
        print(f"{len(report.classes)} classes, {len(report.hasse)} cover edges "
              f"written to {args.dot}")
    return 0


def _cmd_lattice(args) -> int:
    ws = _load(args.workspace)
    named = _named_problems(ws)
    table = _table(ws)
    report = degree_report(named, table, mode="m", lattice=True)
    counts: dict[str, int] = {}
    bad = []
    undecided = 0
    for fi in report.lattice_findings:
        counts[fi.check] = counts.get(fi.check, 0) + 1
        if fi.holds is None:
            undecided += 1
        elif not fi.holds:
            bad.append(fi)
    for check in sorted(counts):
        print(f"  {check}: {counts[check]} checks")
    total = len(report.lattice_findings)
    print(f"{total} findings, {len(bad)} violations, {undecided} undecided "
          f"(depth {report.universe_depth})")
    for fi in bad:
        print(f"  FAIL {fi.check} {','.join(fi.subjects)} [{fi.evidence}]: "
              f"{fi.detail}")
    return 0 if not bad else 1


def _term_generators(t: WitnessTerm) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, TGen):
            out.add(u.name)
        elif isinstance(u, TComp):
            stack += [u.after, u.first]
        elif isinstance(u, (TProd, TCoprod)):
            stack += [u.left, u.right]
        elif isinstance(u, TDom):
            stack.append(u.inner)
    return out


def _object_kappas(ws: Workspace) -> dict:
    """Per-object parameterizations induced by the problems' kappa maps;
    when several problems parameterize one object, the alphabetically
    first problem wins."""
    out: dict = {}
    for name in sorted(ws.kappas):
        obj = ws.kappas[name].obj
        out.setdefault(obj, ws.kappas[name])
    return out


def _obj_kappa(ws: Workspace, obj_kappas: dict, obj) -> Parameterization:
    k = obj_kappas.get(obj)
    return k if k is not None else trivial_parameterization(obj, ws.ctx)


def _check_bounded_generators(
    ws: Workspace, obj_kappas: dict, names=None
) -> list[tuple[str, object]]:
    results = []
    for name in sorted(ws.gen_bounds):
        if names is not None and name not in names:
            continue
        gen = ws.generators[name]
        try:
            m = ParamMorphism(
                gen,
                _obj_kappa(ws, obj_kappas, gen.src),
                _obj_kappa(ws, obj_kappas, gen.dst),
                ws.gen_bounds[name],
            )
            results.append((name, check_param_morphism(m)))
        except (ParamError, IncompleteBoundError) as e:
            results.append((name, e))
    return results


def _cmd_param_check(args) -> int:
    ws = _load(args.workspace)
    obj_kappas = _object_kappas(ws)
    if args.f is None:
        # validate every declared generator bound (parameter-bound only)
        results = _check_bounded_generators(ws, obj_kappas)
        if not results:
            print("no generator carries a bound table; nothing to check")
            return 0
        bad = 0
        for name, res in results:
            if isinstance(res, Exception):
                print(f"  {name}: ERROR {res}")
                bad += 1
            elif res.holds:
                print(f"  {name}: ok ({res.scope})")
            else:
                print(f"  {name}: FAIL {res.detail} "
                      f"at {obj_to_str(ws.generators[name].src)} "
                      f"element {res.counterexample}")
                bad += 1
        print(f"{len(results)} bounded generators checked, {bad} failures")
        return 0 if bad == 0 else 1
    if args.g is None:
        raise _UsageError("param-check takes either no problem names or two")
    f = _get_problem(ws, args.f)
    g = _get_problem(ws, args.g)
    table = _table(ws)
    try:
        verdict = decide(f, g, table, "m")
    except UndecidableHereError as e:
        print(f"UNDECIDED ({e})")
        return 1
    if verdict.answer != "yes":
        print(f"NO underlying reduction (exhaustive at depth "
              f"{table.universe.depth})")
        return 1
    cert = verdict.cert
    env = TermEnv(ws.ctx, ws.generators)
    # witnesses must respect every declared bound of the generators they use
    used = _term_generators(cert.K) | _term_generators(cert.H)
    gen_results = _check_bounded_generators(ws, obj_kappas, names=used)
    for name, res in gen_results:
        if isinstance(res, Exception):
            print(f"REJECTED (parameter-bound only): generator {name}: {res}")
            return 1
        if not res.holds:
            print(f"REJECTED (parameter-bound only): generator {name}: "
                  f"{res.detail}")
            return 1
    kappa_f = _obj_kappa(ws, obj_kappas, f.src)
    kappa_gsrc = _obj_kappa(ws, obj_kappas, g.src)
    k_rel = eval_term(cert.K, env)
    h_rel = eval_term(cert.H, env)
    k_morph = _least_bounded(k_rel, kappa_f, kappa_gsrc)
    h_src_k = kappa_product(
        kappa_f, trivial_parameterization(g.dst, ws.ctx), ws.ctx
    )
    h_morph = _least_bounded(
        h_rel, h_src_k, trivial_parameterization(f.dst, ws.ctx)
    )
    report = param_reduce_check(
        cert, ParamProblem(f, kappa_f), ParamProblem(g, kappa_gsrc),
        k_morph, h_morph, env,
    )
    if report.ok:
        print(f"ACCEPTED ({report.scope}): {args.f} <= {args.g}")
        print(f"  K: {print_term(cert.K)}  bound {_fmt_table(k_morph.bound_F)}")
        print(f"  H: {print_term(cert.H)}  bound {_fmt_table(h_morph.bound_F)}")
        return 0
    print(f"REJECTED ({report.scope}): {report.reason}")
    return 1


def _least_bounded(
    m, src_k: Parameterization, dst_k: Parameterization
) -> ParamMorphism:
    """The least monotone bound table the map actually satisfies."""
    table: dict[int, int] = {}
    for w, y in m.pairs:
        k = src_k(w)
        table[k] = max(table.get(k, 1), dst_k(y))
    if not table:
        table = {1: 1}
    best = 0
    for k in sorted(table):
        best = max(best, table[k])
        table[k] = best
    return ParamMorphism(m, src_k, dst_k, table)


def _fmt_table(table) -> str:
    return "{" + ", ".join(f"{k}->{v}" for k, v in sorted(table.items())) + "}"


# --- dispatch ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="searchdeg",
        description="finite search problems: reducibility oracle, "
        "certificates, degrees",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("axioms", help="randomized law suite over finite relations")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-atom-size", type=int, default=3)
    p.set_defaults(fn=_cmd_axioms)

    p = sub.add_parser("reduce", help="search for a reduction certificate")
    p.add_argument("workspace")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--mode", choices=["m", "sm", "wtt"], default="m")
    p.add_argument("--trunc", type=int, default=None,
                   help="star truncation depth for wtt mode")
    p.add_argument("--emit-cert", default=None, metavar="PATH")
    p.set_defaults(fn=_cmd_reduce)

    p = sub.add_parser("check-cert", help="validate a certificate file")
    p.add_argument("workspace")
    p.add_argument("cert")
    p.set_defaults(fn=_cmd_check_cert)

    p = sub.add_parser("order", help="reducibility matrix as TSV")
    p.add_argument("workspace")
    p.add_argument("--mode", default="m",
                   help="m, sm, or wtt(N)")
    p.set_defaults(fn=_cmd_order)

    p = sub.add_parser("hasse", help="degree Hasse diagram as DOT")
    p.add_argument("workspace")
    p.add_argument("--dot", required=True, metavar="PATH",
                   help="output path, or - for stdout")
    p.add_argument("--mode", default="m")
    p.set_defaults(fn=_cmd_hasse)

    p = sub.add_parser("lattice", help="sup/inf/distributivity checks")
    p.add_argument("workspace")
    p.set_defaults(fn=_cmd_lattice)

    p = sub.add_parser("param-check",
                       help="parameter-bound checks (bounds only)")
    p.add_argument("workspace")
    p.add_argument("f", nargs="?", default=None)
    p.add_argument("g", nargs="?", default=None)
    p.set_defaults(fn=_cmd_param_check)
    return top


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse uses 2 for usage errors and 0 for --help
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (_UsageError, WorkspaceError, UniverseError, MatrixError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
