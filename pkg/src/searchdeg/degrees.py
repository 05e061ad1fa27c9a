"""Degree-structure analysis over a finite family of search problems.

Given a saturated table and a named family, this module computes the
reducibility matrix under a chosen reduction mode, quotients it into
mutual-reducibility classes, extracts the Hasse cover relation of the
induced partial order, and verifies the lattice structure (suprema via
coproducts, infima via the pairing operation, and distributivity) with
both oracle searches and certificate constructions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import rel
from .objects import Prod
from .rel import SearchProblem
from .subcat import SubcatTable
from .terms import TermEnv
from .reduction import (
    CertTypeError,
    CombinatorError,
    OracleVerdict,
    ReductionCert,
    UndecidableHereError,
    check_cert,
    decide,
    distrib_cert,
    inf_proj_cert,
    inf_univ_cert,
    query_cells,
    sm_to_m,
    sup_inj_cert,
    sup_univ_cert,
    wtt_leq,
)


class MatrixError(ValueError):
    """Raised when a matrix is not a usable (decided) preorder."""


Cell = Optional[bool]  # None marks a cell undecidable at this universe depth


def parse_mode(mode: str) -> tuple[str, Optional[int]]:
    """Split a mode string into (kind, truncation): "m", "sm", or "wtt(N)"."""
    if mode in ("m", "sm"):
        return mode, None
    hit = re.fullmatch(r"wtt\((\d+)\)", mode)
    if hit:
        n = int(hit.group(1))
        if n < 1:
            raise ValueError("wtt truncation must be >= 1")
        return "wtt", n
    raise ValueError(f"unknown reduction mode {mode!r}")


def preorder_matrix(
    family: list[SearchProblem], table: SubcatTable, mode: str = "m"
) -> list[list[Cell]]:
    """matrix[i][j] = whether family[i] reduces to family[j] over the table.

    Cells the oracle cannot settle at the table's universe depth are None,
    never a silent False.
    """
    kind, trunc = parse_mode(mode)
    targets = (
        family if kind != "wtt" else [rel.star_trunc(g, trunc) for g in family]
    )
    # one saturation pass covering every decidable cell
    wanted: list = []
    for f in family:
        for g in targets:
            objs = [f.src, f.dst, g.src, g.dst]
            if kind != "sm":
                objs.append(Prod(f.src, g.dst))
            if all(table.universe.contains(o) for o in objs):
                wanted += query_cells(f, g, table, "m" if kind == "wtt" else kind)
    table.prefetch(wanted)
    out: list[list[Cell]] = []
    for f in family:
        row: list[Cell] = []
        for g in family:
            try:
                if kind == "wtt":
                    verdict = wtt_leq(f, g, table, trunc)
                else:
                    verdict = decide(f, g, table, kind)
                row.append(bool(verdict))
            except UndecidableHereError:
                row.append(None)
        out.append(row)
    return out


def _require_preorder(matrix: list[list[Cell]]) -> None:
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise MatrixError("matrix is not square")
    for i in range(n):
        for j in range(n):
            if matrix[i][j] is None:
                raise MatrixError(f"cell ({i},{j}) is undecided")
    for i in range(n):
        if not matrix[i][i]:
            raise MatrixError(f"matrix is not reflexive at {i}")
    for i in range(n):
        for j in range(n):
            if not matrix[i][j]:
                continue
            for k in range(n):
                if matrix[j][k] and not matrix[i][k]:
                    raise MatrixError(
                        f"matrix is not transitive: {i}<={j}<={k} but not {i}<={k}"
                    )


def degree_classes(matrix: list[list[Cell]]) -> list[tuple[int, ...]]:
    """Mutual-reducibility blocks of a reflexive transitive matrix.

    Classes are listed in order of their smallest member index.
    """
    _require_preorder(matrix)
    n = len(matrix)
    seen: set[int] = set()
    classes: list[tuple[int, ...]] = []
    for i in range(n):
        if i in seen:
            continue
        block = tuple(j for j in range(n) if matrix[i][j] and matrix[j][i])
        seen.update(block)
        classes.append(block)
    return classes


def hasse(
    classes: list[tuple[int, ...]], matrix: list[list[Cell]]
) -> list[tuple[int, int]]:
    """Cover edges (lower, upper) of the quotient order, by class index."""
    _require_preorder(matrix)
    reps = [block[0] for block in classes]
    n = len(classes)
    lt = [
        [bool(matrix[reps[a]][reps[b]]) and a != b for b in range(n)]
        for a in range(n)
    ]
    edges = []
    for a in range(n):
        for b in range(n):
            if lt[a][b] and not any(lt[a][c] and lt[c][b] for c in range(n)):
                edges.append((a, b))
    return edges


# --- lattice verification --------------------------------------------------------


@dataclass(frozen=True)
class LatticeFinding:
    check: str  # e.g. "sup-upper", "sup-least", "inf-lower", "inf-greatest", "distrib"
    subjects: tuple[str, ...]
    evidence: str  # "cert" | "oracle"
    holds: Optional[bool]  # None when the universe is too shallow to decide
    detail: str = ""


def _cert_finding(
    check: str, subjects: tuple[str, ...], build, env: TermEnv
) -> LatticeFinding:
    try:
        cert = build()
        check_cert(cert, env)
        return LatticeFinding(check, subjects, "cert", True)
    except (CertTypeError, CombinatorError, ValueError) as err:
        return LatticeFinding(check, subjects, "cert", False, str(err))


def _oracle_finding(
    check: str,
    subjects: tuple[str, ...],
    f: SearchProblem,
    g: SearchProblem,
    table: SubcatTable,
) -> LatticeFinding:
    try:
        verdict = decide(f, g, table, "m")
        return LatticeFinding(check, subjects, "oracle", bool(verdict))
    except UndecidableHereError as err:
        return LatticeFinding(check, subjects, "oracle", None, str(err))


def verify_lattice(
    named: list[tuple[str, SearchProblem]],
    table: SubcatTable,
    env: Optional[TermEnv] = None,
    distributivity: bool = True,
) -> list[LatticeFinding]:
    """Check the lattice laws within the family; see LatticeFinding.

    For every pair: both members sit below their coproduct and above their
    pairing, the coproduct is below every common family upper bound, and
    the pairing is above every common family lower bound.  Each law is
    checked twice where possible: by certificate construction (globally
    valid) and by the exhaustive oracle (relative to the table).
    """
    if env is None:
        env = TermEnv(table.ctx, dict(named))
    findings: list[LatticeFinding] = []

    # one saturation pass covering every decidable oracle query below
    probs = [p for _, p in named]
    extras: list[SearchProblem] = []
    for i in range(len(probs)):
        for j in range(i, len(probs)):
            extras.append(rel.coproduct_m(probs[i], probs[j]))
            extras.append(rel.oplus(probs[i], probs[j]))
    # only member-vs-member and member-vs-bound cells are ever queried
    wanted: set = set()
    for f, g in [(a, b) for a in probs for b in probs] + [
        (a, b) for a in probs for b in extras
    ] + [(a, b) for a in extras for b in probs]:
        objs = [f.src, f.dst, g.src, g.dst, Prod(f.src, g.dst)]
        if all(table.universe.contains(o) for o in objs):
            wanted.update(
                o for o in objs if table.ctx.size(o) <= table.closure_cap
            )
    table.demand(wanted)

    # cache pairwise oracle verdicts among family members for bound scans
    verdicts: dict[tuple[int, int], Optional[OracleVerdict]] = {}

    def leq(i: int, j: int) -> Optional[OracleVerdict]:
        if (i, j) not in verdicts:
            try:
                verdicts[(i, j)] = decide(named[i][1], named[j][1], table, "m")
            except UndecidableHereError:
                verdicts[(i, j)] = None
        return verdicts[(i, j)]

    n = len(named)
    for i in range(n):
        for j in range(i, n):
            ni, fi = named[i]
            nj, fj = named[j]
            pair = (ni, nj)
            sup = rel.coproduct_m(fi, fj)
            inf = rel.oplus(fi, fj)

            for idx, name in ((0, ni), (1, nj)):
                findings.append(
                    _cert_finding(
                        "sup-upper",
                        (name, f"{ni}|_|{nj}"),
                        lambda idx=idx: sm_to_m(
                            sup_inj_cert([fi, fj], idx, env), env
                        ),
                        env,
                    )
                )
                findings.append(
                    _oracle_finding(
                        "sup-upper",
                        (name, f"{ni}|_|{nj}"),
                        [fi, fj][idx],
                        sup,
                        table,
                    )
                )
                findings.append(
                    _cert_finding(
                        "inf-lower",
                        (f"{ni}(+){nj}", name),
                        lambda idx=idx: sm_to_m(
                            inf_proj_cert(fi, fj, idx + 1, env), env
                        ),
                        env,
                    )
                )
                findings.append(
                    _oracle_finding(
                        "inf-lower",
                        (f"{ni}(+){nj}", name),
                        inf,
                        [fi, fj][idx],
                        table,
                    )
                )

            for k in range(n):
                nk, fk = named[k]
                up_i, up_j = leq(i, k), leq(j, k)
                if up_i and up_j:
                    findings.append(
                        _cert_finding(
                            "sup-least",
                            (f"{ni}|_|{nj}", nk),
                            lambda up_i=up_i, up_j=up_j: sup_univ_cert(
                                up_i.cert, up_j.cert, env
                            ),
                            env,
                        )
                    )
                    findings.append(
                        _oracle_finding(
                            "sup-least", (f"{ni}|_|{nj}", nk), sup, fk, table
                        )
                    )
                low_i, low_j = leq(k, i), leq(k, j)
                if low_i and low_j:
                    findings.append(
                        _cert_finding(
                            "inf-greatest",
                            (nk, f"{ni}(+){nj}"),
                            lambda low_i=low_i, low_j=low_j: inf_univ_cert(
                                low_i.cert, low_j.cert, env
                            ),
                            env,
                        )
                    )
                    findings.append(
                        _oracle_finding(
                            "inf-greatest", (nk, f"{ni}(+){nj}"), fk, inf, table
                        )
                    )

    if distributivity:
        for a in range(n):
            for i in range(n):
                for j in range(i, n):
                    na, fa = named[a]
                    ni, fi = named[i]
                    nj, fj = named[j]
                    subjects = (na, ni, nj)

                    def both() -> ReductionCert:
                        d1, d2 = distrib_cert(fa, fi, fj, env)
                        check_cert(d1, env)
                        return d2

                    findings.append(
                        _cert_finding("distrib", subjects, both, env)
                    )
    return findings


# --- report assembly and DOT output ----------------------------------------------


@dataclass(frozen=True)
class DegreeReport:
    problems: tuple[tuple[str, SearchProblem], ...]
    mode: str
    matrix: tuple[tuple[Cell, ...], ...]
    classes: tuple[tuple[int, ...], ...]
    hasse: tuple[tuple[int, int], ...]
    lattice_findings: tuple[LatticeFinding, ...]
    universe_depth: int


def degree_report(
    named: list[tuple[str, SearchProblem]],
    table: SubcatTable,
    mode: str = "m",
    lattice: bool = False,
) -> DegreeReport:
    family = [p for _, p in named]
    matrix = preorder_matrix(family, table, mode)
    classes = degree_classes(matrix)
    edges = hasse(classes, matrix)
    findings = (
        tuple(verify_lattice(named, table)) if lattice else ()
    )
    return DegreeReport(
        problems=tuple(named),
        mode=mode,
        matrix=tuple(tuple(row) for row in matrix),
        classes=tuple(classes),
        hasse=tuple(edges),
        lattice_findings=findings,
        universe_depth=table.universe.depth,
    )


def hasse_dot(report: DegreeReport) -> str:
    """Deterministic DOT rendering of the quotient order's cover relation.

    One node per class labeled with its member names; edges point from the
    lower class to its covers.  rankdir=BT places minimal classes lowest.
    """
    names = [name for name, _ in report.problems]
    lines = ["digraph degrees {", "  rankdir=BT;"]
    for ci, block in enumerate(report.classes):
        label = ", ".join(names[i] for i in block)
        lines.append(f'  c{ci} [label="{label}"];')
    for lo, hi in report.hasse:
        lines.append(f"  c{lo} -> c{hi};")
    lines.append("}")
    return "\n".join(lines) + "\n"
