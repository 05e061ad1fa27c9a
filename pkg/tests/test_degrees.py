import json
import random

import pytest

from searchdeg import rel
from searchdeg.degrees import (
    MatrixError,
    degree_classes,
    degree_report,
    hasse,
    hasse_dot,
    parse_mode,
    preorder_matrix,
    verify_lattice,
)
from searchdeg.objects import AtomContext
from searchdeg.subcat import SubcatTable, build_universe

from .conftest import DATA, PT, X, Y, Z, random_problem

FIXTURE_ORDER = ["empty", "f", "g", "gp", "idpt"]


def _named(fam):
    return [(n, fam[n]) for n in FIXTURE_ORDER]


class TestParseMode:
    def test_accepts_known_modes(self):
        assert parse_mode("m") == ("m", None)
        assert parse_mode("sm") == ("sm", None)
        assert parse_mode("wtt(3)") == ("wtt", 3)

    def test_rejects_unknown(self):
        for bad in ["tt", "wtt", "wtt(0)", "wtt(-1)", "m "]:
            with pytest.raises(ValueError):
                parse_mode(bad)


class TestMatrix:
    def test_matrix_matches_golden_file(self, fam, bare_table):
        golden = json.loads((DATA / "golden_matrix_m.json").read_text())
        assert golden["problems"] == FIXTURE_ORDER
        matrix = preorder_matrix(
            [fam[n] for n in FIXTURE_ORDER], bare_table, "m"
        )
        assert [[bool(c) for c in row] for row in matrix] == golden["matrix"]

    def test_bottom_row_all_true(self, fam, bare_table):
        matrix = preorder_matrix([fam[n] for n in FIXTURE_ORDER], bare_table, "m")
        assert all(matrix[0])

    def test_classes_and_hasse(self, fam, bare_table):
        matrix = preorder_matrix([fam[n] for n in FIXTURE_ORDER], bare_table, "m")
        classes = degree_classes(matrix)
        assert classes == [(0,), (1, 2, 4), (3,)]
        assert hasse(classes, matrix) == [(0, 1), (1, 2)]

    def test_degree_classes_rejects_undecided(self):
        with pytest.raises(MatrixError):
            degree_classes([[True, None], [False, True]])
        with pytest.raises(MatrixError):
            degree_classes([[True, True], [True]])


class TestReport:
    def test_report_and_dot(self, fam, bare_table):
        report = degree_report(_named(fam), bare_table, mode="m")
        assert report.classes == ((0,), (1, 2, 4), (3,))
        dot = hasse_dot(report)
        assert dot.startswith("digraph degrees {")
        assert '"empty"' in dot and '"f, g, idpt"' in dot
        assert dot == hasse_dot(report)  # deterministic

    def test_report_carries_depth(self, fam, bare_table):
        report = degree_report(_named(fam), bare_table, mode="m")
        assert report.universe_depth == bare_table.universe.depth


class TestLattice:
    def test_fixture_lattice_holds(self, fam, bare_table):
        findings = verify_lattice(_named(fam), bare_table)
        assert findings
        assert all(f.holds for f in findings)
        checks = {f.check for f in findings}
        assert {"sup-upper", "sup-least", "inf-lower",
                "inf-greatest", "distrib"} <= checks

    def test_random_families_hold(self, ctx, bare_table):
        # a single shared table keeps the closure warm between families
        rng = random.Random(99)
        for trial in range(5):
            fam = [
                ("p%d" % i, random_problem(rng, ctx, X, Y, density=0.4))
                for i in range(2 + trial % 2)
            ]
            findings = verify_lattice(fam, bare_table, distributivity=False)
            bad = [f for f in findings if f.holds is False]
            assert not bad, bad
