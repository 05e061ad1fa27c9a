from searchdeg import laws


class TestLawSuite:
    def test_default_suite_passes(self):
        report = laws.check_laws(seed=7, cases=60, max_atom_size=3)
        assert report.ok
        assert all(r.cases > 0 for r in report.results)

    def test_seed_stability(self):
        a = laws.check_laws(seed=11, cases=30, max_atom_size=2)
        b = laws.check_laws(seed=11, cases=30, max_atom_size=2)
        assert [(r.name, r.cases, r.failures) for r in a.results] == [
            (r.name, r.cases, r.failures) for r in b.results
        ]

    def test_expected_laws_present(self):
        report = laws.check_laws(seed=0, cases=5, max_atom_size=2)
        names = {r.name for r in report.results}
        # the core product equations plus the interaction and compatibility laws
        assert "(f2 x g2).(f1 x g1) = (f2.f1 x g2.g1)" in names
        assert any("pi1.(f x g).delta" in n for n in names)
        assert any("pi2.(f x g).delta" in n for n in names)
        assert "dom(nabla) = id" in names
        assert "dom(in1) = id" in names and "dom(in2) = id" in names
        assert "coproduct-diagonal identity" in names
        assert any(n.startswith("compat:") for n in names)
