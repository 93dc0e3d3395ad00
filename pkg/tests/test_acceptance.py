"""Acceptance criteria, one test per criterion; a summary line per criterion is printed at the end of the run."""

import time
from fractions import Fraction

import pytest

from tetracore import core
from tetracore.combinatorics import all_edges, all_faces, edge_rank, gamma_components, gamma_pairs, triangle_faces
from tetracore.config import minimal_split_search, normalize, sample_config, sample_matrices
from tetracore.relations import (
    CUBIC,
    QUARTIC,
    incidence_component_check,
    symbolic_identity_check,
    u_edge_jacobian_rank,
    u_relations,
    verify_vanishing,
    yvar,
    z_relations,
)


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _det3(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


@pytest.mark.criterion(1, "combinatorial census")
def test_combinatorial_census():
    with Clock() as clock:
        edges = all_edges()
        by_rank = [sum(edge_rank(e) == k for e in edges) for k in (1, 2, 3)]
        faces = all_faces()
        pairs = gamma_pairs()
        components = gamma_components()
    assert len(edges) == 24 and by_rank == [6, 12, 6]
    assert len(faces) == 19 and len(triangle_faces()) == 16
    assert len(pairs) == 72
    assert len(components) == 19
    assert clock.elapsed < 1


@pytest.mark.criterion(2, "relation soundness")
def test_relation_soundness():
    with Clock() as clock:
        charts = [normalize(c) for c in sample_config(2024, 100)]
        u_report = verify_vanishing(u_relations(), [c.edge_assignment() for c in charts])
        lifts = [{yvar(e, f): c.x[e] for e, f in gamma_pairs()} for c in charts]
        z_report = verify_vanishing(z_relations(), lifts)
    assert u_report.checked == 100 * len(u_relations()) and u_report.ok
    assert z_report.checked == 100 * len(z_relations()) and z_report.ok
    assert clock.elapsed < 30


@pytest.mark.slow
@pytest.mark.criterion(3, "symbolic identity of U-level generators")
def test_symbolic_identity():
    with Clock() as clock:
        verdicts = [symbolic_identity_check(r, mode="exact") for r in u_relations()]
    families = {r.family for r in u_relations()}
    assert {CUBIC, QUARTIC} <= families
    assert all(verdicts)
    assert clock.elapsed < 600


@pytest.mark.criterion(4, "dimension checks")
def test_dimension_checks():
    with Clock() as clock:
        charts = [normalize(c) for c in sample_config(7, 10)]
        u_ranks = [u_edge_jacobian_rank(c.x) for c in charts]
        coranks = [core.CHART_DIMENSION - core.jacobian_rank(core.core_from_chart(c)) for c in charts]
    assert u_ranks == [18] * 10
    assert coranks == [3] * 10
    assert clock.elapsed < 60


@pytest.mark.criterion(5, "special-locus census")
def test_special_locus_census():
    core._raw_special.cache_clear()
    core.enumerate_special.cache_clear()
    with Clock() as clock:
        records = core.enumerate_special()
    summary = core.census(records)
    assert summary["isolated"] == 66
    assert summary["families"] == 4
    assert summary["orbits"] == {core.DDE: 6, core.CDE: 24, core.CCSTAR_E: 24, core.CCSTAR_NOPD: 12, core.CCSTAR_OPD: 4}
    fam_record = next(r for r in records if r.type_label == core.CCSTAR_OPD)
    families = core._orbit_families(fam_record)
    assert len(families) == 4
    for fam in families:
        assert fam.ambient_dimension == 2
        # shape parameter u of a triangle face with shape (1, 1+u, u)
        shapes = []
        for t in (Fraction(-1), Fraction(1, 3), Fraction(2), Fraction(5, 7)):
            z = fam.point_at(t)
            vecs = [z.vectors[name] for name in fam.ambient]
            shapes.append(tuple(v[2] / v[0] for v in vecs))
        assert len(set(shapes)) == len(shapes)
        assert all(_det3([(a, b, 1) for a, b in (shapes[0], shapes[1], s)]) == 0 for s in shapes[2:])
    assert clock.elapsed < 120


@pytest.mark.criterion(6, "nonsingularity at every special point")
def test_main_theorem():
    records = core.enumerate_special()
    with Clock() as clock:
        isolated = [(z, False) for r in records if r.dimension == 0 for z in r.representatives]
        fam_record = next(r for r in records if r.dimension == 1)
        on_curves = [(z, True) for z in fam_record.representatives]
        certificates = [core.jacobian_certificate(z, shape_relations=shape) for z, shape in isolated + on_curves]
    assert len(isolated) == 66
    families = core._orbit_families(fam_record)
    per_family = [sum(f.contains(z) for z, _ in on_curves) for f in families]
    assert all(n >= 3 for n in per_family)
    assert all(c.corank == 3 and c.verdict == "Smooth" for c in certificates)
    bounds = [c.propagation_bound for c in certificates]
    assert all(b is None or b == c.corank for b, c in zip(bounds, certificates))
    assert all(b == 3 for b in bounds)
    assert clock.elapsed < 120


@pytest.mark.criterion(7, "degeneration cross-check")
def test_degeneration_cross_check():
    catalog = core.enumerate_special()
    with Clock() as clock:
        results = []
        for seed in range(1, 6):
            g = sample_matrices(seed, 1)[0]
            d = minimal_split_search(g, seed)
            results.append((d, core.match_against_catalog(d.core_limit, catalog)))
    for d, match in results:
        assert d.split == (2, 2, 2)
        assert d.core_limit.violations() == []
        assert match is not None
    assert clock.elapsed < 60


@pytest.mark.criterion(8, "incidence components")
def test_incidence_components():
    with Clock() as clock:
        report = incidence_component_check()
    assert set(report) == {"E2", "E1+E3"}
    for entry in report.values():
        assert entry["free_dimension"] > 0
        assert entry["linear_quadric_nonvanishing"] == []
    assert clock.elapsed < 1


@pytest.mark.criterion(9, "five related-triangle patterns")
def test_five_patterns():
    records = core.enumerate_special()
    with Clock() as clock:
        patterns = core.allowed_related_patterns()
        violations = [v for r in records for z in r.representatives for v in core.related_pattern_violations(z)]
    assert len(patterns) == 5
    assert violations == []
    assert clock.elapsed < 1
