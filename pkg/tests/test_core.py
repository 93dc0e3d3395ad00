from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tetracore.combinatorics import SymmetryElement, edge_rank, all_faces, edges_of_rank, symmetry_group
from tetracore.config import NormalizedChart, normalize, sample_config
from tetracore.core import (
    CHART_DIMENSION,
    CCSTAR_OPD,
    DDE,
    CorePoint,
    RelationViolation,
    ZeroPattern,
    allowed_related_patterns,
    catalog_json,
    census,
    core_from_chart,
    default_chart,
    enumerate_special,
    jacobian_certificate,
    jacobian_rank,
    match_against_catalog,
    propagation_bound,
    records_from_json,
    related_pattern_violations,
    triangle_pattern,
)


@pytest.fixture(scope="module")
def catalog():
    return enumerate_special()


@pytest.fixture(scope="module")
def lift():
    return core_from_chart(normalize(sample_config(1, 1)[0]))


def test_lift_satisfies_relations_and_has_no_zeros(lift):
    assert lift.violations() == []
    assert all(p == "none" for _, p in lift.zero_pattern().triangles)
    assert related_pattern_violations(lift) == []


def test_degenerate_chart_rejected():
    chart = normalize(sample_config(1, 1)[0])
    e = next(iter(chart.x))
    with pytest.raises(ValueError):
        core_from_chart(NormalizedChart(chart.f, chart.flag, {**chart.x, e: Fraction(0)}))


@given(st.fractions(min_value=-5, max_value=5), st.fractions(min_value=-5, max_value=5), st.fractions(min_value=-5, max_value=5))
def test_rank_rescaling_leaves_core_point_unchanged(c1, c2, c3):
    scales = {1: c1, 2: c2, 3: c3}
    if not all(scales.values()):
        return
    chart = normalize(sample_config(1, 1)[0])
    scaled = {e: v * scales[edge_rank(e)] for e, v in chart.x.items()}
    assert core_from_chart(NormalizedChart(chart.f, chart.flag, scaled)) == core_from_chart(chart)


def test_corepoint_json_roundtrip(lift):
    assert CorePoint.from_json(lift.to_json()) == lift


def test_zero_face_rejected(lift):
    vectors = lift.vectors
    vectors["D1"] = (0,) * 6
    with pytest.raises(ValueError):
        CorePoint.from_face_vectors(vectors)


def test_triangle_patterns():
    assert triangle_pattern([1, 2, 1]) == "none"
    assert triangle_pattern([0, 1, 1]) == 0
    assert triangle_pattern([0, 0, 0]) == "all"
    with pytest.raises(ValueError):
        triangle_pattern([0, 0, 1])


def test_five_related_patterns():
    pats = allowed_related_patterns()
    assert len(pats) == 5
    assert "one/one" in pats


def test_lift_certificate(lift):
    cert = jacobian_certificate(lift)
    assert cert.corank == 3 and cert.verdict == "Smooth"
    assert cert.jacobian_rank == CHART_DIMENSION - 3


def test_certificate_refuses_non_points(lift):
    vectors = lift.vectors
    vectors["D1"] = tuple(v + i for i, v in enumerate(vectors["D1"]))
    with pytest.raises(RelationViolation):
        jacobian_certificate(CorePoint.from_face_vectors(vectors))


def test_lift_has_no_catalog_match(lift, catalog):
    assert match_against_catalog(lift, catalog) is None


def test_census(catalog):
    summary = census(catalog)
    assert summary["isolated"] == 66 and summary["families"] == 4


def test_catalog_closed_under_symmetry(catalog):
    points = {z.faces for r in catalog if r.dimension == 0 for z in r.representatives}
    for g in symmetry_group():
        for r in catalog:
            if r.dimension == 0:
                assert all(z.apply(g).faces in points for z in r.representatives)


def test_every_special_point_conforms_to_related_patterns(catalog):
    for r in catalog:
        for z in r.representatives:
            assert related_pattern_violations(z) == []
            assert z.violations() == []


def test_permuted_dde_matches_dde(catalog):
    dde = next(r for r in catalog if r.type_label == DDE)
    z = dde.representatives[0].apply(SymmetryElement((2, 3, 4, 1), False))
    assert match_against_catalog(z, catalog).type_label == DDE


def test_family_points_match_family_record(catalog):
    fam = next(r for r in catalog if r.type_label == CCSTAR_OPD)
    z = fam.family.point_at(Fraction(5, 7))
    assert match_against_catalog(z, catalog) is fam
    assert len(fam.family.closure_points()) == 3


def test_chart_choice_does_not_change_rank(catalog):
    for r in catalog:
        z = r.representatives[0]
        assert jacobian_rank(z, default_chart(z)) == jacobian_rank(z, default_chart(z, last=True))


def test_propagation_never_below_corank(catalog):
    for r in catalog:
        z = r.representatives[0]
        corank = CHART_DIMENSION - jacobian_rank(z)
        bound = propagation_bound(z, shape_relations=r.dimension == 1)
        assert bound is None or bound >= corank


def test_catalog_json_roundtrip(catalog):
    loaded = records_from_json(catalog_json(catalog))
    assert [r.type_label for r in loaded] == [r.type_label for r in catalog]
    assert all(a.representatives == b.representatives for a, b in zip(loaded, catalog))
