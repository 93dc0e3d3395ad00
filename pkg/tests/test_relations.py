from fractions import Fraction

import pytest

from tetracore.combinatorics import all_edges, edges_of_rank, gamma_pairs, symmetry_group
from tetracore.config import normalize, sample_config
from tetracore.exact import SparsePoly
from tetracore.relations import (
    CUBIC,
    LINEAR,
    QUARTIC,
    Jacobian,
    Relation,
    canonical_key,
    family_counts,
    incidence_component_check,
    shares_denominator,
    symbolic_identity_check,
    u_edge_jacobian_rank,
    u_relations,
    verify_vanishing,
    xvar,
    yvar,
    z_relations,
)


@pytest.fixture(scope="module")
def charts():
    return [normalize(c) for c in sample_config(3, 20)]


def test_u_family_counts():
    counts = family_counts(u_relations())
    assert counts[LINEAR] == 16
    assert counts[CUBIC] > 0 and counts[QUARTIC] > 0


def test_z_linear_count():
    assert family_counts(z_relations())[LINEAR] == 32
    assert family_counts(z_relations(extended=False))[LINEAR] == 32


def test_generators_are_binomials_or_linear():
    for r in u_relations() + z_relations():
        assert len(r.poly.terms) in (2, 3)
        if r.family != LINEAR:
            assert len(r.poly.terms) == 2
            assert sorted(r.poly.terms.values()) == [-1, 1]


def test_z_relations_are_multihomogeneous():
    for r in z_relations():
        degrees = []
        for m in r.poly.terms:
            per_face: dict = {}
            for v, e in m:
                per_face[v[2]] = per_face.get(v[2], 0) + e
            degrees.append(per_face)
        assert all(d == degrees[0] for d in degrees)


def test_u_relations_vanish_on_samples(charts):
    assert verify_vanishing(u_relations(), [c.edge_assignment() for c in charts]).ok


def test_z_relations_vanish_on_canonical_lifts(charts):
    pts = [{yvar(e, f): c.x[e] for e, f in gamma_pairs()} for c in charts]
    assert verify_vanishing(z_relations(), pts).ok


def test_perturbed_point_is_caught(charts):
    pt = dict(charts[0].edge_assignment())
    e = next(iter(edges_of_rank(1)))
    pt[xvar(e)] += 1
    assert not verify_vanishing(u_relations(), [pt]).ok


def _flip_one_term(r: Relation) -> Relation:
    (m, c), *rest = r.poly.terms.items()
    return Relation(SparsePoly({m: -c, **dict(rest)}), r.family, r.level)


@pytest.mark.parametrize("family", [LINEAR, "quadric_rotated", CUBIC, QUARTIC])
def test_sign_flipped_generator_fails(family, charts):
    r = next(r for r in u_relations() if r.family == family)
    bad = _flip_one_term(r)
    assert any(bad.evaluate(c.edge_assignment()) for c in charts)
    assert not symbolic_identity_check(bad, "probabilistic", trials=5)
    assert not symbolic_identity_check(bad, "exact")


def test_probabilistic_identity_check_accepts_generators():
    for r in u_relations():
        assert symbolic_identity_check(r, "probabilistic", trials=3, seed=7)


def test_cubic_and_quartic_share_denominators():
    for r in u_relations():
        if r.family in (CUBIC, QUARTIC):
            assert shares_denominator(r)


def test_identity_check_rejects_z_relations():
    with pytest.raises(ValueError):
        symbolic_identity_check(z_relations()[0])


def test_u_jacobian_rank(charts):
    assert all(u_edge_jacobian_rank(c.x) == 18 for c in charts[:5])


def test_incidence_components():
    report = incidence_component_check()
    assert set(report) == {"E2", "E1+E3"}
    for entry in report.values():
        assert entry["linear_quadric_nonvanishing"] == []
    assert any(entry["higher_nonvanishing"] for entry in report.values())


@pytest.mark.parametrize("extended", [True, False])
def test_relation_sets_are_symmetric(extended):
    rels = z_relations(extended)
    keys = {canonical_key(r.poly) for r in rels}
    for g in symmetry_group():
        sub = {}
        for e, f in gamma_pairs():
            e2, s = g.oriented_edge(e)
            sub[yvar(e, f)] = SparsePoly.var(yvar(e2, g.face(f))) * SparsePoly.const(s)
        assert all(canonical_key(r.poly.substitute(sub)) in keys for r in rels)


def test_u_relation_set_is_symmetric():
    rels = u_relations()
    keys = {canonical_key(r.poly) for r in rels}
    for g in symmetry_group():
        sub = {}
        for e in all_edges():
            e2, s = g.oriented_edge(e)
            sub[xvar(e)] = SparsePoly.var(xvar(e2)) * SparsePoly.const(s)
        assert all(canonical_key(r.poly.substitute(sub)) in keys for r in rels)


def test_literal_set_is_contained_in_extended_set():
    ext = {canonical_key(r.poly) for r in z_relations()}
    assert {canonical_key(r.poly) for r in z_relations(extended=False)} <= ext


def test_exports():
    r = u_relations()[0]
    assert r.to_text().count("x_") == 3
    data = r.to_json()
    assert data["family"] == LINEAR and len(data["terms"]) == 3


def test_jacobian_skips_rows_without_chart_variables(charts):
    jac = Jacobian(u_relations())
    assert jac.rank([], charts[0].edge_assignment()) == 0
