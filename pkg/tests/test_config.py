from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tetracore.combinatorics import SUBSETS, all_edges, mask
from tetracore.config import (
    GeneralPositionError,
    OneParamWeights,
    SingularMatrixError,
    TetraConfig,
    block_partition,
    config_from_matrix,
    configs_to_json,
    degenerate_and_limit,
    degeneration_curve,
    is_general_position,
    lemma_residuals,
    minimal_split_search,
    normalize,
    parse_split,
    projectively_equal,
    reconstruct_chart,
    sample_config,
    sample_matrices,
    split_counts,
    split_types,
)
from tetracore.exact import determinant

entries = st.integers(-20, 20)
matrix = st.lists(st.lists(entries, min_size=4, max_size=4), min_size=4, max_size=4)


def test_sampling_is_deterministic_and_general():
    a = sample_config(1, 100)
    assert len(a) == 100
    assert all(is_general_position(c) for c in a)
    assert configs_to_json(sample_config(1, 5)) == configs_to_json(a[:5])


def test_sampling_records_rejections():
    stats: dict = {}
    sample_config(1, 20, stats=stats)
    assert stats["accepted"] == 20
    assert {"singular", "not_general", "zero_edge"} <= stats.keys()


def test_first_sample_has_no_vanishing_edge():
    chart = normalize(sample_config(1, 1)[0])
    assert all(chart.x[e] != 0 for e in all_edges())


def test_identity_matrix_is_not_in_general_position():
    c = config_from_matrix([[int(i == j) for j in range(4)] for i in range(4)])
    assert not is_general_position(c)
    with pytest.raises(GeneralPositionError):
        normalize(c)


def test_singular_matrix_rejected():
    with pytest.raises(SingularMatrixError):
        config_from_matrix([[1, 2, 3, 4]] * 4)


@settings(max_examples=40, deadline=None)
@given(matrix)
def test_chart_roundtrip_and_section_identity(g):
    assume(determinant(g) != 0)
    c = config_from_matrix(g)
    assume(is_general_position(c))
    chart = normalize(c)
    assert all(not any(v) for v in lemma_residuals(chart.f, chart.x).values())
    again = reconstruct_chart(chart.flag, chart.x)
    assert again.f == chart.f


@settings(max_examples=25, deadline=None)
@given(matrix, st.permutations([1, 2, 3, 4]))
def test_relabelling_matches_column_permutation(g, perm):
    assume(determinant(g) != 0)
    c = config_from_matrix(g)
    # column i of the permuted matrix is column perm^-1(i) of g
    inv = {perm[i]: i for i in range(4)}
    h = [[row[inv[j + 1]] for j in range(4)] for row in g]
    d = config_from_matrix(h)
    r = c.relabel(perm)
    assert all(projectively_equal(r.plueckers[s], d.plueckers[s]) for s in SUBSETS)


def test_config_json_roundtrip():
    c = sample_config(2, 1)[0]
    assert TetraConfig.from_json(c.to_json()).plueckers == c.plueckers


def test_zero_weights_fix_the_configuration():
    c = sample_config(1, 1)[0]
    d = degenerate_and_limit(c, OneParamWeights((0, 0, 0, 0)))
    assert all(projectively_equal(d.limit.plueckers[s], c.plueckers[s]) for s in SUBSETS)
    assert d.split == (4, 6, 4)


def test_curve_at_one_is_the_seed():
    g = sample_matrices(1, 1)[0]
    c = config_from_matrix(g)
    curve = degeneration_curve(c, OneParamWeights((0, 1, 2, 3)), [[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]])
    assert all(projectively_equal(curve.at(1).plueckers[s], c.plueckers[s]) for s in SUBSETS)


def test_one_dominant_weight_collapses_lines():
    c = sample_config(1, 1)[0]
    d = degenerate_and_limit(c, OneParamWeights((0, 1, 1, 1)))
    assert d.split[0] == 1


def test_split_parsing():
    assert parse_split("31,51,22") == ((3, 1), (5, 1), (2, 2))
    assert parse_split("13,15,22") == ((3, 1), (5, 1), (2, 2))
    with pytest.raises(ValueError):
        parse_split("31,51")
    with pytest.raises(ValueError):
        parse_split("31,33,31,1")
    with pytest.raises(ValueError):
        parse_split("211,51,22")


def test_minimal_split_search_is_seeded():
    g = sample_matrices(1, 1)[0]
    a = minimal_split_search(g, 0)
    b = minimal_split_search(g, 0)
    assert a.split == (2, 2, 2)
    assert a.weights == b.weights and a.frame == b.frame
    assert sorted(len(b) for b in block_partition(a.limit, 1)) in ([1, 3], [2, 2])
    assert split_types(a.limit)[1] in ((5, 1), (4, 2), (3, 3))
