from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from tetracore.exact import (
    SparsePoly,
    UniPoly,
    UniRat,
    determinant,
    format_rat,
    inverse,
    leading_at_order,
    mat_mul,
    rank,
    rank_and_kernel,
    rank_by_columns,
    rat,
)

small = st.integers(-5, 5)
matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r))
)


@given(matrices)
def test_bareiss_rank_matches_independent_elimination(m):
    assert rank(m) == rank_by_columns(m)


@given(matrices)
def test_kernel_vectors_are_annihilated_and_complete(m):
    r, kernel = rank_and_kernel(m)
    ncols = len(m[0])
    assert r + len(kernel) == ncols
    for v in kernel:
        assert all(sum(Fraction(a) * b for a, b in zip(row, v)) == 0 for row in m)
    assert rank(kernel, ncols) == len(kernel) if kernel else True


def test_rank_of_fraction_rows():
    rows = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(3), Fraction(2)]]
    assert rank(rows) == 1


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_roundtrip(m):
    if determinant(m) == 0:
        return
    prod = mat_mul(m, inverse(m))
    assert prod == [[int(i == j) for j in range(3)] for i in range(3)]


def test_rational_strings_roundtrip():
    for q in (Fraction(0), Fraction(-7, 3), Fraction(5)):
        assert rat(format_rat(q)) == q
    assert format_rat(Fraction(4, 2)) == "2"


@given(st.lists(small, max_size=4), st.lists(small, max_size=4), st.integers(-3, 3))
def test_unipoly_product_evaluates_pointwise(a, b, t):
    p, q = UniPoly(a), UniPoly(b)
    assert (p * q)(t) == p(t) * q(t)
    assert (p + q)(t) == p(t) + q(t)


def test_unirat_order_and_leading_term():
    t = UniPoly.monomial(1, 1)
    r = UniRat(t * t * 3 + t * t * t, t * 2)
    assert r.order == 1
    assert r.leading == Fraction(3, 2)
    vec = [UniRat(t * 4), UniRat(t * t), UniRat(UniPoly([0, -2, 5]))]
    assert leading_at_order(vec) == [4, 0, -2]


polys = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2)),
    st.integers(-4, 4),
    max_size=4,
)


def _poly(d):
    out = SparsePoly()
    for (i, j), c in d.items():
        out = out + SparsePoly.monomial(c, {"a": i, "b": j})
    return out


@settings(max_examples=60)
@given(polys, polys, st.integers(-3, 3), st.integers(-3, 3))
def test_sparse_poly_ring_operations_commute_with_evaluation(d1, d2, a, b):
    p, q = _poly(d1), _poly(d2)
    pt = {"a": Fraction(a), "b": Fraction(b)}
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)


@settings(max_examples=60)
@given(polys, polys)
def test_sparse_poly_product_rule(d1, d2):
    p, q = _poly(d1), _poly(d2)
    assert (p * q).derivative("a") == p.derivative("a") * q + p * q.derivative("a")


def test_sparse_poly_substitution_and_degree():
    a, b = SparsePoly.var("a"), SparsePoly.var("b")
    p = a * a * b - b
    assert p.degree == 3
    assert p.substitute({"b": a + SparsePoly.const(1)}) == a * a * a + a * a - a - SparsePoly.const(1)
    assert (p - p).is_zero()
