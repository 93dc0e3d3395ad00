"""Points of the core Z, the special locus Z_sp and smoothness certificates.

A core point assigns a value to every incident pair (edge, face) of Gamma,
up to one scale per face.  Faces are exactly the connected components of
Gamma, so normalisation is per face: the first nonzero value (in the face's
edge order) is set to 1.
"""

from __future__ import annotations

import re

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

import sympy as sp

from .combinatorics import (
    Edge,
    Face,
    RelatedPair,
    SymmetryElement,
    all_faces,
    all_related_pairs,
    card,
    edge_label,
    face_by_name,
    gamma_pairs,
    label,
    maximal_face,
    ordered_triangle,
    parse_edge,
    symmetry_group,
    triangle_faces,
)
from .config import NormalizedChart
from .exact import SparsePoly, format_rat, rank, rank_and_kernel, rank_by_columns, rat
from .relations import (
    CUBIC,
    LINEAR,
    QUARTIC,
    Jacobian,
    Relation,
    z_relations,
    yvar,
)

DDE, CDE, CCSTAR_E, CCSTAR_NOPD, CCSTAR_OPD = "DDE", "CDE", "CC*E", "CC*_nopD", "CC*_opD"
TYPE_LABELS = (DDE, CDE, CCSTAR_E, CCSTAR_NOPD, CCSTAR_OPD)
EXPECTED_ORBITS = {DDE: 6, CDE: 24, CCSTAR_E: 24, CCSTAR_NOPD: 12, CCSTAR_OPD: 4}
EXPECTED_ISOLATED = 66
EXPECTED_FAMILIES = 4
FAMILY_SAMPLE_VALUES = (Fraction(-1), Fraction(1, 3), Fraction(2))
CORE_DIMENSION = 3
CHART_DIMENSION = len(gamma_pairs()) - len(all_faces())  # 53


class RelationViolation(ValueError):
    """A candidate core point fails some defining relation."""


# ---------------------------------------------------------------------------
# core points
# ---------------------------------------------------------------------------


def _normalize_face(vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
    lead = next((v for v in vec if v), None)
    if lead is None:
        raise ValueError("a face vector is identically zero")
    return tuple(Fraction(v) / lead for v in vec)


@dataclass(frozen=True)
class CorePoint:
    """Face name -> normalised value vector, in the face's edge order."""

    faces: tuple[tuple[str, tuple[Fraction, ...]], ...]

    @classmethod
    def from_face_vectors(cls, vectors: Mapping[str, Sequence]) -> "CorePoint":
        out = []
        for f in all_faces():
            vec = [rat(v) for v in vectors[f.name]]
            if len(vec) != len(f.edges):
                raise ValueError(f"{f.name}: expected {len(f.edges)} values, got {len(vec)}")
            out.append((f.name, _normalize_face(vec)))
        return cls(tuple(out))

    @classmethod
    def from_values(cls, values: Mapping[tuple[Edge, str], Fraction]) -> "CorePoint":
        return cls.from_face_vectors({f.name: [values[(e, f.name)] for e in f.edges] for f in all_faces()})

    @property
    def vectors(self) -> dict[str, tuple[Fraction, ...]]:
        return dict(self.faces)

    def value(self, e: Edge, face: str) -> Fraction:
        f = face_by_name(face)
        return self.vectors[face][f.edges.index(e)]

    def values(self) -> dict[tuple[Edge, str], Fraction]:
        vec = self.vectors
        return {(e, f.name): vec[f.name][i] for f in all_faces() for i, e in enumerate(f.edges)}

    def assignment(self) -> dict:
        return {yvar(e, f): v for (e, f), v in self.values().items()}

    def support(self) -> frozenset:
        """Incident pairs with nonzero value."""
        return frozenset(k for k, v in self.values().items() if v)

    def zero_pattern(self) -> "ZeroPattern":
        return ZeroPattern.of(self)

    def apply(self, g: SymmetryElement) -> "CorePoint":
        out: dict[tuple[Edge, str], Fraction] = {}
        for (e, f), v in self.values().items():
            e2, s = g.oriented_edge(e)
            out[(e2, g.face(face_by_name(f)).name)] = s * v
        return CorePoint.from_values(out)

    def violations(self, rels: Sequence[Relation] | None = None) -> list[Relation]:
        rels = z_relations() if rels is None else rels
        pt = self.assignment()
        return [r for r in rels if r.evaluate(pt)]

    def to_json(self) -> dict:
        return {
            name: {edge_label(e): format_rat(v) for e, v in zip(face_by_name(name).edges, vec)}
            for name, vec in self.faces
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "CorePoint":
        vectors = {}
        for f in all_faces():
            entries = {parse_edge(k): Fraction(v) for k, v in data[f.name].items()}
            vectors[f.name] = [entries[e] for e in f.edges]
        return cls.from_face_vectors(vectors)


def core_from_chart(c: NormalizedChart) -> CorePoint:
    """Canonical lift y_{alpha,beta} = x_alpha of a nondegenerate chart."""
    zeros = [edge_label(e) for e, v in c.x.items() if not v]
    if zeros:
        raise ValueError(f"degenerate tetrahedron, x vanishes on {zeros}")
    return CorePoint.from_values({(e, f.name): c.x[e] for e, f in gamma_pairs()})


# ---------------------------------------------------------------------------
# zero patterns and related triangles
# ---------------------------------------------------------------------------

NONE, ALL = "none", "all"


def triangle_pattern(values: Sequence[Fraction]) -> str | int:
    """none, all, or the position of the single zero; two zeros cannot satisfy a - b + c = 0."""
    zeros = [i for i, v in enumerate(values) if not v]
    if not zeros:
        return NONE
    if len(zeros) == 3:
        return ALL
    if len(zeros) == 1:
        return zeros[0]
    raise ValueError("two zeros in a triangle contradict the linear relation")


@dataclass(frozen=True)
class ZeroPattern:
    """Pattern of every triangle host plus the zero set on maximal faces."""

    triangles: tuple[tuple[str, str | int], ...]
    maximal_zeros: frozenset  # (edge, face name) with value 0 on Delta_k

    @classmethod
    def of(cls, z: CorePoint) -> "ZeroPattern":
        vals = z.values()
        tris = []
        for p in _hosts():
            tri = p.triangle
            tris.append((p.name, triangle_pattern([vals[(e, p.face.name)] for e in tri.edges])))
        mz = frozenset(k for k, v in vals.items() if not v and face_by_name(k[1]).is_maximal)
        return cls(tuple(tris), mz)

    def partition_types(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_partition_type(k, self.maximal_zeros) for k in (1, 2, 3))

    def to_json(self) -> dict:
        return {
            "triangles": {name: p for name, p in self.triangles},
            "maximal_zeros": sorted(f"{edge_label(e)}@{f}" for e, f in self.maximal_zeros),
            "partition_types": ["".join(map(str, t)) for t in self.partition_types()],
        }


def _hosts():
    from .combinatorics import triangle_hosts

    return triangle_hosts()


def _blocks(k: int, zeros) -> list[frozenset]:
    f = maximal_face(k)
    parent = {v: v for v in f.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e, name in zeros:
        if name == f.name:
            parent[find(e[0])] = find(e[1])
    groups: dict[int, set] = {}
    for v in f.vertices:
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(g) for g in groups.values()), key=lambda g: (-len(g), sorted(g)))


def _partition_type(k: int, zeros) -> tuple[int, ...]:
    return tuple(len(b) for b in _blocks(k, zeros))


def _proportional(u: Sequence, v: Sequence) -> bool:
    return all(u[i] * v[j] == u[j] * v[i] for i in range(len(u)) for j in range(i + 1, len(u)))


def _pattern_class(p, q, corr) -> str | None:
    """Unordered class of a related pair's patterns; None if not one of the allowed shapes."""
    kinds = {p if isinstance(p, str) else "one", q if isinstance(q, str) else "one"}
    if p == NONE and q == NONE:
        return "none/none"
    if p == ALL and q == ALL:
        return "all/all"
    if kinds == {ALL, NONE}:
        return "all/none"
    if kinds == {ALL, "one"}:
        return "all/one"
    if isinstance(p, int) and isinstance(q, int):
        return "one/one" if corr[p][0] == q else None
    return None


@lru_cache(maxsize=None)
def allowed_related_patterns(bound: int = 3) -> tuple[str, ...]:
    """Pattern classes realisable by a related pair, found by exhaustive search.

    Runs over integer triples with a - b + c = 0 and entries in [-bound, bound]
    on both sides, keeps the proportional ones under every signed position
    correspondence that occurs between related triangles, and records the
    resulting pattern pairs.
    """
    triples = [(a, a + c, c) for a in range(-bound, bound + 1) for c in range(-bound, bound + 1) if abs(a + c) <= bound]
    corrs = {p.correspondence for p in all_related_pairs()}
    seen = set()
    for corr in corrs:
        for t in triples:
            for s in triples:
                image = [None] * 3
                for i, (j, sign) in enumerate(corr):
                    image[j] = sign * t[i]
                if not _proportional(image, s):
                    continue
                cls = _pattern_class(triangle_pattern(t), triangle_pattern(s), corr)
                if cls is None:
                    raise AssertionError(f"unexpected proportional pattern {t} ~ {s}")
                seen.add(cls)
    order = ["none/none", "one/one", "all/all", "all/none", "all/one"]
    return tuple(c for c in order if c in seen)


def related_pattern_violations(z: CorePoint) -> list[tuple[RelatedPair, str]]:
    """Related pairs whose triples are not proportional or realise a forbidden pattern."""
    allowed = set(allowed_related_patterns())
    vals = z.values()
    bad = []
    for pair in all_related_pairs():
        a = [vals[(e, pair.first.face.name)] for e in pair.first.triangle.edges]
        b = [vals[(e, pair.second.face.name)] for e in pair.second.triangle.edges]
        image = [None] * 3
        for i, (j, sign) in enumerate(pair.correspondence):
            image[j] = sign * a[i]
        if not _proportional(image, b):
            bad.append((pair, "not proportional"))
            continue
        cls = _pattern_class(triangle_pattern(a), triangle_pattern(b), pair.correspondence)
        if cls not in allowed:
            bad.append((pair, f"pattern {cls}"))
    return bad


# ---------------------------------------------------------------------------
# enumeration of the special locus
# ---------------------------------------------------------------------------


def two_block_zero_sets(k: int) -> list[frozenset]:
    """Zero sets on Delta_k whose zero edges connect the vertices into exactly two blocks."""
    f = maximal_face(k)
    out = []
    vs = f.vertices
    for bits in range(1, 2 ** len(vs) - 1):
        if not bits & 1:
            continue
        block = {v for i, v in enumerate(vs) if bits >> i & 1}
        zeros = frozenset((e, f.name) for e in f.edges if (e[0] in block) == (e[1] in block))
        if len(_blocks(k, zeros)) == 2:
            out.append(zeros)
    return out


def _maximal_face_vector(k: int, zeros) -> dict[Edge, Fraction]:
    """The unique (up to scale) solution of the linear relations on Delta_k with the given zeros."""
    f = maximal_face(k)
    free = [e for e in f.edges if (e, f.name) not in zeros]
    rows = []
    for tri in triangle_faces():
        t = ordered_triangle(tri)
        if tri.rank == k:
            coeff = dict(zip(t.edges, (1, -1, 1)))
            rows.append([Fraction(coeff.get(e, 0)) for e in free])
    _, kernel = rank_and_kernel(rows, len(free))
    if len(kernel) != 1 or not all(kernel[0]):
        raise RelationViolation(f"{f.name}: zero pattern does not determine a point")
    vals = {e: Fraction(0) for e in f.edges}
    vals.update(zip(free, kernel[0]))
    return vals


# Shapes of a triangle face whose maximal host vanishes: the single-zero
# solutions of a - b + c = 0, or the free shape (1, 1 + u, u).
_ONE_ZERO_SHAPES = {0: (0, 1, 1), 1: (1, 0, -1), 2: (1, 1, 0)}


@dataclass
class Family:
    """A rational curve of core points: each face vector is a tuple of sympy expressions in ``t``."""

    parameter: sp.Symbol
    vectors: dict[str, tuple]
    ambient: tuple[str, str]  # triangle faces carrying the two ambient shape parameters
    linear_relation: str  # relation between the ambient parameters cut out by the cubic/quartic
    ambient_dimension: int  # dimension before imposing cubic and quartic relations

    def point_at(self, t) -> CorePoint:
        s = sp.Rational(Fraction(t).numerator, Fraction(t).denominator)
        vectors = {}
        for name, vec in self.vectors.items():
            vals = [sp.nsimplify(v.subs(self.parameter, s)) for v in vec]
            vectors[name] = [Fraction(int(sp.numer(v)), int(sp.denom(v))) for v in vals]
        return CorePoint.from_face_vectors(vectors)

    def is_regular_at(self, t) -> bool:
        s = sp.Rational(Fraction(t).numerator, Fraction(t).denominator)
        for vec in self.vectors.values():
            for v in vec:
                num, den = sp.fraction(sp.together(v))
                if num == 0:
                    continue
                if den.subs(self.parameter, s) == 0 or num.subs(self.parameter, s) == 0:
                    return False
        return True

    def samples(self, count: int = 3) -> list[tuple[Fraction, CorePoint]]:
        candidates = list(FAMILY_SAMPLE_VALUES) + [Fraction(n, d) for n in range(3, 40) for d in (1, 2, 3, 5, 7)]
        out = []
        for t in candidates:
            if self.is_regular_at(t):
                out.append((t, self.point_at(t)))
                if len(out) == count:
                    break
        return out

    def closure_points(self) -> list[CorePoint]:
        """Limits of the curve at the parameter values where some coordinate vanishes or blows up."""
        t = self.parameter
        special = set()
        for vec in self.vectors.values():
            for v in vec:
                num, den = sp.fraction(sp.together(v))
                for poly in (num, den):
                    if poly.has(t):
                        special |= {r for r in sp.roots(sp.Poly(poly, t)) if r.is_rational}
        points = []
        s = sp.Symbol("s")
        for root in sorted(special, key=float) + [sp.oo]:
            sub = 1 / s if root is sp.oo else root + s
            vectors = {}
            for name, vec in self.vectors.items():
                exprs = [sp.together(v.subs(t, sub)) for v in vec]
                orders = []
                for e in exprs:
                    num, den = sp.fraction(e)
                    if num == 0:
                        orders.append(None)
                        continue
                    orders.append(_s_order(num, s) - _s_order(den, s))
                lo = min(o for o in orders if o is not None)
                lead = []
                for e, o in zip(exprs, orders):
                    if o is None or o > lo:
                        lead.append(Fraction(0))
                    else:
                        val = sp.limit(e / s**lo, s, 0)
                        lead.append(Fraction(int(sp.numer(val)), int(sp.denom(val))))
                vectors[name] = lead
            points.append(CorePoint.from_face_vectors(vectors))
        return points

    def contains(self, z: CorePoint) -> bool:
        if z in self.closure_points():
            return True
        name = self.ambient[0]
        vec = z.vectors[name]
        if not all(vec):
            return False
        u = vec[2] / vec[0]
        expr = [v for v in self.vectors[name]]
        sol = sp.solve(sp.Eq(expr[2] / expr[0], sp.Rational(u.numerator, u.denominator)), self.parameter)
        for root in sol:
            if root.is_rational:
                q = Fraction(int(sp.numer(root)), int(sp.denom(root)))
                if self.is_regular_at(q) and self.point_at(q) == z:
                    return True
        return False

    def to_json(self) -> dict:
        return {
            "parameter": str(self.parameter),
            "vectors": {name: [str(v) for v in vec] for name, vec in self.vectors.items()},
            "ambient_parameters": list(self.ambient),
            "linear_relation": self.linear_relation,
            "ambient_dimension": self.ambient_dimension,
        }


def _s_order(poly, s) -> int:
    p = sp.Poly(poly, s)
    return min(m[0] for m in p.monoms())


@dataclass
class SpecialPointRecord:
    type_label: str
    pattern: ZeroPattern
    dimension: int
    representatives: list[CorePoint]
    orbit_size: int
    family: Family | None = None
    parameters: list[Fraction] = field(default_factory=list)
    orbit: list[ZeroPattern] = field(default_factory=list)

    def to_json(self, certificates: Sequence["SmoothnessCertificate"] = ()) -> dict:
        out = {
            "type": self.type_label,
            "dimension": self.dimension,
            "orbit_size": self.orbit_size,
            "pattern": self.pattern.to_json(),
            "representatives": [{"y": z.to_json()} for z in self.representatives],
            "certificates": [c.to_json() for c in certificates],
        }
        if self.family is not None:
            out["family"] = self.family.to_json()
            out["parameters"] = [format_rat(p) for p in self.parameters]
        return out


@dataclass
class _Solution:
    dimension: int
    point: CorePoint | None = None
    family: Family | None = None


def _to_sympy(p: SparsePoly, symbols: Mapping) -> sp.Expr:
    out = sp.Integer(0)
    for m, c in p.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for v, e in m:
            term *= symbols[v] ** e
        out += term
    return out


def _evaluate_mixed(poly: SparsePoly, point: Mapping):
    """Evaluate with values that are Fractions or SparsePolys; stays scalar while possible."""
    total = Fraction(0)
    poly_total = None
    for m, c in poly.terms.items():
        scalar = c
        symbolic = None
        for v, e in m:
            val = point[v]
            if isinstance(val, Fraction):
                scalar *= val**e if e > 1 else val
                if not scalar:
                    break
            else:
                symbolic = val**e if symbolic is None else symbolic * (val**e)
        if not scalar:
            continue
        if symbolic is None:
            total += scalar
        else:
            term = symbolic * SparsePoly.const(scalar)
            poly_total = term if poly_total is None else poly_total + term
    if poly_total is None:
        return total
    return poly_total + SparsePoly.const(total) if total else poly_total


def _solve_pattern(maximal: dict, rels: Sequence[Relation]) -> list[_Solution]:
    """All core points whose maximal faces carry ``maximal`` (face name -> values).

    Triangle faces with a nonvanishing maximal host are forced to be proportional
    to it; the others take one of the single-zero shapes or the free shape
    (1, 1 + u, u).  Each branch is checked against every relation; surviving
    residual systems in the shape parameters are solved with u(1 + u) != 0.
    """
    fixed: dict = {}
    for name, vals in maximal.items():
        for e, v in vals.items():
            fixed[yvar(e, name)] = v
    collapsed = []
    for tri in triangle_faces():
        t = ordered_triangle(tri)
        host = maximal[maximal_face(tri.rank).name]
        hv = [host[e] for e in t.edges]
        if any(hv):
            for e, v in zip(t.edges, hv):
                fixed[yvar(e, tri)] = v
        else:
            collapsed.append(tri)

    known = [set(fixed)]
    for tri in collapsed:
        known.append(known[-1] | {yvar(e, tri) for e in tri.edges})
    pending = set(range(len(rels)))
    checks = []
    for level in range(len(known)):
        now = [i for i in sorted(pending) if rels[i].poly.variables <= known[level]]
        pending -= set(now)
        checks.append(now)
    if pending:
        raise AssertionError("relation involving unassigned variables")
    for i in checks[0]:
        if _evaluate_mixed(rels[i].poly, fixed):
            return []

    branches = []

    def descend(level, point, params, equations):
        if level == len(collapsed):
            branches.append((dict(point), list(params), list(equations)))
            return
        tri = collapsed[level]
        edges = ordered_triangle(tri).edges
        for shape in (NONE, 0, 1, 2):
            pt = dict(point)
            prm = list(params)
            if shape == NONE:
                u = ("u", tri.name)
                prm.append(u)
                uu = SparsePoly.var(u)
                vals = [Fraction(1), SparsePoly.const(1) + uu, uu]
            else:
                vals = [Fraction(v) for v in _ONE_ZERO_SHAPES[shape]]
            for e, v in zip(edges, vals):
                pt[yvar(e, tri)] = v
            new = []
            ok = True
            for i in checks[level + 1]:
                q = _evaluate_mixed(rels[i].poly, pt)
                if isinstance(q, Fraction):
                    if q:
                        ok = False
                        break
                    continue
                new.append(q)
            if ok:
                descend(level + 1, pt, prm, equations + new)

    descend(0, fixed, [], [])

    solutions = []
    for point, params, equations in branches:
        if not params:
            solutions.append(_Solution(0, point=_core_from_polys(point, {})))
            continue
        symbols = {u: sp.Symbol(f"u{i}") for i, u in enumerate(params)}
        us = [symbols[u] for u in params]
        eqs = [_to_sympy(q, symbols) for q in equations]
        sat = sp.Symbol("w")
        guard = sp.Integer(1)
        for u in us:
            guard *= u * (1 + u)
        basis = sp.groebner(eqs + [1 - sat * guard], sat, *us, order="lex")
        if list(basis.exprs) == [1]:
            continue
        for sol in sp.solve([g for g in basis.exprs if not g.has(sat)], us, dict=True):
            free = [u for u in us if u not in sol]
            if not free:
                values = {u: sol[symbols[u]] for u in params}
                if not all(v.is_rational for v in values.values()):
                    raise AssertionError(f"irrational special point {values}")
                point_values = {k: _eval_sp(v, symbols, values) for k, v in point.items()}
                solutions.append(_Solution(0, point=_core_from_polys(point_values, {})))
            elif len(free) == 1:
                solutions.append(_Solution(1, family=_family(point, params, symbols, sol, free[0], eqs, rels)))
            else:
                raise AssertionError(f"solution set of dimension {len(free)} > 1")
    return solutions


def _eval_sp(p, symbols, values):
    if isinstance(p, Fraction):
        return p
    return p.evaluate(lambda v: Fraction(int(sp.numer(values[v])), int(sp.denom(values[v]))))


def _core_from_polys(point: Mapping, _unused) -> CorePoint:
    values = {}
    for v, val in point.items():
        values[(v[1], v[2])] = val.evaluate({}) if isinstance(val, SparsePoly) else val
    return CorePoint.from_values(values)


def _family(point, params, symbols, sol, free, eqs_all, rels) -> Family:
    t = sp.Symbol("t")
    subs = {s: sp.together(e).subs(free, t) for s, e in sol.items()}
    subs[free] = t
    vectors = {}
    for f in all_faces():
        vec = []
        for e in f.edges:
            val = point[yvar(e, f)]
            if isinstance(val, Fraction):
                expr = sp.Rational(val.numerator, val.denominator)
            else:
                expr = _to_sympy(val, symbols).subs(subs)
            vec.append(sp.cancel(expr))
        vectors[f.name] = tuple(vec)
    ambient, relation, ambient_dim = _ambient_relation(point, params, symbols, rels)
    return Family(t, vectors, ambient, relation, ambient_dim)


def _ambient_relation(point, params, symbols, rels):
    """Solve the linear and quadric relations alone, then the full system, on the two ambient parameters."""
    low = [r for r in rels if r.family not in (CUBIC, QUARTIC)]
    us = [symbols[u] for u in params]

    def system(rs):
        eqs = []
        for r in rs:
            q = _evaluate_mixed(r.poly, point)
            if isinstance(q, Fraction):
                if q:
                    raise AssertionError("inconsistent ambient system")
                continue
            eqs.append(_to_sympy(q, symbols))
        return eqs

    sat = sp.Symbol("w")
    guard = sp.Integer(1)
    for u in us:
        guard *= u * (1 + u)
    low_sol = sp.solve([g for g in sp.groebner(system(low) + [1 - sat * guard], sat, *us, order="lex").exprs if not g.has(sat)], us, dict=True)
    if len(low_sol) != 1:
        raise AssertionError("expected one ambient component")
    free = [u for u in us if u not in low_sol[0]]
    if len(free) != 2:
        raise AssertionError(f"expected a two-parameter ambient solution, got {len(free)}")
    full = sp.groebner(system(rels) + [1 - sat * guard], sat, *us, order="lex")
    names = tuple(next(p[1] for p in params if symbols[p] == u) for u in free)
    reduced = [sp.factor(g) for g in full.exprs if not g.has(sat) and g.free_symbols <= set(free)]
    # The relation between the two ambient shapes, as the numerator that vanishes on the curve.
    relation = None
    for g in reduced:
        num, _ = sp.fraction(sp.together(g))
        if sp.Poly(num, *free).total_degree() == 1:
            relation = num
            break
    text = "none" if relation is None else f"{sp.expand(relation)} = 0 with {free[0]} on {names[0]}, {free[1]} on {names[1]}"
    return names, text, 2


def _maximal_patterns():
    for z1, z2, z3 in product(two_block_zero_sets(1), two_block_zero_sets(2), two_block_zero_sets(3)):
        yield (z1, z2, z3)


@lru_cache(maxsize=None)
def _raw_special() -> tuple:
    """(isolated points, families, dropped closure points), each keyed by maximal zero pattern."""
    rels = z_relations()
    isolated = []
    families = []
    dropped = []
    for zeros in _maximal_patterns():
        try:
            maximal = {maximal_face(k).name: _maximal_face_vector(k, z) for k, z in zip((1, 2, 3), zeros)}
        except RelationViolation:
            continue
        sols = _solve_pattern(maximal, rels)
        fams = [s.family for s in sols if s.dimension == 1]
        for s in sols:
            if s.dimension == 1:
                families.append(s.family)
            elif any(f.contains(s.point) for f in fams):
                dropped.append(s.point)
            else:
                isolated.append(s.point)
    return tuple(isolated), tuple(families), tuple(dropped)


def _orbit_key(z: CorePoint):
    return z.faces


def _pattern_key(zeros: frozenset) -> frozenset:
    return zeros


def _image_of_zeros(g: SymmetryElement, zeros: frozenset) -> frozenset:
    return frozenset((g.edge(e), g.face(face_by_name(f)).name) for e, f in zeros)


def _classify(dimension: int, orbit_size: int, s4_orbit_size: int) -> str:
    """Type label from (dimension, orbit size); the two classes of size 24 differ in
    whether duality is needed to reach the whole orbit (12 + 12) or not."""
    if dimension == 1:
        return CCSTAR_OPD if orbit_size == 4 else f"unknown(dim=1,orbit={orbit_size})"
    table = {6: DDE, 12: CCSTAR_NOPD}
    if orbit_size in table:
        return table[orbit_size]
    if orbit_size == 24:
        return CDE if s4_orbit_size == 12 else CCSTAR_E
    return f"unknown(dim=0,orbit={orbit_size})"


@lru_cache(maxsize=None)
def enumerate_special() -> tuple[SpecialPointRecord, ...]:
    """Z_sp grouped into symmetry classes, one record per orbit."""
    isolated, families, _ = _raw_special()
    group = list(symmetry_group())
    records = []

    remaining = {z.faces: z for z in isolated}
    while remaining:
        z = remaining[min(remaining)]
        orbit = {}
        for g in group:
            w = z.apply(g)
            if w.faces not in remaining:
                raise AssertionError("special locus not closed under symmetries")
            orbit[w.faces] = w
        for key in orbit:
            del remaining[key]
        members = sorted(orbit.values(), key=lambda p: p.faces)
        pattern = members[0].zero_pattern()
        s4_size = len({members[0].apply(g).faces for g in group if not g.dualize})
        records.append(
            SpecialPointRecord(
                _classify(0, len(orbit), s4_size),
                pattern,
                0,
                members,
                len(orbit),
                orbit=[m.zero_pattern() for m in members],
            )
        )

    fam_by_zeros = {}
    for f in families:
        zeros = f.point_at(f.samples(1)[0][0]).zero_pattern().maximal_zeros
        fam_by_zeros[zeros] = f
    left = dict(fam_by_zeros)
    while left:
        zeros = min(left, key=lambda k: sorted(f"{edge_label(e)}@{n}" for e, n in k))
        fam = left[zeros]
        images = {_image_of_zeros(g, zeros) for g in group}
        for img in images:
            if img not in left:
                raise AssertionError("family set not closed under symmetries")
        for img in images:
            del left[img]
        samples = fam.samples(3)
        pattern = samples[0][1].zero_pattern()
        records.append(
            SpecialPointRecord(
                _classify(1, len(images), 0),
                pattern,
                1,
                [z for _, z in samples],
                len(images),
                family=fam,
                parameters=[t for t, _ in samples],
                orbit=[],
            )
        )
        for img in sorted(images, key=lambda k: sorted(f"{edge_label(e)}@{n}" for e, n in k)):
            f = fam_by_zeros[img]
            if f is fam:
                continue
            more = f.samples(3)
            records[-1].representatives.extend(z for _, z in more)
    order = {name: i for i, name in enumerate(TYPE_LABELS)}
    return tuple(sorted(records, key=lambda r: (order.get(r.type_label, 99), r.dimension)))


def family_members(record: SpecialPointRecord) -> list[Family]:
    """All families in the orbit of a one-dimensional record."""
    _, families, _ = _raw_special()
    zs = {_image_of_zeros(g, record.pattern.maximal_zeros) for g in symmetry_group()}
    out = []
    for f in families:
        if f.point_at(f.samples(1)[0][0]).zero_pattern().maximal_zeros in zs:
            out.append(f)
    return out


def census(records: Sequence[SpecialPointRecord]) -> dict:
    isolated = sum(r.orbit_size for r in records if r.dimension == 0)
    families = sum(r.orbit_size for r in records if r.dimension == 1)
    return {
        "isolated": isolated,
        "families": families,
        "orbits": {r.type_label: r.orbit_size for r in records},
    }


# ---------------------------------------------------------------------------
# smoothness certificates
# ---------------------------------------------------------------------------


@dataclass
class SmoothnessCertificate:
    point: CorePoint
    chart: dict[str, Edge]
    jacobian_rank: int
    corank: int
    propagation_bound: int | None
    verdict: str

    def to_json(self) -> dict:
        return {
            "chart": {name: edge_label(e) for name, e in self.chart.items()},
            "jacobian_rank": self.jacobian_rank,
            "corank": self.corank,
            "propagation_bound": self.propagation_bound,
            "verdict": self.verdict,
        }


def default_chart(z: CorePoint, *, last: bool = False) -> dict[str, Edge]:
    """Per face, the canonically least (or greatest) edge with nonzero value."""
    chart = {}
    for f in all_faces():
        vec = z.vectors[f.name]
        idx = [i for i, v in enumerate(vec) if v]
        chart[f.name] = f.edges[idx[-1] if last else idx[0]]
    return chart


def _chart_point(z: CorePoint, chart: Mapping[str, Edge]) -> tuple[list, dict]:
    """Local parameters and the value of every y at z with the chart coordinates set to 1."""
    variables = []
    point = {}
    for f in all_faces():
        vec = z.vectors[f.name]
        scale = vec[f.edges.index(chart[f.name])]
        for e, v in zip(f.edges, vec):
            point[yvar(e, f)] = v / scale
            if e != chart[f.name]:
                variables.append(yvar(e, f))
    return variables, point


@lru_cache(maxsize=None)
def _jacobian() -> Jacobian:
    return Jacobian(z_relations())


def jacobian_rank(z: CorePoint, chart: Mapping[str, Edge] | None = None) -> int:
    chart = default_chart(z) if chart is None else chart
    variables, point = _chart_point(z, chart)
    return _jacobian().rank(variables, point)


def jacobian_certificate(z: CorePoint, *, with_propagation: bool = True, shape_relations: bool = False) -> SmoothnessCertificate:
    bad = z.violations()
    if bad:
        raise RelationViolation(f"{len(bad)} relations fail, first: {bad[0].to_text()}")
    chart = default_chart(z)
    r = jacobian_rank(z, chart)
    corank = CHART_DIMENSION - r
    bound = propagation_bound(z, shape_relations=shape_relations) if with_propagation else None
    return SmoothnessCertificate(z, chart, r, corank, bound, "Smooth" if corank == CORE_DIMENSION else "Inconclusive")


# ---------------------------------------------------------------------------
# combinatorial propagation of differentials
# ---------------------------------------------------------------------------


def _quadric_shape(r: Relation):
    """(A, B, C, D) for a binomial y_A y_B - y_C y_D with four distinct variables, else None."""
    if len(r.poly.terms) != 2:
        return None
    (m1, c1), (m2, c2) = r.poly.terms.items()
    if len(m1) != 2 or len(m2) != 2 or any(e != 1 for _, e in m1 + m2) or c1 != -c2:
        return None
    return (m1[0][0], m1[1][0], m2[0][0], m2[1][0])


def propagation_bound(z: CorePoint, *, shape_relations: bool = False) -> int | None:
    """Upper bound for dim of the differentials at z from the 2x2 rules alone.

    Every quadric binomial y_A y_B - y_C y_D is read as in the zero-forcing rule
    (three factors vanish: the partner of the nonzero one has zero differential)
    or the identification rule (one zero per monomial: y_B dy_A = y_C dy_D).
    Differentials of the linear relations and of the chart coordinates are
    added; ``shape_relations`` also adds the product-rule differentials of the
    quadrics with no vanishing factor and of the cubic and quartic relations.  Returns None when the rules leave more than
    the expected three dimensions.
    """
    chart = default_chart(z)
    variables, point = _chart_point(z, chart)
    index = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    rows: list[list[Fraction]] = []

    def add(coeffs: Mapping):
        row = [Fraction(0)] * n
        for v, c in coeffs.items():
            if v in index and c:
                row[index[v]] += c
        if any(row):
            rows.append(row)

    for r in z_relations():
        if r.family == LINEAR:
            add({v: c for ((v, _),), c in r.poly.terms.items()})
            continue
        shape = _quadric_shape(r)
        if shape is not None:
            a, b, c, d = shape
            vals = [point[v] for v in shape]
            zero = [not v for v in vals]
            # zero-forcing: exactly one nonzero factor, its partner gets d = 0
            if sum(zero) == 3:
                partner = {0: b, 1: a, 2: d, 3: c}
                nonzero = zero.index(False)
                add({partner[nonzero]: Fraction(1)})
            elif sum(zero) == 2:
                # identification: one zero in each monomial
                if zero[0] != zero[1] and zero[2] != zero[3]:
                    za = a if zero[0] else b
                    wa = point[b] if zero[0] else point[a]
                    zc = c if zero[2] else d
                    wc = point[d] if zero[2] else point[c]
                    add({za: wa, zc: -wc})
            elif shape_relations and not any(zero):
                add({a: point[b], b: point[a], c: -point[d], d: -point[c]})
            continue
        if shape_relations and r.family in (CUBIC, QUARTIC):
            add({v: r.poly.derivative(v).evaluate(point) for v in r.poly.variables})
    if not rows:
        return None if n > CORE_DIMENSION else n
    bound = n - rank_by_columns(rows)
    return bound if bound <= CORE_DIMENSION else None


# ---------------------------------------------------------------------------
# catalog matching
# ---------------------------------------------------------------------------


def match_against_catalog(z: CorePoint, catalog: Sequence[SpecialPointRecord]) -> SpecialPointRecord | None:
    """The catalog record containing z up to per-face scaling and S4 x duality, if any."""
    if not any(not v for v in z.values().values()):
        return None
    images = {z.apply(g) for g in symmetry_group()}
    for rec in catalog:
        if rec.dimension == 0:
            if any(w in images for w in rec.representatives):
                return rec
        else:
            fams = _orbit_families(rec) if rec.family is not None else family_members(rec)
            for fam in fams:
                if any(fam.contains(w) for w in images):
                    return rec
    return None


def _orbit_families(rec: SpecialPointRecord) -> list[Family]:
    """The images of a record's family under every symmetry, as families."""
    out = []
    seen = set()
    for g in symmetry_group():
        key = _image_of_zeros(g, rec.pattern.maximal_zeros)
        if key in seen:
            continue
        seen.add(key)
        out.append(_transform_family(rec.family, g))
    return out


def _transform_family(fam: Family, g: SymmetryElement) -> Family:
    vectors: dict[str, list] = {f.name: [None] * len(f.edges) for f in all_faces()}
    for f in all_faces():
        image = g.face(f)
        for e, v in zip(f.edges, fam.vectors[f.name]):
            e2, s = g.oriented_edge(e)
            vectors[image.name][image.edges.index(e2)] = s * v
    rename = {n: g.face(face_by_name(n)).name for n in fam.ambient}
    ambient = tuple(rename[n] for n in fam.ambient)
    relation = re.sub(r"\{[0-9,]+\}", lambda m: rename.get(m.group(0), m.group(0)), fam.linear_relation)
    return Family(fam.parameter, {k: tuple(v) for k, v in vectors.items()}, ambient, relation, fam.ambient_dimension)


def catalog_json(records: Sequence[SpecialPointRecord], certificates: Mapping[int, Sequence[SmoothnessCertificate]] | None = None) -> list:
    certificates = certificates or {}
    return [r.to_json(certificates.get(i, ())) for i, r in enumerate(records)]


def _parse_pair(text: str) -> tuple[Edge, str]:
    edge, face = text.split("@")
    return parse_edge(edge), face


def family_from_json(data: Mapping) -> Family:
    t = sp.Symbol(data["parameter"])
    vectors = {name: tuple(sp.sympify(v, locals={str(t): t}) for v in vec) for name, vec in data["vectors"].items()}
    return Family(t, vectors, tuple(data["ambient_parameters"]), data["linear_relation"], data["ambient_dimension"])


def records_from_json(data: Sequence[Mapping]) -> list[SpecialPointRecord]:
    """Inverse of catalog_json (certificates are not part of the record)."""
    out = []
    for item in data:
        zeros = frozenset(_parse_pair(s) for s in item["pattern"]["maximal_zeros"])
        reps = [CorePoint.from_json(r["y"]) for r in item["representatives"]]
        pattern = reps[0].zero_pattern() if reps else ZeroPattern((), zeros)
        if pattern.maximal_zeros != zeros:
            raise ValueError(f"{item['type']}: recorded zero pattern disagrees with the first representative")
        fam = family_from_json(item["family"]) if "family" in item else None
        params = [Fraction(p) for p in item.get("parameters", [])]
        out.append(SpecialPointRecord(item["type"], pattern, item["dimension"], reps, item["orbit_size"], fam, params))
    return out
