"""Defining polynomials of the chart U (edge variables) and of the core Z (face variables).

U-level variables are ("x", edge); Z-level variables are ("y", edge, face name).
Index patterns are written with oriented pairs; an oriented pair (A, B) with
B < A stands for minus the canonical variable, since x is antisymmetric in
its endpoints.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Mapping, Sequence

from .combinatorics import (
    Edge,
    Face,
    all_edges,
    canonical_edge,
    card,
    edge_label,
    edges_of_rank,
    faces_containing,
    label,
    mask,
    ordered_triangles,
    subsets_of_rank,
)
from .exact import SparsePoly, format_rat, rank

LINEAR = "linear"
QUADRIC_SHARED = "quadric_shared"
QUADRIC_ROTATED = "quadric_rotated"
CUBIC = "cubic"
QUARTIC = "quartic"
FAMILIES = (LINEAR, QUADRIC_SHARED, QUADRIC_ROTATED, CUBIC, QUARTIC)


@dataclass(frozen=True)
class Relation:
    poly: SparsePoly
    family: str
    level: str  # "U" or "Z"
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def evaluate(self, point) -> Fraction:
        return self.poly.evaluate(point)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "level": self.level,
            "terms": [
                {"coeff": format_rat(c), "monomial": {var_id(v): e for v, e in m}}
                for m, c in sorted(self.poly.terms.items(), key=lambda kv: _mono_key(kv[0]))
            ],
            "provenance": self.provenance,
        }

    def to_text(self) -> str:
        parts = []
        for m, c in sorted(self.poly.terms.items(), key=lambda kv: _mono_key(kv[0])):
            mono = "*".join(cas_name(v) + (f"^{e}" if e > 1 else "") for v, e in m)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coeff = "" if mag == 1 else f"{format_rat(mag)}*"
            parts.append(f"{sign} {coeff}{mono}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def var_id(v) -> str:
    if v[0] == "x":
        return f"x[{edge_label(v[1])}]"
    if v[0] == "y":
        return f"y[{edge_label(v[1])}@{v[2]}]"
    return f"{v[0]}[{','.join(str(p) for p in v[1:])}]"


def cas_name(v) -> str:
    """Identifier usable in an external computer-algebra system."""
    if v[0] == "x":
        return f"x_{label(v[1][0])}_{label(v[1][1])}"
    if v[0] == "y":
        face = v[2].replace("{", "T").replace("}", "").replace(",", "_")
        return f"y_{label(v[1][0])}_{label(v[1][1])}_{face}"
    return "_".join(str(p) for p in v)


def _mono_key(m):
    return tuple((var_id(v), e) for v, e in m)


def xvar(e: Edge):
    return ("x", e)


def yvar(e: Edge, face: Face | str):
    return ("y", e, face if isinstance(face, str) else face.name)


def _oriented(a: int, b: int) -> tuple[Edge, int]:
    return canonical_edge(a, b)


def _term(coeff: int, factors: Sequence[tuple]) -> SparsePoly:
    """Product of oriented factors ((a, b), face or None) with sign bookkeeping."""
    powers: Counter = Counter()
    sign = coeff
    for (a, b), face in factors:
        e, s = _oriented(a, b)
        sign *= s
        powers[xvar(e) if face is None else yvar(e, face)] += 1
    return SparsePoly.monomial(sign, powers)


def _binomial(left, right) -> SparsePoly:
    return _term(1, left) - _term(1, right)


def canonical_key(p: SparsePoly):
    """Key identifying p up to global sign."""
    items = sorted(p.terms.items(), key=lambda kv: _mono_key(kv[0]))
    if items and items[0][1] < 0:
        items = [(m, -c) for m, c in items]
    return tuple(items)


def _dedup(rels: Iterable[Relation]) -> list[Relation]:
    seen = set()
    out = []
    for r in rels:
        if r.poly.is_zero():
            continue
        key = canonical_key(r.poly)
        if key in seen:
            continue
        seen.add(key)
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# index patterns
# ---------------------------------------------------------------------------


def _m(*xs):
    return mask(*xs)


def quadric_patterns():
    """(alpha1, alpha2, alpha1*, alpha2*) as oriented pairs, with index provenance."""
    for i, j, k in permutations((1, 2, 3, 4), 3):
        yield (
            (_m(i), _m(j)),
            (_m(j), _m(k)),
            (_m(i, k), _m(j, k)),
            (_m(i, j), _m(i, k)),
        ), {"pattern": "lines-planes", "indices": [i, j, k]}
    for i, j, k, l in permutations((1, 2, 3, 4)):
        yield (
            (_m(i, l), _m(j, l)),
            (_m(j, l), _m(k, l)),
            (_m(i, k, l), _m(j, k, l)),
            (_m(i, j, l), _m(i, k, l)),
        ), {"pattern": "planes-hyperplanes", "indices": [i, j, k, l]}


def cubic_patterns():
    """((a1, a2, a3), (a1*, a2*, a3*)) on the octahedron."""
    for i, j, k, l in permutations((1, 2, 3, 4)):
        yield (
            ((_m(i, j), _m(i, l)), (_m(i, k), _m(k, l)), (_m(j, k), _m(j, l))),
            ((_m(j, k), _m(k, l)), (_m(i, j), _m(j, l)), (_m(i, k), _m(i, l))),
        ), {"indices": [i, j, k, l]}


def quartic_patterns():
    """((a1, a2, a3, a4), (a1*, a2*, a3*, a4*)) linking Delta_1 and Delta_3."""
    for i, j, k, l in permutations((1, 2, 3, 4)):
        yield (
            ((_m(i), _m(j)), (_m(j), _m(k)), (_m(k), _m(l)), (_m(l), _m(i))),
            (
                (_m(i, k, l), _m(j, k, l)),
                (_m(i, j, l), _m(i, k, l)),
                (_m(i, j, k), _m(i, j, l)),
                (_m(j, k, l), _m(i, j, k)),
            ),
        ), {"indices": [i, j, k, l]}


def _canon(pair) -> Edge:
    return canonical_edge(*pair)[0]


# ---------------------------------------------------------------------------
# U level
# ---------------------------------------------------------------------------


def linear_u() -> list[Relation]:
    out = []
    for t in ordered_triangles():
        a1, a2, a3 = t.edges
        p = SparsePoly.var(xvar(a1)) - SparsePoly.var(xvar(a2)) + SparsePoly.var(xvar(a3))
        out.append(Relation(p, LINEAR, "U", {"triangle": t.name}))
    return out


@lru_cache(maxsize=None)
def _u_relations() -> tuple[Relation, ...]:
    rels = linear_u()
    for (a1, a2, b1, b2), prov in quadric_patterns():
        p = _binomial([(a1, None), (b2, None)], [(a2, None), (b1, None)])
        rels.append(Relation(p, QUADRIC_ROTATED, "U", prov))
    for (lhs, rhs), prov in cubic_patterns():
        p = _binomial([(a, None) for a in lhs], [(a, None) for a in rhs])
        rels.append(Relation(p, CUBIC, "U", prov))
    for ((a1, a2, a3, a4), (b1, b2, b3, b4)), prov in quartic_patterns():
        p = _binomial([(a1, None), (a3, None), (b2, None), (b4, None)], [(a2, None), (a4, None), (b1, None), (b3, None)])
        rels.append(Relation(p, QUARTIC, "U", prov))
    return tuple(_dedup(rels))


def u_relations() -> list[Relation]:
    """Generators of the ideal cutting out U in the edge coordinates (flag coordinates are free)."""
    return list(_u_relations())


# ---------------------------------------------------------------------------
# Z level
# ---------------------------------------------------------------------------


def _face_choices(*pairs, extended: bool):
    faces = faces_containing(*(_canon(p) for p in pairs))
    if not extended:
        faces = tuple(f for f in faces if f.is_maximal)
    return faces


def multihomogenizations(left, right, *, extended: bool):
    """Face assignments turning the binomial prod(left) - prod(right) into a multihomogeneous one.

    Each left factor is matched with a right factor such that both edges lie in
    a common face, which then hosts both.  Yields (faces for left, faces for right).
    """
    n = len(left)
    seen = set()
    for perm in permutations(range(n)):
        choices = [_face_choices(left[i], right[perm[i]], extended=extended) for i in range(n)]
        if not all(choices):
            continue
        for picked in product(*choices):
            faces_r = [None] * n
            for i, j in enumerate(perm):
                faces_r[j] = picked[i]
            key = (tuple(f.name for f in picked), tuple(f.name for f in faces_r))
            if key not in seen:
                seen.add(key)
                yield list(picked), faces_r


@lru_cache(maxsize=None)
def _z_relations(extended: bool) -> tuple[Relation, ...]:
    rels: list[Relation] = []
    for t in ordered_triangles():
        a1, a2, a3 = t.edges
        for beta in faces_containing(*t.edges):
            p = SparsePoly.var(yvar(a1, beta)) - SparsePoly.var(yvar(a2, beta)) + SparsePoly.var(yvar(a3, beta))
            rels.append(Relation(p, LINEAR, "Z", {"triangle": t.name, "faces": [beta.name]}))
    for k in (1, 2, 3):
        es = edges_of_rank(k)
        for e1 in es:
            for e2 in es:
                if e1 == e2 or not (set(e1) & set(e2)):
                    continue
                hosts = faces_containing(e1, e2)
                for b1 in hosts:
                    for b2 in hosts:
                        if b1 == b2:
                            continue
                        p = SparsePoly.var(yvar(e1, b1)) * SparsePoly.var(yvar(e2, b2)) - SparsePoly.var(
                            yvar(e2, b1)
                        ) * SparsePoly.var(yvar(e1, b2))
                        rels.append(
                            Relation(
                                p,
                                QUADRIC_SHARED,
                                "Z",
                                {"edges": [edge_label(e1), edge_label(e2)], "faces": [b1.name, b2.name]},
                            )
                        )
    for (a1, a2, b1, b2), prov in quadric_patterns():
        for beta in faces_containing(_canon(a1), _canon(a2)):
            for beta_s in faces_containing(_canon(b1), _canon(b2)):
                p = _binomial([(a1, beta), (b2, beta_s)], [(a2, beta), (b1, beta_s)])
                rels.append(Relation(p, QUADRIC_ROTATED, "Z", dict(prov, faces=[beta.name, beta_s.name])))
    for (lhs, rhs), prov in cubic_patterns():
        for faces_l, faces_r in multihomogenizations(lhs, rhs, extended=extended):
            p = _binomial(list(zip(lhs, faces_l)), list(zip(rhs, faces_r)))
            rels.append(Relation(p, CUBIC, "Z", dict(prov, faces=[f.name for f in faces_l + faces_r])))
    for (lhs, rhs), prov in quartic_patterns():
        left = [lhs[0], lhs[2], rhs[1], rhs[3]]
        right = [lhs[1], lhs[3], rhs[0], rhs[2]]
        for faces_l, faces_r in multihomogenizations(left, right, extended=extended):
            p = _binomial(list(zip(left, faces_l)), list(zip(right, faces_r)))
            rels.append(Relation(p, QUARTIC, "Z", dict(prov, faces=[f.name for f in faces_l + faces_r])))
    return tuple(_dedup(rels))


def z_relations(extended: bool = True) -> list[Relation]:
    """Multihomogeneous generators for the core.

    With ``extended=False`` the cubic lives only on Delta_2 and the quartic only
    on (Delta_1, Delta_3).  The default also places each paired factor of the
    cubic and quartic in any face containing both edges of the pair; these are
    the same binomials multihomogenised differently and vanish on the core.
    """
    return list(_z_relations(extended))


def family_counts(rels: Sequence[Relation]) -> dict[str, int]:
    c = Counter(r.family for r in rels)
    return {f: c.get(f, 0) for f in FAMILIES}


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class VanishingReport:
    checked: int
    failures: list[tuple[int, int, Fraction]]  # (relation index, point index, value)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_vanishing(rels: Sequence[Relation], points: Sequence[Mapping]) -> VanishingReport:
    failures = []
    for j, pt in enumerate(points):
        for i, r in enumerate(rels):
            v = r.evaluate(pt)
            if v:
                failures.append((i, j, v))
    return VanishingReport(len(rels) * len(points), failures)


@lru_cache(maxsize=None)
def _gradient_table(rels_key) -> dict:
    return {}


class Jacobian:
    """Cached formal gradients of a relation list."""

    def __init__(self, rels: Sequence[Relation]):
        self.rels = list(rels)
        self._grads = [{v: r.poly.derivative(v) for v in r.poly.variables} for r in self.rels]

    def matrix(self, variables: Sequence, point) -> list[list[Fraction]]:
        index = {v: i for i, v in enumerate(variables)}
        rows = []
        for grads in self._grads:
            row = [Fraction(0)] * len(variables)
            nonzero = False
            for v, g in grads.items():
                i = index.get(v)
                if i is None:
                    continue
                val = g.evaluate(point)
                if val:
                    row[i] = val
                    nonzero = True
            if nonzero:
                rows.append(row)
        return rows

    def rank(self, variables: Sequence, point) -> int:
        rows = self.matrix(variables, point)
        return rank(rows, len(variables)) if rows else 0


def u_edge_jacobian_rank(chart_x: Mapping[Edge, Fraction]) -> int:
    pt = {xvar(e): v for e, v in chart_x.items()}
    return Jacobian(u_relations()).rank([xvar(e) for e in all_edges()], pt)


# ---------------------------------------------------------------------------
# incidence components
# ---------------------------------------------------------------------------


def _restrict_to_linear_locus(zero_edges: set) -> dict:
    """Parametrise {x_e = 0 for e in zero_edges} intersected with the linear relations."""
    from .exact import rank_and_kernel

    free = [e for e in all_edges() if e not in zero_edges]
    rows = []
    for r in linear_u():
        row = [r.poly.terms.get(((xvar(e), 1),), Fraction(0)) for e in free]
        if any(row):
            rows.append(row)
    _, kernel = rank_and_kernel(rows, len(free)) if rows else (0, [[Fraction(int(i == j)) for i in range(len(free))] for j in range(len(free))])
    params = [SparsePoly.var(("t", i)) for i in range(len(kernel))]
    subst = {xvar(e): SparsePoly() for e in zero_edges}
    for idx, e in enumerate(free):
        p = SparsePoly()
        for b, t in zip(kernel, params):
            if b[idx]:
                p = p + t * SparsePoly.const(b[idx])
        subst[xvar(e)] = p
    return {"substitution": subst, "dimension": len(kernel)}


def incidence_component_check() -> dict:
    """Check that the two extra components of the incidence locus satisfy the incidence equations.

    For each pattern the edge variables of one kind are set to zero, the rest
    are restricted to the linear relations, and every linear and quadric
    generator is reduced symbolically.  Cubic and quartic generators are
    reported separately: they must fail to vanish on at least one component.
    """
    patterns = {
        "E2": set(edges_of_rank(2)),
        "E1+E3": set(edges_of_rank(1)) | set(edges_of_rank(3)),
    }
    report = {}
    for name, zeros in patterns.items():
        loc = _restrict_to_linear_locus(zeros)
        subst = loc["substitution"]
        surviving_low = []
        surviving_high = []
        for r in u_relations():
            reduced = r.poly.substitute(subst)
            if reduced.is_zero():
                continue
            if r.family in (LINEAR, QUADRIC_ROTATED):
                surviving_low.append(r.to_text())
            else:
                surviving_high.append(r.to_text())
        report[name] = {
            "free_dimension": loc["dimension"],
            "linear_quadric_nonvanishing": surviving_low,
            "higher_nonvanishing": surviving_high,
        }
    return report


# ---------------------------------------------------------------------------
# symbolic identity checks on U-level generators
# ---------------------------------------------------------------------------

SYMBOLIC_DEGREE_BOUND = 24


def _symbolic_pluecker():
    g = [[SparsePoly.var(("g", r, c)) for c in range(4)] for r in range(4)]
    from .config import minors

    cols = [[g[r][c] for r in range(4)] for c in range(4)]
    plk = {}
    for k in (1, 2, 3):
        for s in subsets_of_rank(k):
            vec = minors([cols[i - 1] for i in range(1, 5) if s >> (i - 1) & 1])
            plk[s] = dict(zip(subsets_of_rank(k), vec))
    return plk


@lru_cache(maxsize=None)
def _symbolic_edges():
    """x_e = num_e / (d_I d_J) with d_S the base Pluecker coordinate of pi_S."""
    from .config import EDGE_REFERENCE
    from .combinatorics import base

    plk = _symbolic_pluecker()
    out = {}
    for e in all_edges():
        I, J = e
        k = card(I)
        K, K0 = EDGE_REFERENCE[k], base(k)
        num = plk[J][K] * plk[I][K0] - plk[I][K] * plk[J][K0]
        out[e] = (num, Counter({I: 1, J: 1}))
    denoms = {s: plk[s][base(card(s))] for s in plk}
    return out, denoms


def symbolic_numerator(rel: Relation) -> SparsePoly:
    """Numerator of rel after substituting x_e as ratios of minors of a symbolic 4x4 matrix."""
    if rel.level != "U":
        raise ValueError("symbolic identity checks apply to U-level relations only")
    xs, denoms = _symbolic_edges()
    terms = []
    for m, c in rel.poly.terms.items():
        num = SparsePoly.const(c)
        den: Counter = Counter()
        for v, e in m:
            n, d = xs[v[1]]
            num = num * (n**e)
            for s, mult in d.items():
                den[s] += mult * e
        terms.append((num, den))
    common: Counter = Counter()
    for _, den in terms:
        for s, mult in den.items():
            common[s] = max(common[s], mult)
    total = SparsePoly()
    for num, den in terms:
        for s, mult in common.items():
            missing = mult - den.get(s, 0)
            if missing:
                num = num * (denoms[s] ** missing)
        total = total + num
    return total


def shares_denominator(rel: Relation) -> bool:
    """True when every term uses the same multiset of vertices (no cross-multiplication needed)."""
    xs, _ = _symbolic_edges()
    dens = set()
    for m in rel.poly.terms:
        den: Counter = Counter()
        for v, e in m:
            for s, mult in xs[v[1]][1].items():
                den[s] += mult * e
        dens.add(tuple(sorted(den.items())))
    return len(dens) == 1


def symbolic_identity_check(rel: Relation, mode: str = "probabilistic", trials: int = 50, seed: int = 0) -> bool:
    """Is rel identically zero on the orbit of the coordinate configuration?

    ``exact`` expands the cleared numerator in the 16 matrix entries;
    ``probabilistic`` evaluates at ``trials`` random integer matrices with
    entries in [-10**6, 10**6] (numerator degree is at most SYMBOLIC_DEGREE_BOUND).
    """
    if rel.level != "U":
        raise ValueError("symbolic identity checks apply to U-level relations only")
    if mode == "exact":
        return symbolic_numerator(rel).is_zero()
    if mode != "probabilistic":
        raise ValueError(f"unknown mode {mode!r}")
    from .config import config_from_matrix, is_general_position, normalize
    from .exact import determinant

    rng = random.Random(seed)
    done = 0
    while done < trials:
        g = [[rng.randint(-10**6, 10**6) for _ in range(4)] for _ in range(4)]
        if determinant(g) == 0:
            continue
        c = config_from_matrix(g)
        if not is_general_position(c):
            continue
        if rel.evaluate(normalize(c).edge_assignment()):
            return False
        done += 1
    return True
