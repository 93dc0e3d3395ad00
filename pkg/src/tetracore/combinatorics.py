"""Combinatorics of the hypersimplices Delta_1, Delta_2, Delta_3.

Subsets of {1,2,3,4} are 4-bit masks (bit i-1 <-> element i).  Vertices of
Delta_k are the k-element subsets; an edge joins two vertices whose symmetric
difference has two elements.  Faces of dimension >= 2 are the three maximal
hypersimplices and sixteen triangles.  Edges are always stored as (lo, hi)
with lo < hi in the fixed total order on subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterator, Union

FULL = 0b1111

Edge = tuple[int, int]


def mask(*elements: int) -> int:
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements(m: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(4) if m >> i & 1)


def card(m: int) -> int:
    return bin(m).count("1")


def label(m: int) -> str:
    return "".join(str(e) for e in elements(m))


def parse_subset(text: str) -> int:
    m = mask(*(int(ch) for ch in text.strip()))
    if not 0 < m < FULL or card(m) != len(text.strip()):
        raise ValueError(f"not a proper nonempty subset: {text!r}")
    return m


def order_key(m: int) -> tuple[int, tuple[int, ...]]:
    """Sort key realising 1<2<3<4<12<13<14<23<24<34<123<124<134<234."""
    return card(m), elements(m)


SUBSETS: tuple[int, ...] = tuple(sorted(range(1, FULL), key=order_key))


def subsets_of_rank(k: int) -> tuple[int, ...]:
    return tuple(s for s in SUBSETS if card(s) == k)


def base(k: int) -> int:
    """The distinguished subset 1, 12 or 123 of cardinality k."""
    return {1: mask(1), 2: mask(1, 2), 3: mask(1, 2, 3)}[k]


def precedes(a: int, b: int) -> bool:
    return order_key(a) < order_key(b)


def is_edge(a: int, b: int) -> bool:
    return a != b and card(a) == card(b) and card(a ^ b) == 2


def canonical_edge(a: int, b: int) -> tuple[Edge, int]:
    """Canonical form of the oriented pair (a, b) and the orientation sign."""
    if not is_edge(a, b):
        raise ValueError(f"{label(a)},{label(b)} is not a hypersimplex edge")
    return ((a, b), 1) if precedes(a, b) else ((b, a), -1)


def edge_rank(e: Edge) -> int:
    return card(e[0])


def edge_label(e: Edge) -> str:
    return f"{label(e[0])}-{label(e[1])}"


def parse_edge(text: str) -> Edge:
    a, b = text.split("-")
    e, _ = canonical_edge(parse_subset(a), parse_subset(b))
    return e


@lru_cache(maxsize=None)
def all_edges() -> tuple[Edge, ...]:
    """The 24 edges, sorted by (rank, lo, hi)."""
    out = []
    for a, b in combinations(SUBSETS, 2):
        if is_edge(a, b):
            out.append(canonical_edge(a, b)[0])
    return tuple(sorted(out, key=lambda e: (edge_rank(e), order_key(e[0]), order_key(e[1]))))


def edges_of_rank(k: int) -> tuple[Edge, ...]:
    return tuple(e for e in all_edges() if edge_rank(e) == k)


@dataclass(frozen=True)
class Face:
    """A face of dimension >= 2: a maximal hypersimplex or a triangle."""

    name: str
    rank: int
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]

    @property
    def is_triangle(self) -> bool:
        return len(self.vertices) == 3

    @property
    def is_maximal(self) -> bool:
        return not self.is_triangle

    def __repr__(self):
        return f"Face({self.name})"


def _face_edges(vertices) -> tuple[Edge, ...]:
    es = [canonical_edge(a, b)[0] for a, b in combinations(vertices, 2) if is_edge(a, b)]
    return tuple(sorted(es, key=lambda e: (order_key(e[0]), order_key(e[1]))))


def _triangle_name(vertices) -> str:
    return "{" + ",".join(label(v) for v in vertices) + "}"


@lru_cache(maxsize=None)
def all_faces() -> tuple[Face, ...]:
    """Delta_1, Delta_2, Delta_3 followed by the 16 triangles (by rank, then vertices)."""
    faces = []
    for k in (1, 2, 3):
        vs = subsets_of_rank(k)
        faces.append(Face(f"D{k}", k, vs, _face_edges(vs)))
    for k in (1, 2, 3):
        vs = subsets_of_rank(k)
        for tri in combinations(vs, 3):
            if all(is_edge(a, b) for a, b in combinations(tri, 2)):
                faces.append(Face(_triangle_name(tri), k, tri, _face_edges(tri)))
    return tuple(faces)


@lru_cache(maxsize=None)
def face_by_name(name: str) -> Face:
    for f in all_faces():
        if f.name == name:
            return f
    raise KeyError(name)


def maximal_face(k: int) -> Face:
    return face_by_name(f"D{k}")


def triangle_faces() -> tuple[Face, ...]:
    return tuple(f for f in all_faces() if f.is_triangle)


def faces_containing(*edges: Edge) -> tuple[Face, ...]:
    return tuple(f for f in all_faces() if all(e in f.edges for e in edges))


@lru_cache(maxsize=None)
def gamma_pairs() -> tuple[tuple[Edge, Face], ...]:
    """The 72 incident pairs (alpha, beta), grouped by face in face order."""
    return tuple((e, f) for f in all_faces() for e in f.edges)


def gamma_components() -> list[list[tuple[Edge, Face]]]:
    """Connected components of Gamma, whose nodes are (face, vertex) and edges (face, edge)."""
    adj: dict[tuple[str, int], set] = {}
    for e, f in gamma_pairs():
        a, b = (f.name, e[0]), (f.name, e[1])
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    seen: set = set()
    comps = []
    for node in adj:
        if node in seen:
            continue
        stack, comp = [node], set()
        while stack:
            n = stack.pop()
            if n in comp:
                continue
            comp.add(n)
            stack.extend(adj[n] - comp)
        seen |= comp
        comps.append(comp)
    out = []
    for comp in comps:
        out.append([(e, f) for e, f in gamma_pairs() if (f.name, e[0]) in comp])
    return out


# ---------------------------------------------------------------------------
# ordered triangles and related pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderedTriangle:
    vertices: tuple[int, int, int]  # I < J < K
    edges: tuple[Edge, Edge, Edge]  # (JK, IK, IJ)

    @property
    def name(self) -> str:
        return _triangle_name(self.vertices)


def ordered_triangle(face: Face) -> OrderedTriangle:
    if not face.is_triangle:
        raise ValueError(f"{face.name} is not a triangle")
    i, j, k = sorted(face.vertices, key=order_key)
    return OrderedTriangle((i, j, k), ((j, k), (i, k), (i, j)))


def ordered_triangles() -> tuple[OrderedTriangle, ...]:
    return tuple(ordered_triangle(f) for f in triangle_faces())


@dataclass(frozen=True)
class TriangleHost:
    """A triangular subgraph of Gamma: an ordered triangle drawn inside face ``face``."""

    triangle: OrderedTriangle
    face: Face

    @property
    def name(self) -> str:
        return f"{self.triangle.name}@{self.face.name}"


def triangle_hosts() -> tuple[TriangleHost, ...]:
    out = []
    for t in ordered_triangles():
        for f in faces_containing(*t.edges):
            out.append(TriangleHost(t, f))
    return tuple(out)


@dataclass(frozen=True)
class RelatedPair:
    """Two related triangular subgraphs and the signed edge correspondence.

    ``correspondence[i] = (j, sign)``: position i of ``first`` (in ordered
    triangle order) matches position j of ``second``; the value triples satisfy
    y_first[i] ~ sign * y_second[j] up to a common factor.
    """

    first: TriangleHost
    second: TriangleHost
    correspondence: tuple[tuple[int, int], ...]
    kind: str  # "same" or "rotated"


def _rotated_image(t: OrderedTriangle) -> tuple[OrderedTriangle, tuple[tuple[int, int], ...]] | None:
    """The 180-degree rotated copy of t in the adjacent hypersimplex one rank up.

    Edge {a,b} (third vertex c) goes to {a|c, b|c}.  Only defined for triangles
    of Delta_1 and for the "star" triangles {il,jl,kl} of Delta_2.
    """
    vs = t.vertices
    k = card(vs[0])
    if k == 1:
        pass
    elif k == 2:
        common = vs[0] & vs[1] & vs[2]
        if not common:
            return None
    else:
        return None
    image_vertices = {}
    for e in t.edges:
        a, b = e
        c = next(v for v in vs if v not in e)
        image_vertices[e] = (a | c, b | c)
    tri_vs = sorted({m for pair in image_vertices.values() for m in pair}, key=order_key)
    face = next(f for f in triangle_faces() if set(f.vertices) == set(tri_vs))
    image = ordered_triangle(face)
    corr = []
    for e in t.edges:
        a2, b2 = image_vertices[e]
        canon, sign = canonical_edge(a2, b2)
        corr.append((image.edges.index(canon), sign))
    return image, tuple(corr)


def _invert(corr):
    inv = [None] * 3
    for i, (j, s) in enumerate(corr):
        inv[j] = (i, s)
    return tuple(inv)


@lru_cache(maxsize=None)
def all_related_pairs() -> tuple[RelatedPair, ...]:
    """All ordered pairs (T, T*) of distinct related triangular subgraphs."""
    hosts = triangle_hosts()
    out = []
    identity = ((0, 1), (1, 1), (2, 1))
    for a in hosts:
        for b in hosts:
            if a is not b and a.triangle == b.triangle:
                out.append(RelatedPair(a, b, identity, "same"))
    for a in hosts:
        rot = _rotated_image(a.triangle)
        if rot is None:
            continue
        image, corr = rot
        for b in hosts:
            if b.triangle == image:
                out.append(RelatedPair(a, b, corr, "rotated"))
                out.append(RelatedPair(b, a, _invert(corr), "rotated"))
    return tuple(out)


def related_pairs(host: TriangleHost) -> tuple[RelatedPair, ...]:
    return tuple(p for p in all_related_pairs() if p.first == host)


# ---------------------------------------------------------------------------
# symmetries: S4 relabelling and complementation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryElement:
    """Relabel by ``permutation`` (image of 1..4), then complement if ``dualize``."""

    permutation: tuple[int, int, int, int] = (1, 2, 3, 4)
    dualize: bool = False

    def subset(self, m: int) -> int:
        out = mask(*(self.permutation[e - 1] for e in elements(m)))
        return FULL ^ out if self.dualize else out

    def oriented_edge(self, e: Edge) -> tuple[Edge, int]:
        return canonical_edge(self.subset(e[0]), self.subset(e[1]))

    def edge(self, e: Edge) -> Edge:
        return self.oriented_edge(e)[0]

    def face(self, f: Face) -> Face:
        image = {self.subset(v) for v in f.vertices}
        for g in all_faces():
            if set(g.vertices) == image:
                return g
        raise AssertionError("faces are closed under symmetries")

    def __call__(self, x: Union[int, tuple, Face]):
        if isinstance(x, Face):
            return self.face(x)
        if isinstance(x, tuple):
            return self.edge(x)
        return self.subset(x)

    def compose(self, other: "SymmetryElement") -> "SymmetryElement":
        """self after other."""
        perm = tuple(self.permutation[other.permutation[i] - 1] for i in range(4))
        return SymmetryElement(perm, self.dualize != other.dualize)

    @property
    def is_identity(self) -> bool:
        return self.permutation == (1, 2, 3, 4) and not self.dualize


def apply_symmetry(g: SymmetryElement, x):
    return g(x)


def s4() -> Iterator[SymmetryElement]:
    for p in permutations((1, 2, 3, 4)):
        yield SymmetryElement(p, False)


def symmetry_group() -> Iterator[SymmetryElement]:
    for d in (False, True):
        for p in permutations((1, 2, 3, 4)):
            yield SymmetryElement(p, d)


# ---------------------------------------------------------------------------
# DOT / JSON export of Gamma
# ---------------------------------------------------------------------------


def gamma_dot() -> str:
    lines = ["graph Gamma {"]
    for idx, f in enumerate(all_faces()):
        lines.append(f'  subgraph "cluster_{idx}" {{')
        lines.append(f'    label="{f.name}";')
        for v in f.vertices:
            lines.append(f'    "{f.name}:{label(v)}";')
        for e in f.edges:
            lines.append(
                f'    "{f.name}:{label(e[0])}" -- "{f.name}:{label(e[1])}" '
                f'[label="{f.name}:{label(e[0])}-{label(e[1])}"];'
            )
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def gamma_json() -> dict:
    nodes = [f"{f.name}:{label(v)}" for f in all_faces() for v in f.vertices]
    edges = [
        {"id": f"{f.name}:{edge_label(e)}", "source": f"{f.name}:{label(e[0])}", "target": f"{f.name}:{label(e[1])}"}
        for e, f in gamma_pairs()
    ]
    return {
        "components": [f.name for f in all_faces()],
        "node_count": len(nodes),
        "edge_count": len(edges),
        "nodes": nodes,
        "edges": edges,
    }
