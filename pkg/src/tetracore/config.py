"""Points of the space of tetrahedra near the flag at infinity E4 < E34 < E234.

A configuration is stored as 14 raw Pluecker vectors, one per proper nonempty
subset I, each defined up to scale.  Coordinates of a k-vector are indexed by
the k-subsets in the fixed total order, so coordinate 0 is always the one
indexed by the base subset 1, 12 or 123.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .combinatorics import (
    SUBSETS,
    Edge,
    all_edges,
    all_faces,
    base,
    canonical_edge,
    card,
    edge_rank,
    elements,
    label,
    mask,
    parse_subset,
    precedes,
    subsets_of_rank,
)
from .exact import (
    UniPoly,
    UniRat,
    determinant,
    format_rat,
    inverse,
    leading_at_order,
    mat_mul,
    rat,
)

# subset K used in the edge coordinate x_{I,J} = f_{J,K} - f_{I,K}
EDGE_REFERENCE = {1: mask(2), 2: mask(1, 3), 3: mask(1, 2, 4)}

FLAG_KEYS = (
    (mask(1), mask(2)),
    (mask(1), mask(3)),
    (mask(1), mask(4)),
    (mask(1, 2), mask(1, 3)),
    (mask(1, 2), mask(1, 4)),
    (mask(1, 2, 3), mask(1, 2, 4)),
)

# order used to rebuild all subspaces from flag and edge coordinates
RECONSTRUCTION_ORDER = tuple(
    parse_subset(s) for s in "1 12 123 2 13 3 23 124 14 4 24 134 34 234".split()
)


class SingularMatrixError(ValueError):
    pass


class GeneralPositionError(ValueError):
    """A configuration (or a limit) left the affine cell of the flag at infinity."""


class InconsistentChartError(ValueError):
    pass


class SamplingAbort(RuntimeError):
    pass


def _coord_index(k: int) -> dict[int, int]:
    return {s: i for i, s in enumerate(subsets_of_rank(k))}


def minors(columns: Sequence[Sequence]) -> tuple:
    """Pluecker vector of the span of ``columns`` (k vectors in Q^4 or any ring)."""
    k = len(columns)
    out = []
    for rows in combinations(range(4), k):
        m = [[columns[c][r] for c in range(k)] for r in rows]
        out.append(_det_generic(m))
    return tuple(out)


def _det_generic(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        sub = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = m[0][j] * _det_generic(sub)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class TetraConfig:
    plueckers: Mapping[int, tuple[Fraction, ...]]

    def vector(self, s: int) -> tuple[Fraction, ...]:
        return self.plueckers[s]

    def to_json(self) -> dict:
        return {"plueckers": {label(s): [format_rat(v) for v in self.plueckers[s]] for s in SUBSETS}}

    @classmethod
    def from_json(cls, data: Mapping) -> "TetraConfig":
        raw = data["plueckers"]
        return cls({parse_subset(k): tuple(rat(v) for v in vals) for k, vals in raw.items()})

    def relabel(self, permutation: Sequence[int]) -> "TetraConfig":
        """The configuration sigma.p with pi_I(sigma.p) = pi_{sigma^-1(I)}(p)."""
        inv = {permutation[i]: i + 1 for i in range(4)}
        out = {}
        for s in SUBSETS:
            pre = mask(*(inv[e] for e in elements(s)))
            out[s] = self.plueckers[pre]
        return TetraConfig(out)


def config_from_matrix(g: Sequence[Sequence]) -> TetraConfig:
    """pi_I = span of the columns g e_i, i in I."""
    g = [[rat(v) for v in row] for row in g]
    if determinant(g) == 0:
        raise SingularMatrixError("matrix is singular")
    cols = [[g[r][c] for r in range(4)] for c in range(4)]
    return TetraConfig({s: minors([cols[i - 1] for i in elements(s)]) for s in SUBSETS})


def is_general_position(c: TetraConfig) -> bool:
    """Every pi_I is transverse to the flag at infinity.

    For a k-plane this is the nonvanishing of its Pluecker coordinate indexed by
    the base subset: that coordinate is the pivot of the row-reduced sections
    s_I, which exist exactly when it is nonzero.
    """
    return all(c.plueckers[s][0] != 0 for s in SUBSETS)


def failing_normalisation(c: TetraConfig) -> list[str]:
    return [label(s) for s in SUBSETS if c.plueckers[s][0] == 0]


@dataclass(frozen=True)
class NormalizedChart:
    f: Mapping[tuple[int, int], Fraction]
    flag: tuple[Fraction, ...]
    x: Mapping[Edge, Fraction]

    def oriented_x(self, a: int, b: int) -> Fraction:
        e, sign = canonical_edge(a, b)
        return sign * self.x[e]

    def edge_assignment(self) -> dict:
        """Variables ("x", edge) -> value, for evaluating U-level relations."""
        return {("x", e): v for e, v in self.x.items()}


def _f_table(plueckers: Mapping[int, Sequence]) -> dict[tuple[int, int], Fraction]:
    f = {}
    for s in SUBSETS:
        k = card(s)
        vec = plueckers[s]
        piv = vec[0]
        for j, t in enumerate(subsets_of_rank(k)):
            f[(s, t)] = vec[j] / piv
    return f


def sections(f: Mapping[tuple[int, int], Fraction]) -> dict[int, tuple[Fraction, ...]]:
    """The local sections s_I, row-reduced against the flag at infinity."""
    one, zero = Fraction(1), Fraction(0)
    s = {}
    for I in SUBSETS:
        k = card(I)
        if k == 1:
            s[I] = (one, f[(I, mask(2))], f[(I, mask(3))], f[(I, mask(4))])
        elif k == 2:
            s[I] = (zero, one, f[(I, mask(1, 3))], f[(I, mask(1, 4))])
        else:
            s[I] = (zero, zero, one, f[(I, mask(1, 2, 4))])
    s[0b1111] = (zero, zero, zero, one)
    return s


def _edge_coordinates(f) -> dict[Edge, Fraction]:
    x = {}
    for e in all_edges():
        K = EDGE_REFERENCE[edge_rank(e)]
        x[e] = f[(e[1], K)] - f[(e[0], K)]
    return x


def lemma_residuals(f, x) -> dict[Edge, tuple[Fraction, ...]]:
    """s_J - s_I - x_{I,J} s_{I|J} for every edge; all zero on a valid chart."""
    s = sections(f)
    return {
        e: tuple(sj - si - x[e] * su for sj, si, su in zip(s[e[1]], s[e[0]], s[e[0] | e[1]]))
        for e in all_edges()
    }


def normalize(c: TetraConfig) -> NormalizedChart:
    if not is_general_position(c):
        raise GeneralPositionError(f"zero normalisation coordinate at {failing_normalisation(c)}")
    f = _f_table(c.plueckers)
    x = _edge_coordinates(f)
    bad = [e for e, r in lemma_residuals(f, x).items() if any(r)]
    if bad:
        raise InconsistentChartError(f"section identity fails on {len(bad)} edges")
    return NormalizedChart(f, tuple(f[key] for key in FLAG_KEYS), x)


def reconstruct_chart(flag: Sequence, x: Mapping[Edge, Fraction]) -> NormalizedChart:
    """Rebuild every f_{I,J} from the six flag coordinates and the 24 edge coordinates."""
    flag = [rat(v) for v in flag]
    x = {e: rat(v) for e, v in x.items()}
    one, zero = Fraction(1), Fraction(0)
    s: dict[int, tuple] = {
        mask(1): (one, flag[0], flag[1], flag[2]),
        mask(1, 2): (zero, one, flag[3], flag[4]),
        mask(1, 2, 3): (zero, zero, one, flag[5]),
        0b1111: (zero, zero, zero, one),
    }
    known = [mask(1), mask(1, 2), mask(1, 2, 3)]
    for J in RECONSTRUCTION_ORDER[3:]:
        for I in known:
            if card(I) == card(J) and card(I ^ J) == 2 and (I | J) in s:
                break
        else:
            raise AssertionError(f"no predecessor edge for {label(J)}")
        e, sign = canonical_edge(I, J)
        xv = sign * x[e]
        s[J] = tuple(a + xv * b for a, b in zip(s[I], s[I | J]))
        known.append(J)
    plueckers = {}
    for J in SUBSETS:
        plueckers[J] = minors(_spanning(J, s))
    f = _f_table(plueckers)
    chart = NormalizedChart(f, tuple(f[key] for key in FLAG_KEYS), _edge_coordinates(f))
    mismatched = [e for e in all_edges() if chart.x[e] != x[e]]
    if mismatched:
        raise InconsistentChartError(f"edge coordinates not reproduced on {len(mismatched)} edges")
    return chart


def _spanning(J: int, s) -> list:
    """Vectors spanning pi_J built from sections: s_a, s_ab, s_abc along a chain in J."""
    k = card(J)
    if k == 1:
        return [s[J]]
    lines = [m for m in SUBSETS if card(m) == 1 and m & J]
    if k == 2:
        return [s[lines[0]], s[J]]
    planes = [m for m in SUBSETS if card(m) == 2 and m & J == m]
    plane = planes[0]
    line = next(m for m in lines if m & plane)
    return [s[line], s[plane], s[J]]


def projectively_equal(u: Sequence, v: Sequence) -> bool:
    return all(u[i] * v[j] == u[j] * v[i] for i in range(len(u)) for j in range(i + 1, len(u)))


def n_k(c: TetraConfig, k: int) -> int:
    """Number of distinct k-planes among pi_I, |I| = k."""
    reps: list = []
    for s in subsets_of_rank(k):
        v = c.plueckers[s]
        if not any(projectively_equal(v, r) for r in reps):
            reps.append(v)
    return len(reps)


def split_counts(c: TetraConfig) -> tuple[int, int, int]:
    return tuple(n_k(c, k) for k in (1, 2, 3))


def block_partition(c: TetraConfig, k: int) -> list[list[int]]:
    blocks: list[list[int]] = []
    for s in subsets_of_rank(k):
        for b in blocks:
            if projectively_equal(c.plueckers[b[0]], c.plueckers[s]):
                b.append(s)
                break
        else:
            blocks.append([s])
    return blocks


def sample_config(seed: int, count: int, *, stats: dict | None = None, max_rejections: int = 10**6) -> list[TetraConfig]:
    """Deterministic general-position configurations from integer matrices in [-9, 9].

    Uses Python's ``random.Random`` (MT19937) seeded with ``seed``; the 16 matrix
    entries are drawn row by row with ``randint(-9, 9)``.  A draw is rejected if
    the matrix is singular, the configuration is not in general position, or
    some edge coordinate vanishes.
    """
    rng = random.Random(seed)
    out: list[TetraConfig] = []
    counts = {"singular": 0, "not_general": 0, "zero_edge": 0}
    while len(out) < count:
        if sum(counts.values()) > max_rejections:
            raise SamplingAbort(f"more than {max_rejections} rejections")
        g = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)]
        if determinant(g) == 0:
            counts["singular"] += 1
            continue
        c = config_from_matrix(g)
        if not is_general_position(c):
            counts["not_general"] += 1
            continue
        if any(v == 0 for v in normalize(c).x.values()):
            counts["zero_edge"] += 1
            continue
        out.append(c)
    if stats is not None:
        stats.update(counts)
        stats["accepted"] = len(out)
    return out


def sample_matrices(seed: int, count: int) -> list[list[list[int]]]:
    """The matrices behind ``sample_config(seed, count)``, in the same order."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)]
        if determinant(g) == 0:
            continue
        c = config_from_matrix(g)
        if not is_general_position(c) or any(v == 0 for v in normalize(c).x.values()):
            continue
        out.append(g)
    return out


# ---------------------------------------------------------------------------
# one-parameter degenerations
# ---------------------------------------------------------------------------


def compound(m: Sequence[Sequence], k: int) -> list[list]:
    """k-th compound matrix: entry (I, J) is the minor with rows I, columns J."""
    idx = list(combinations(range(4), k))
    return [[_det_generic([[m[r][c] for c in cols] for r in rows]) for cols in idx] for rows in idx]


@dataclass(frozen=True)
class OneParamWeights:
    a: tuple[int, int, int, int]

    def weight(self, s: int) -> int:
        return sum(self.a[j - 1] for j in elements(s))


@dataclass
class ConfigCurve:
    plueckers_t: dict[int, list[UniRat]]

    def at(self, t) -> TetraConfig:
        t = rat(t)
        return TetraConfig({s: tuple(v(t) for v in vec) for s, vec in self.plueckers_t.items()})

    def to_json(self) -> dict:
        return {
            "plueckers_t": {
                label(s): [
                    {"num": [format_rat(c) for c in v.num.coeffs], "den": [format_rat(c) for c in v.den.coeffs]}
                    for v in vec
                ]
                for s, vec in self.plueckers_t.items()
            }
        }

    def edge_coordinates(self) -> dict[Edge, UniRat]:
        f = {}
        for s in SUBSETS:
            vec = self.plueckers_t[s]
            for j, t in enumerate(subsets_of_rank(card(s))):
                f[(s, t)] = vec[j] / vec[0]
        return {e: f[(e[1], EDGE_REFERENCE[edge_rank(e)])] - f[(e[0], EDGE_REFERENCE[edge_rank(e)])] for e in all_edges()}


@dataclass
class Degeneration:
    curve: ConfigCurve
    limit: TetraConfig
    core_limit: object  # core.CorePoint
    weights: OneParamWeights
    frame: list | None = None

    @property
    def split(self) -> tuple[int, int, int]:
        return split_counts(self.limit)


def degeneration_curve(c: TetraConfig, w: OneParamWeights, frame: Sequence[Sequence] | None = None) -> ConfigCurve:
    """The curve t -> mu(t).c with mu(t) = frame . diag(t^a) . frame^-1 (frame defaults to 1).

    Weights are shifted to be nonnegative; this rescales each Pluecker vector by
    a power of t and does not move the curve.
    """
    lo = min(w.a)
    shifted = OneParamWeights(tuple(a - lo for a in w.a))
    plk = {}
    for k in (1, 2, 3):
        idx = subsets_of_rank(k)
        if frame is None:
            left = right = None
        else:
            left = compound(frame, k)
            right = compound(inverse(frame), k)
        for s in idx:
            vec = list(c.plueckers[s])
            if right is not None:
                vec = [sum((right[i][j] * vec[j] for j in range(len(vec))), Fraction(0)) for i in range(len(vec))]
            poly = [UniPoly.monomial(v, shifted.weight(t)) for v, t in zip(vec, idx)]
            if left is not None:
                poly = [sum((left[i][j] * poly[j] for j in range(len(poly))), UniPoly()) for i in range(len(poly))]
            plk[s] = [UniRat(p) for p in poly]
    return ConfigCurve(plk)


def degenerate_and_limit(c: TetraConfig, w: OneParamWeights, frame: Sequence[Sequence] | None = None) -> Degeneration:
    from .core import CorePoint

    if not is_general_position(c):
        raise GeneralPositionError("seed configuration is not in general position")
    curve = degeneration_curve(c, w, frame)
    limit = TetraConfig({s: tuple(leading_at_order(vec)) for s, vec in curve.plueckers_t.items()})
    if not is_general_position(limit):
        raise GeneralPositionError(f"limit leaves the chart: zero normalisation coordinate at {failing_normalisation(limit)}")
    xt = curve.edge_coordinates()
    faces = {}
    for face in all_faces():
        vec = [xt[e] for e in face.edges]
        if all(v.is_zero() for v in vec):
            raise ValueError(f"edge coordinates vanish identically on {face.name}")
        faces[face.name] = leading_at_order(vec)
    return Degeneration(curve, limit, CorePoint.from_face_vectors(faces), w, [list(r) for r in frame] if frame else None)


def configs_to_json(configs: Sequence[TetraConfig]) -> str:
    return json.dumps({"configs": [c.to_json() for c in configs]}, indent=1, sort_keys=True)


class SearchExhausted(RuntimeError):
    """No degeneration with the requested split was found within the trial budget."""


def split_types(c: TetraConfig) -> tuple[tuple[int, ...], ...]:
    """Block sizes (descending) of the k-planes for k = 1, 2, 3."""
    return tuple(tuple(sorted((len(b) for b in block_partition(c, k)), reverse=True)) for k in (1, 2, 3))


def parse_split(text: str) -> tuple[tuple[int, ...], ...]:
    """'31,42,31' -> ((3, 1), (4, 2), (3, 1))."""
    parts = text.split(",")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"split must look like 31,51,22, got {text!r}")
    out = tuple(tuple(sorted((int(ch) for ch in p), reverse=True)) for p in parts)
    for k, p in zip((1, 2, 3), out):
        if sum(p) != len(subsets_of_rank(k)) or len(p) != 2:
            raise ValueError(f"{text!r}: rank-{k} part must split {len(subsets_of_rank(k))} into two blocks")
    return out


def minimal_split_search(
    g: Sequence[Sequence],
    seed: int,
    *,
    target: tuple | None = None,
    max_tries: int = 20000,
) -> Degeneration:
    """Find weights and a frame whose degeneration of config_from_matrix(g) is minimally split.

    Frames are g . M with M drawn from {-1, 0, 1} (zero twice as likely) and
    weights from {0, ..., 3}; both come from random.Random(seed).  With
    ``target`` the limit must also have those block sizes.
    """
    c = config_from_matrix(g)
    rng = random.Random(seed)
    for _ in range(max_tries):
        m = [[rng.choice((0, 0, 1, -1)) for _ in range(4)] for _ in range(4)]
        w = OneParamWeights(tuple(rng.randint(0, 3) for _ in range(4)))
        if determinant(m) == 0:
            continue
        frame = mat_mul(g, m)
        curve = degeneration_curve(c, w, frame)
        limit = TetraConfig({s: tuple(leading_at_order(vec)) for s, vec in curve.plueckers_t.items()})
        if split_counts(limit) != (2, 2, 2) or not is_general_position(limit):
            continue
        if target is not None and split_types(limit) != target:
            continue
        return degenerate_and_limit(c, w, frame)
    raise SearchExhausted(f"no minimally split degeneration{'' if target is None else f' of type {target}'} in {max_tries} tries")
