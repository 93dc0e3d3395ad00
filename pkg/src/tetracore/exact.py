"""Exact arithmetic: rationals, matrices over Q, rational functions in t, sparse polynomials.

Nothing in here touches floating point.  Zero tests are exact equality.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Callable, Hashable, Iterable, Mapping, Sequence

Rat = Fraction


def rat(value) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_rat(q: Fraction) -> str:
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# matrices over Q
# ---------------------------------------------------------------------------


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        row = [rat(v) for v in row]
        den = reduce(lcm, (v.denominator for v in row), 1)
        out.append([int(v * den) for v in row])
    return out


def _bareiss_echelon(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.  Returns (echelon rows, pivot columns)."""
    m = [r[:] for r in rows if any(r)]
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        prow = m[r]
        for i in range(r + 1, len(m)):
            row = m[i]
            a = row[c]
            if a == 0:
                # Bareiss step with a zero multiplier still rescales the row
                if piv != prev:
                    m[i] = [(piv * v) // prev for v in row]
                continue
            m[i] = [(piv * row[j] - a * prow[j]) // prev for j in range(ncols)]
        prev = piv
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if not rows:
        return 0
    ncols = len(rows[0]) if ncols is None else ncols
    _, pivots = _bareiss_echelon(_integer_rows(rows), ncols)
    return len(pivots)


def rank_and_kernel(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[int, list[list[Fraction]]]:
    """Exact rank over Q and a basis of the right kernel.

    Rows are cleared to integers and reduced with Bareiss elimination; the
    kernel is read off by back substitution over Fractions.
    """
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    if not rows:
        return 0, [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    ech, pivots = _bareiss_echelon(_integer_rows(rows), ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            s = sum((ech[r][j] * v[j] for j in range(c + 1, ncols) if ech[r][j]), Fraction(0))
            v[c] = -s / ech[r][c]
        basis.append(v)
    return len(pivots), basis


def rank_by_columns(rows: Sequence[Sequence]) -> int:
    """Rank via plain Gaussian elimination on the transpose (column pivoting).

    Independent of the Bareiss path; kept for cross-checking.
    """
    if not rows:
        return 0
    cols = [[rat(rows[i][j]) for i in range(len(rows))] for j in range(len(rows[0]))]
    r = 0
    ncols = len(rows)
    for c in range(ncols - 1, -1, -1):
        p = next((i for i in range(r, len(cols)) if cols[i][c] != 0), None)
        if p is None:
            continue
        cols[r], cols[p] = cols[p], cols[r]
        pr = cols[r]
        for i in range(r + 1, len(cols)):
            a = cols[i][c]
            if a:
                f = a / pr[c]
                cols[i] = [x - f * y for x, y in zip(cols[i], pr)]
        r += 1
    return r


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    return [[sum((x * y for x, y in zip(row, col)), 0) for col in zip(*b)] for row in a]


def mat_vec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), 0) for row in a]


def determinant(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free elimination with sign tracking."""
    n = len(m)
    a = [[rat(x) for x in row] for row in m]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def inverse(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    a = [[rat(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


# ---------------------------------------------------------------------------
# univariate polynomials and rational functions in t
# ---------------------------------------------------------------------------


def _trim(c: list[Fraction]) -> tuple[Fraction, ...]:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class UniPoly:
    """Polynomial in t with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _trim([rat(c) for c in coeffs])

    @classmethod
    def monomial(cls, coeff, degree: int) -> "UniPoly":
        return cls([0] * degree + [coeff])

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def order(self) -> int:
        """t-adic order (index of the lowest nonzero coefficient)."""
        if not self.coeffs:
            raise ValueError("order of the zero polynomial")
        return next(i for i, c in enumerate(self.coeffs) if c)

    def __add__(self, other):
        other = _as_unipoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        for i, c in enumerate(other.coeffs):
            a[i] += c
        return UniPoly(a)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_unipoly(other))

    def __rsub__(self, other):
        return _as_unipoly(other) - self

    def __mul__(self, other):
        other = _as_unipoly(other)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __call__(self, t) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UniPoly({[format_rat(c) for c in self.coeffs]})"


def _as_unipoly(x) -> UniPoly:
    return x if isinstance(x, UniPoly) else UniPoly([x])


class UniRat:
    """Rational function num(t)/den(t) over Q."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num, den = _as_unipoly(num), _as_unipoly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        # strip common powers of t so that order() stays cheap to read off
        if not num.is_zero():
            k = min(num.order, den.order)
            if k:
                num = UniPoly(num.coeffs[k:])
                den = UniPoly(den.coeffs[k:])
        self.num, self.den = num, den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    @property
    def order(self) -> int:
        return self.num.order - self.den.order

    @property
    def leading(self) -> Fraction:
        """Coefficient of t**order in the Laurent expansion at t = 0."""
        return self.num.coeffs[self.num.order] / self.den.coeffs[self.den.order]

    def __add__(self, other):
        other = _as_unirat(other)
        return UniRat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return UniRat(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_unirat(other))

    def __rsub__(self, other):
        return _as_unirat(other) - self

    def __mul__(self, other):
        other = _as_unirat(other)
        return UniRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_unirat(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return UniRat(self.num * other.den, self.den * other.num)

    def __call__(self, t) -> Fraction:
        d = self.den(t)
        if d == 0:
            raise ZeroDivisionError(f"pole at t={t}")
        return self.num(t) / d

    def __repr__(self):
        return f"UniRat({self.num!r}, {self.den!r})"


def _as_unirat(x) -> UniRat:
    return x if isinstance(x, UniRat) else UniRat(x)


def leading_at_order(values: Sequence[UniRat]) -> list[Fraction]:
    """Rescale a vector of rational functions by t**(-min order) and set t = 0."""
    nonzero = [v for v in values if not v.is_zero()]
    if not nonzero:
        raise ValueError("vector is identically zero")
    m = min(v.order for v in nonzero)
    return [v.leading if (not v.is_zero() and v.order == m) else Fraction(0) for v in values]


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------

Monomial = tuple  # sorted tuple of (variable, exponent)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


class SparsePoly:
    """Polynomial over Q stored as {monomial: coefficient}; zero coefficients never stored.

    Variables are arbitrary hashable, mutually comparable keys.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = rat(c)
                if c:
                    self.terms[m] = c

    @classmethod
    def var(cls, v: Hashable) -> "SparsePoly":
        return cls({((v, 1),): Fraction(1)})

    @classmethod
    def const(cls, c) -> "SparsePoly":
        return cls({(): rat(c)})

    @classmethod
    def monomial(cls, coeff, powers: Mapping[Hashable, int]) -> "SparsePoly":
        return cls({tuple(sorted((v, e) for v, e in powers.items() if e)): rat(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    @property
    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    @property
    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=-1)

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        p = SparsePoly()
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = SparsePoly()
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return SparsePoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = SparsePoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            other = _as_poly(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, point: Mapping[Hashable, Fraction] | Callable) -> Fraction:
        """Exact value at an assignment; KeyError names the first missing variable."""
        get = point if callable(point) else point.__getitem__
        total = Fraction(0)
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                try:
                    val = get(v)
                except KeyError:
                    raise KeyError(f"assignment missing variable {v!r}") from None
                if not val:
                    term = 0
                    break
                term = term * (val if e == 1 else val**e)
            total += term
        return total

    def derivative(self, v: Hashable) -> "SparsePoly":
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(v)
            if not e:
                continue
            if e == 1:
                del d[v]
            else:
                d[v] = e - 1
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, 0) + c * e
        return SparsePoly(out)

    def substitute(self, mapping: Mapping[Hashable, "SparsePoly"]) -> "SparsePoly":
        """Replace variables by polynomials (variables absent from mapping are kept)."""
        result = SparsePoly()
        cache: dict[tuple, SparsePoly] = {}
        for m, c in self.terms.items():
            term = SparsePoly.const(c)
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = _as_poly(mapping[v]) ** e
                    term = term * cache[key]
                else:
                    term = term * SparsePoly.monomial(1, {v: e})
            result = result + term
        return result

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            mono = "*".join(f"{v}" if e == 1 else f"{v}^{e}" for v, e in m)
            parts.append(f"{format_rat(c)}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _as_poly(x) -> SparsePoly:
    return x if isinstance(x, SparsePoly) else SparsePoly.const(x)


def integer_content(values: Iterable[Fraction]) -> tuple[int, int]:
    """(lcm of denominators, gcd of cleared numerators); handy for normalising vectors."""
    values = [rat(v) for v in values]
    den = reduce(lcm, (v.denominator for v in values), 1)
    g = reduce(gcd, (int(v * den) for v in values), 0)
    return den, g
