"""Sparse polynomials over Q(zeta_m) and polynomial differential forms.

Terms are stored as ``{exponent tuple: CycNum}``.  Canonical iteration uses
graded lexicographic order with x_1 > x_2 > ... > x_n.
"""

from __future__ import annotations

import heapq
import math
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exactnum import CycNum, ConductorMismatch, field

VARNAMES = "xyzw"


class NotDivisible(ArithmeticError):
    """The divisor does not divide the dividend exactly."""


class NotHomogeneous(ValueError):
    """Coefficients of a form do not share a common total degree."""


def grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


def _scalar(m: int, c) -> CycNum:
    if isinstance(c, CycNum):
        if c.m != m:
            raise ConductorMismatch(f"conductor {m} vs {c.m}")
        return c
    return CycNum.from_rational(m, c)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class MPoly:
    """Immutable sparse polynomial in ``nvars`` variables over Q(zeta_m)."""

    __slots__ = ("nvars", "m", "terms", "_raw", "_hash")

    def __init__(self, nvars: int, m: int, terms: Mapping[tuple[int, ...], CycNum] | None = None):
        self.nvars = nvars
        self.m = m
        self.terms = {e: c for e, c in (terms or {}).items() if c}
        self._raw = None
        self._hash = None

    @classmethod
    def _trusted(cls, nvars: int, m: int, terms: dict) -> MPoly:
        p = cls.__new__(cls)
        p.nvars, p.m, p.terms, p._raw, p._hash = nvars, m, terms, None, None
        return p

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, m: int) -> MPoly:
        return cls._trusted(nvars, m, {})

    @classmethod
    def const(cls, nvars: int, m: int, c=1) -> MPoly:
        c = _scalar(m, c)
        return cls._trusted(nvars, m, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars: int, m: int, i: int) -> MPoly:
        e = [0] * nvars
        e[i] = 1
        return cls._trusted(nvars, m, {tuple(e): CycNum.one(m)})

    @classmethod
    def monomial(cls, exps: Sequence[int], m: int, c=1) -> MPoly:
        c = _scalar(m, c)
        return cls._trusted(len(exps), m, {tuple(exps): c} if c else {})

    @classmethod
    def linear(cls, coeffs: Sequence[CycNum], m: int) -> MPoly:
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = _scalar(m, c)
        return cls._trusted(n, m, terms)

    # -- basic queries ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def homogeneous_degree(self) -> int | None:
        """Common total degree of all terms, None if inhomogeneous or zero."""
        degs = {sum(e) for e in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self) -> bool:
        return not self.terms or self.homogeneous_degree() is not None

    def sorted_terms(self) -> list[tuple[tuple[int, ...], CycNum]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading_term(self) -> tuple[tuple[int, ...], CycNum]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def coefficient(self, exps: tuple[int, ...]) -> CycNum:
        return self.terms.get(exps, CycNum.zero(self.m))

    def _check(self, other: MPoly) -> None:
        if other.nvars != self.nvars:
            raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
        if other.m != self.m:
            raise ConductorMismatch(f"conductor {self.m} vs {other.m}")

    def __eq__(self, other) -> bool:
        if isinstance(other, MPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, CycNum)):
            return self == MPoly.const(self.nvars, self.m, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic ---------------------------------------------------

    def _lift(self, other) -> MPoly:
        if isinstance(other, MPoly):
            self._check(other)
            return other
        return MPoly.const(self.nvars, self.m, other)

    def __add__(self, other) -> MPoly:
        other = self._lift(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e)
            if s is None:
                terms[e] = c
            else:
                s = s + c
                if s:
                    terms[e] = s
                else:
                    del terms[e]
        return MPoly._trusted(self.nvars, self.m, terms)

    __radd__ = __add__

    def __neg__(self) -> MPoly:
        return MPoly._trusted(self.nvars, self.m, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> MPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> MPoly:
        return (-self) + other

    def scale(self, c) -> MPoly:
        c = _scalar(self.m, c)
        if not c:
            return MPoly.zero(self.nvars, self.m)
        if c.is_one():
            return self
        return MPoly._trusted(self.nvars, self.m, {e: v * c for e, v in self.terms.items()})

    def raw(self) -> tuple[int, list[tuple[tuple[int, ...], list[tuple[int, int]]]]]:
        """Common denominator and sparse integer numerators of every term."""
        if self._raw is None:
            D = reduce(_lcm, (c.den for c in self.terms.values()), 1)
            rows = []
            for e, c in self.terms.items():
                s = D // c.den
                rows.append((e, [(k, v * s) for k, v in enumerate(c.num) if v]))
            self._raw = (D, rows)
        return self._raw

    def __mul__(self, other) -> MPoly:
        if not isinstance(other, MPoly):
            if isinstance(other, (int, CycNum)) or hasattr(other, "denominator"):
                return self.scale(other)
            return NotImplemented
        self._check(other)
        if not self.terms or not other.terms:
            return MPoly.zero(self.nvars, self.m)
        F = field(self.m)
        phi = F.phi
        Da, ra = self.raw()
        Db, rb = other.raw()
        if min(len(ra), len(rb)) >= _KRONECKER_MIN and len(ra) * len(rb) > _KRONECKER_PAIRS:
            out = _kronecker_mul(self, other)
            if out is not None:
                return out
        acc: dict[tuple[int, ...], list[int]] = {}
        n = self.nvars
        width = 2 * phi - 1
        for ea, va in ra:
            for eb, vb in rb:
                e = tuple([ea[i] + eb[i] for i in range(n)]) if n != 1 else (ea[0] + eb[0],)
                row = acc.get(e)
                if row is None:
                    row = acc[e] = [0] * width
                for i, x in va:
                    for j, y in vb:
                        row[i + j] += x * y
        den = Da * Db
        m = self.m
        high = F.high
        terms = {}
        for e, row in acc.items():
            out = row[:phi]
            for k, hrow in enumerate(high):
                c = row[phi + k]
                if c:
                    for j, r in hrow:
                        out[j] += c * r
            if any(out):
                terms[e] = CycNum(m, out, den)
        return MPoly._trusted(self.nvars, m, terms)

    def __rmul__(self, other) -> MPoly:
        return self.__mul__(other)

    def __pow__(self, k: int) -> MPoly:
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.const(self.nvars, self.m, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def diff(self, i: int) -> MPoly:
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                terms[tuple(f)] = c * e[i]
        return MPoly._trusted(self.nvars, self.m, terms)

    def monic(self) -> MPoly:
        """Scale so the graded-lex leading coefficient is 1."""
        if not self.terms:
            return self
        return self.scale(self.leading_term()[1].inverse())

    def shift(self, exps: Sequence[int]) -> MPoly:
        """Multiply by the monomial x^exps."""
        n = self.nvars
        return MPoly._trusted(
            n, self.m, {tuple(e[i] + exps[i] for i in range(n)): c for e, c in self.terms.items()}
        )

    def min_exponent(self, i: int) -> int:
        """Largest k such that x_i^k divides self (infinite for zero, reported as a large int)."""
        if not self.terms:
            return 1 << 30
        return min(e[i] for e in self.terms)

    def pullback(self, change: LinearChange) -> MPoly:
        return change.pull_poly(self)

    def __call__(self, *values: CycNum) -> CycNum:
        total = CycNum.zero(self.m)
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    # -- encoding and display -----------------------------------------

    def to_json(self) -> list[dict]:
        return [{"exp": list(e), "coeff": c.to_json()} for e, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, nvars: int, m: int, data: Iterable[Mapping]) -> MPoly:
        out = MPoly.zero(nvars, m)
        for t in data:
            e = tuple(int(k) for k in t["exp"])
            if len(e) != nvars or min(e, default=0) < 0:
                raise ValueError(f"bad exponent vector {t['exp']!r}")
            out = out + MPoly.monomial(e, m, CycNum.from_json(m, t["coeff"]))
        return out

    def __repr__(self) -> str:
        return f"MPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = (
            VARNAMES[: self.nvars] if self.nvars <= len(VARNAMES) else
            [f"x{i + 1}" for i in range(self.nvars)]
        )
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (names[i] if k == 1 else f"{names[i]}^{k}") for i, k in enumerate(e) if k
            )
            cs = str(c)
            if not mono:
                parts.append(cs if c.is_rational() else f"({cs})")
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{cs}*{mono}" if c.is_rational() else f"({cs})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


# packing pays off only for products of two sizeable, fairly dense factors
_KRONECKER_PAIRS = 2000
_KRONECKER_MIN = 24


def _kronecker_mul(a: MPoly, b: MPoly) -> MPoly | None:
    """Product by packing (total degree, leading exponents, zeta power) into one big integer.

    Returns None when the packed layout would be mostly empty.
    """
    F = field(a.m)
    phi, high = F.phi, F.high
    W = 2 * phi - 1
    n = a.nvars
    Da, ra = a.raw()
    Db, rb = b.raw()

    def extent(rows):
        ts = [sum(e) for e, _ in rows]
        tops = [max(e[i] for e, _ in rows) for i in range(n - 1)]
        big = max((abs(v) for _, vr in rows for _, v in vr), default=0)
        return min(ts), max(ts), tops, big

    ta0, ta1, ma, ca = extent(ra)
    tb0, tb1, mb, cb = extent(rb)
    radix = [ta1 + tb1 - ta0 - tb0 + 1] + [x + y + 1 for x, y in zip(ma, mb)]
    # weights[i] is the slot stride of digit i; the zeta power has stride 1
    weights = [W] * n
    for i in range(n - 2, -1, -1):
        weights[i] = weights[i + 1] * radix[i + 1]
    slots = weights[0] * radix[0]
    if slots > 8 * W * len(ra) * len(rb):
        return None
    bound = min(len(ra), len(rb)) * phi * ca * cb
    nb = (bound.bit_length() + 2 + 7) // 8

    def pack(rows, t0):
        pos = bytearray(slots * nb)
        neg = bytearray(slots * nb)
        for e, vr in rows:
            base = (sum(e) - t0) * weights[0]
            for i in range(n - 1):
                base += e[i] * weights[i + 1]
            for k, v in vr:
                o = (base + k) * nb
                if v > 0:
                    pos[o:o + nb] = v.to_bytes(nb, "little")
                else:
                    neg[o:o + nb] = (-v).to_bytes(nb, "little")
        return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")

    half = 1 << (8 * nb - 1)
    digit_zero = bytes(nb - 1) + b"\x80"
    offset = int.from_bytes(digit_zero * slots, "little")
    data = (pack(ra, ta0) * pack(rb, tb0) + offset).to_bytes(slots * nb, "little")
    empty = digit_zero * W
    step = W * nb
    den = Da * Db
    t0 = ta0 + tb0
    terms = {}
    for blk in range(slots // W):
        o = blk * step
        chunk = data[o:o + step]
        if chunk == empty:
            continue
        row = [int.from_bytes(chunk[j:j + nb], "little") - half for j in range(0, step, nb)]
        out = row[:phi]
        for k, hrow in enumerate(high):
            c = row[phi + k]
            if c:
                for j, r in hrow:
                    out[j] += c * r
        if not any(out):
            continue
        rest, e = blk, []
        for i in range(n - 1, 0, -1):
            rest, x = divmod(rest, radix[i])
            e.append(x)
        e.reverse()
        t = rest + t0
        terms[tuple(e) + (t - sum(e),)] = CycNum(a.m, out, den)
    return MPoly._trusted(n, a.m, terms)


def lincomb(pairs: Iterable[tuple[CycNum, MPoly]], nvars: int, m: int) -> MPoly:
    """sum c_k f_k, accumulated on integer numerators over one common denominator."""
    pairs = [(c, f) for c, f in pairs if c and f]
    if not pairs:
        return MPoly.zero(nvars, m)
    F = field(m)
    phi = F.phi
    D = 1
    for c, f in pairs:
        D = _lcm(D, c.den * f.raw()[0])
    width = 2 * phi - 1
    acc: dict[tuple[int, ...], list[int]] = {}
    for c, f in pairs:
        Df, rows = f.raw()
        s = D // (c.den * Df)
        cn = [(k, v * s) for k, v in enumerate(c.num) if v]
        for e, vr in rows:
            row = acc.get(e)
            if row is None:
                row = acc[e] = [0] * width
            for i, x in cn:
                for j, y in vr:
                    row[i + j] += x * y
    high = F.high
    terms = {}
    for e, row in acc.items():
        out = row[:phi]
        for k, hrow in enumerate(high):
            v = row[phi + k]
            if v:
                for j, r in hrow:
                    out[j] += v * r
        if any(out):
            terms[e] = CycNum(m, out, D)
    return MPoly._trusted(nvars, m, terms)


def form_lincomb(pairs: Iterable[tuple[CycNum, "DiffForm"]], template: "DiffForm") -> "DiffForm":
    """sum c_k w_k for forms of one degree, built component by component."""
    by_index: dict[tuple[int, ...], list[tuple[CycNum, MPoly]]] = {}
    for c, w in pairs:
        if not c:
            continue
        for I, mu in w.comps.items():
            by_index.setdefault(I, []).append((c, mu))
    comps = {}
    for I, lst in by_index.items():
        v = lincomb(lst, template.nvars, template.m)
        if v:
            comps[I] = v
    return template._new(template.p, comps)


def exact_divide(num: MPoly, den: MPoly) -> MPoly:
    """Return q with q * den == num, raising NotDivisible otherwise."""
    num._check(den)
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if num.is_zero():
        return MPoly.zero(num.nvars, num.m)
    n = num.nvars
    le, lc = den.leading_term()
    if len(den.terms) == 1:
        inv = lc.inverse()
        terms = {}
        for e, c in num.terms.items():
            q = tuple(e[i] - le[i] for i in range(n))
            if min(q) < 0:
                raise NotDivisible(f"{le} does not divide term {e}")
            terms[q] = c * inv
        return MPoly._trusted(n, num.m, terms)
    if all(sum(e) == 1 for e in den.terms):
        return _divide_linear(num, den)
    lc_inv = lc.inverse()
    rest = [(e, c) for e, c in den.terms.items() if e != le]
    rem = dict(num.terms)
    # max-heap on graded-lex order; stale entries are skipped lazily
    heap = [_neg_key(e) for e in rem]
    heapq.heapify(heap)
    quot: dict[tuple[int, ...], CycNum] = {}
    while rem:
        e = heapq.heappop(heap)[1]
        if e not in rem:
            continue
        q = tuple(e[i] - le[i] for i in range(n))
        if min(q) < 0:
            raise NotDivisible(f"leading term {e} not divisible by {le}")
        c = rem.pop(e) * lc_inv
        quot[q] = c
        for f, d in rest:
            g = tuple(q[i] + f[i] for i in range(n))
            v = rem.get(g)
            t = c * d
            if v is None:
                rem[g] = -t
                heapq.heappush(heap, _neg_key(g))
            else:
                v = v - t
                if v:
                    rem[g] = v
                else:
                    del rem[g]
    return MPoly._trusted(n, num.m, quot)


def _divide_linear(num: MPoly, den: MPoly) -> MPoly:
    """Synthetic division by a linear form x_i + r (after scaling), Horner in x_i.

    The running quotient is kept as integer numerators over one common
    denominator, so no field elements are built until the end.
    """
    n, m = num.nvars, num.m
    F = field(m)
    phi, high = F.phi, F.high
    width = 2 * phi - 1
    i = min(e.index(1) for e in den.terms)
    xi = tuple(1 if j == i else 0 for j in range(n))
    lc = den.terms[xi]
    r = [(e.index(1), c / lc) for e, c in den.terms.items() if e != xi]
    Dr = reduce(_lcm, (c.den for _, c in r), 1)
    rrows = [(j, [(k, v * (Dr // c.den)) for k, v in enumerate(c.num) if v]) for j, c in r]
    slices: dict[int, dict] = {}
    for e, c in num.terms.items():
        slices.setdefault(e[i], {})[e[:i] + (0,) + e[i + 1:]] = c

    def step(cur, D, part):
        # part - r * cur, over a common denominator
        acc: dict[tuple, list[int]] = {}
        for e, vec in cur.items():
            for j, rv in rrows:
                e2 = e[:j] + (e[j] + 1,) + e[j + 1:]
                row = acc.get(e2)
                if row is None:
                    row = acc[e2] = [0] * width
                for a, x in enumerate(vec):
                    if x:
                        for b, y in rv:
                            row[a + b] -= x * y
        D2 = D * Dr
        L = D2
        for c in part.values():
            L = _lcm(L, c.den)
        s = L // D2
        out: dict[tuple, list[int]] = {}
        for e, row in acc.items():
            vec = row[:phi]
            for k, hrow in enumerate(high):
                v = row[phi + k]
                if v:
                    for j, rr in hrow:
                        vec[j] += v * rr
            out[e] = [v * s for v in vec] if s != 1 else vec
        for e, c in part.items():
            t = L // c.den
            vec = out.get(e)
            if vec is None:
                out[e] = [v * t for v in c.num]
            else:
                for j, v in enumerate(c.num):
                    vec[j] += v * t
        out = {e: vec for e, vec in out.items() if any(vec)}
        g = L
        for vec in out.values():
            g = math.gcd(g, *vec)
            if g == 1:
                break
        if g != 1:
            out = {e: [v // g for v in vec] for e, vec in out.items()}
            L //= g
        return out, L

    top = max(slices)
    quot = []
    cur: dict[tuple, list[int]] = {}
    D = 1
    for k in range(top, 0, -1):
        cur, D = step(cur, D, slices.get(k, {}))
        quot.append((k - 1, cur, D))
    if step(cur, D, slices.get(0, {}))[0]:
        raise NotDivisible("linear form does not divide")
    terms = {}
    for k, q, D in quot:
        for e, vec in q.items():
            terms[e[:i] + (k,) + e[i + 1:]] = CycNum(m, vec, D)
    out = MPoly._trusted(n, m, terms)
    return out if lc.is_one() else out.scale(lc.inverse())


def _neg_key(e: tuple[int, ...]) -> tuple:
    return (-sum(e), tuple(-a for a in e)), e


def try_divide(num: MPoly, den: MPoly) -> MPoly | None:
    try:
        return exact_divide(num, den)
    except NotDivisible:
        return None


def divides(den: MPoly, num: MPoly) -> bool:
    return try_divide(num, den) is not None


def eq_up_to_scalar(f, g) -> CycNum | None:
    """Witness c with f == c * g (c nonzero), or None.

    Accepts polynomials, forms and polyvectors alike.
    """
    if f.is_zero() or g.is_zero():
        return None
    kf, cf = f.leading_term()
    kg, cg = g.leading_term()
    if kf != kg:
        return None
    c = cf / cg
    return c if f == g.scale(c) else None


# ---------------------------------------------------------------------------
# Exterior algebra of polynomial forms
# ---------------------------------------------------------------------------


def merge_sign(I: tuple[int, ...], J: tuple[int, ...]) -> int:
    """Sign of the shuffle sorting I + J; 0 if they overlap."""
    if set(I) & set(J):
        return 0
    inv = 0
    for i in I:
        for j in J:
            if i > j:
                inv += 1
    return -1 if inv % 2 else 1


def multiindices(n: int, p: int) -> list[tuple[int, ...]]:
    return list(combinations(range(n), p))


class DiffForm:
    """Polynomial-coefficient p-form sum_I mu_I dx_I (indices 0-based, strictly increasing)."""

    __slots__ = ("nvars", "m", "p", "comps")
    kind = "form"

    def __init__(self, nvars: int, m: int, p: int, comps: Mapping[tuple[int, ...], MPoly] | None = None):
        if not 0 <= p <= nvars:
            raise ValueError(f"form degree {p} outside 0..{nvars}")
        self.nvars = nvars
        self.m = m
        self.p = p
        clean = {}
        for I, mu in (comps or {}).items():
            I = tuple(I)
            if len(I) != p or any(a >= b for a, b in zip(I, I[1:])) or (I and not 0 <= I[0] <= I[-1] < nvars):
                raise ValueError(f"bad multiindex {I} for a {p}-form in {nvars} variables")
            if mu:
                clean[I] = mu
        self.comps = clean

    @classmethod
    def _trusted(cls, nvars, m, p, comps):
        w = cls.__new__(cls)
        w.nvars, w.m, w.p, w.comps = nvars, m, p, comps
        return w

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, m: int, p: int) -> DiffForm:
        return cls._trusted(nvars, m, p, {})

    @classmethod
    def from_poly(cls, f: MPoly) -> DiffForm:
        return cls._trusted(f.nvars, f.m, 0, {(): f} if f else {})

    @classmethod
    def basis(cls, nvars: int, m: int, I: Sequence[int], coeff: MPoly | None = None) -> DiffForm:
        """coeff * dx_I for a strictly increasing index tuple I."""
        coeff = coeff if coeff is not None else MPoly.const(nvars, m, 1)
        return cls(nvars, m, len(I), {tuple(I): coeff})

    @classmethod
    def dx(cls, nvars: int, m: int, i: int) -> DiffForm:
        return cls.basis(nvars, m, (i,))

    @classmethod
    def vol(cls, nvars: int, m: int) -> DiffForm:
        return cls.basis(nvars, m, tuple(range(nvars)))

    @classmethod
    def exterior_derivative(cls, f: MPoly) -> DiffForm:
        return cls(f.nvars, f.m, 1, {(i,): f.diff(i) for i in range(f.nvars)})

    @classmethod
    def one_form(cls, coeffs: Sequence[MPoly]) -> DiffForm:
        f0 = coeffs[0]
        return cls(f0.nvars, f0.m, 1, {(i,): c for i, c in enumerate(coeffs)})

    # -- queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self) -> bool:
        return bool(self.comps)

    def coeff(self, I: Sequence[int]) -> MPoly:
        return self.comps.get(tuple(I), MPoly.zero(self.nvars, self.m))

    def top_coeff(self) -> MPoly:
        if self.p != self.nvars:
            raise ValueError("not a top-degree form")
        return self.coeff(tuple(range(self.nvars)))

    def as_poly(self) -> MPoly:
        if self.p != 0:
            raise ValueError("not a 0-form")
        return self.coeff(())

    def coeff_degree(self) -> int | None:
        """Common total degree of the coefficients (None for the zero form).

        Raises NotHomogeneous when coefficients disagree.
        """
        degs = set()
        for mu in self.comps.values():
            d = mu.homogeneous_degree()
            if d is None:
                raise NotHomogeneous("inhomogeneous coefficient")
            degs.add(d)
        if len(degs) > 1:
            raise NotHomogeneous(f"coefficient degrees {sorted(degs)}")
        return degs.pop() if degs else None

    def leading_term(self) -> tuple[tuple, CycNum]:
        I = max(self.comps)
        e, c = self.comps[I].leading_term()
        return (I, e), c

    def _check(self, other) -> None:
        if other.nvars != self.nvars:
            raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
        if other.m != self.m:
            raise ConductorMismatch(f"conductor {self.m} vs {other.m}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return (self.kind == other.kind and self.nvars == other.nvars
                and (self.p == other.p or (not self.comps and not other.comps))
                and self.comps == other.comps)

    def __hash__(self) -> int:
        return hash((self.kind, self.nvars, self.p, frozenset(self.comps.items())))

    # -- arithmetic ---------------------------------------------------

    def _new(self, p, comps):
        return type(self)._trusted(self.nvars, self.m, p, comps)

    def __add__(self, other: DiffForm) -> DiffForm:
        self._check(other)
        if other.p != self.p:
            if not other.comps:
                return self
            if not self.comps:
                return other
            raise ValueError(f"cannot add a {self.p}-form and a {other.p}-form")
        comps = dict(self.comps)
        for I, mu in other.comps.items():
            s = comps.get(I)
            s = mu if s is None else s + mu
            if s:
                comps[I] = s
            else:
                comps.pop(I, None)
        return self._new(self.p, comps)

    def __neg__(self) -> DiffForm:
        return self._new(self.p, {I: -mu for I, mu in self.comps.items()})

    def __sub__(self, other: DiffForm) -> DiffForm:
        return self + (-other)

    def scale(self, c) -> DiffForm:
        """Multiply by a scalar or a polynomial (0-form)."""
        if isinstance(c, MPoly):
            comps = {I: mu * c for I, mu in self.comps.items()}
        else:
            c = _scalar(self.m, c)
            if c.is_one():
                return self
            comps = {I: mu.scale(c) for I, mu in self.comps.items()}
        return self._new(self.p, {I: mu for I, mu in comps.items() if mu})

    def __mul__(self, c) -> DiffForm:
        return self.scale(c)

    __rmul__ = __mul__

    def wedge(self, other: DiffForm) -> DiffForm:
        self._check(other)
        if type(other) is not type(self):
            raise TypeError("cannot wedge a form with a polyvector")
        q = self.p + other.p
        if q > self.nvars:
            return self._new(min(q, self.nvars), {})
        acc: dict[tuple[int, ...], MPoly] = {}
        for I, a in self.comps.items():
            for J, b in other.comps.items():
                s = merge_sign(I, J)
                if not s:
                    continue
                K = tuple(sorted(I + J))
                t = a * b
                if s < 0:
                    t = -t
                prev = acc.get(K)
                acc[K] = t if prev is None else prev + t
        return self._new(q, {K: v for K, v in acc.items() if v})

    def __xor__(self, other: DiffForm) -> DiffForm:
        return self.wedge(other)

    def divide(self, f: MPoly) -> DiffForm:
        """Coefficient-wise exact division; raises NotDivisible."""
        return self._new(self.p, {I: exact_divide(mu, f) for I, mu in self.comps.items()})

    def pullback(self, change: LinearChange) -> DiffForm:
        return change.pull_form(self)

    # -- encoding -----------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for I in sorted(self.comps):
            for t in self.comps[I].to_json():
                t["index"] = list(I)
                terms.append(t)
        return {"nvars": self.nvars, "degree": self.p, "conductor": self.m, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping, m: int | None = None) -> DiffForm:
        m = int(data.get("conductor", m)) if m is None else m
        n = int(data["nvars"])
        p = int(data["degree"])
        comps: dict[tuple[int, ...], MPoly] = {}
        for t in data["terms"]:
            I = tuple(int(i) for i in t["index"])
            mono = MPoly.from_json(n, m, [t])
            comps[I] = comps[I] + mono if I in comps else mono
        return cls(n, m, p, comps)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"

    def _basis_name(self, I) -> str:
        names = VARNAMES if self.nvars <= len(VARNAMES) else [f"x{i + 1}" for i in range(self.nvars)]
        return "^".join(f"d{names[i]}" for i in I)

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for I in sorted(self.comps):
            name = self._basis_name(I)
            parts.append(f"({self.comps[I]})" + (f" {name}" if name else ""))
        return " + ".join(parts)


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    return a.wedge(b)


def wedge_all(forms: Sequence[DiffForm]) -> DiffForm:
    return reduce(lambda a, b: a.wedge(b), forms)


def jacobian_det(fs: Sequence[MPoly]) -> MPoly:
    """det(d f_j / d x_i), computed as the coefficient of df_1 ^ ... ^ df_n."""
    if not fs:
        raise ValueError("need at least one polynomial")
    n = fs[0].nvars
    if len(fs) != n:
        raise ValueError(f"expected {n} polynomials, got {len(fs)}")
    top = wedge_all([DiffForm.exterior_derivative(f) for f in fs])
    return top.top_coeff()


def form_coeff_degree(w: DiffForm) -> int | None:
    return w.coeff_degree()


# ---------------------------------------------------------------------------
# Linear coordinate changes
# ---------------------------------------------------------------------------


def mat_det(M: Sequence[Sequence[CycNum]]) -> CycNum:
    """Determinant by Gaussian elimination over the field."""
    n = len(M)
    if n == 0:
        raise ValueError("empty matrix")
    A = [list(row) for row in M]
    det = CycNum.one(A[0][0].m)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            return CycNum.zero(det.m)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        pv = A[col][col]
        det = det * pv
        inv = pv.inverse()
        for r in range(col + 1, n):
            if A[r][col]:
                f = A[r][col] * inv
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return det


def mat_inverse(M: Sequence[Sequence[CycNum]]) -> tuple[tuple[CycNum, ...], ...]:
    n = len(M)
    m = M[0][0].m
    one, zero = CycNum.one(m), CycNum.zero(m)
    A = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[col], A[piv] = A[piv], A[col]
        inv = A[col][col].inverse()
        A[col] = [v * inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return tuple(tuple(row[n:]) for row in A)


def mat_mul(A, B) -> tuple[tuple[CycNum, ...], ...]:
    n, k = len(A), len(B[0])
    m = A[0][0].m
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            s = CycNum.zero(m)
            for t in range(len(B)):
                a, b = A[i][t], B[t][j]
                if a and b:
                    s = s + a * b
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def _rank_one_update(M) -> tuple[list[CycNum], MPoly] | None:
    """(v, u.x) with M = I + v u^T, or None when M - I does not have rank one."""
    n = len(M)
    A = [[M[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    piv = next(((i, j) for i in range(n) for j in range(n) if A[i][j]), None)
    if piv is None:
        return None
    i0, j0 = piv
    v = [A[i][j0] for i in range(n)]
    u = [A[i0][j] / A[i0][j0] for j in range(n)]
    if any(A[i][j] != v[i] * u[j] for i in range(n) for j in range(n)):
        return None
    return v, MPoly.linear(u, M[0][0].m)


def _monomial_pattern(M) -> list[tuple[int, CycNum]] | None:
    """For a monomial matrix, row i -> (column, entry); None otherwise."""
    out = []
    for row in M:
        nz = [(j, c) for j, c in enumerate(row) if c]
        if len(nz) != 1:
            return None
        out.append(nz[0])
    return out


_IMAGE_BUDGET = 40_000


class LinearChange:
    """Coordinate substitution x -> M x, acting on polynomials and forms by pullback.

    f pulls back to f(Mx); dx_i pulls back to sum_j M_ij dx_j.
    """

    def __init__(self, matrix: Sequence[Sequence[CycNum]]):
        self.matrix = tuple(tuple(r) for r in matrix)
        n = len(self.matrix)
        if any(len(r) != n for r in self.matrix):
            raise ValueError("matrix must be square")
        self.n = n
        self.m = self.matrix[0][0].m
        self.det = mat_det(self.matrix)
        if not self.det:
            raise ZeroDivisionError("singular coordinate change")
        self._pattern = _monomial_pattern(self.matrix)
        self._rank_one = _rank_one_update(self.matrix) if self._pattern is None else None
        self._lin = [MPoly.linear(row, self.m) for row in self.matrix]
        self._powers: list[list[MPoly]] = [[MPoly.const(n, self.m, 1)] for _ in range(n)]
        self._prefix: dict[tuple[int, ...], MPoly] = {}
        self._prefix_terms = 0
        self._minors: dict[tuple, DiffForm] = {}

    @property
    def is_monomial(self) -> bool:
        return self._pattern is not None

    def inverse(self) -> LinearChange:
        return LinearChange(mat_inverse(self.matrix))

    def _power(self, i: int, k: int) -> MPoly:
        pw = self._powers[i]
        while len(pw) <= k:
            pw.append(pw[-1] * self._lin[i])
        return pw[k]

    def _image(self, e: tuple[int, ...]) -> MPoly:
        if not any(e):
            return MPoly.const(self.n, self.m, 1)
        # strip trailing zeros so prefixes are shared
        last = max(i for i, k in enumerate(e) if k)
        key = e[: last + 1]
        hit = self._prefix.get(key)
        if hit is not None:
            return hit
        head = key[:-1] + (0,) * (self.n - last)
        val = self._power(last, key[-1])
        if any(head):
            val = self._image(head[: self.n]) * val
        # bounded memo: dense images of high-degree monomials are large
        if self._prefix_terms + len(val.terms) > _IMAGE_BUDGET:
            self._prefix.clear()
            self._prefix_terms = 0
        self._prefix[key] = val
        self._prefix_terms += len(val.terms)
        return val

    def pull_poly(self, f: MPoly) -> MPoly:
        if f.nvars != self.n:
            raise ValueError("dimension mismatch")
        if self._pattern is not None:
            pat = self._pattern
            terms = {}
            for e, c in f.terms.items():
                new = [0] * self.n
                for i, k in enumerate(e):
                    if k:
                        j, a = pat[i]
                        new[j] += k
                        c = c * a**k
                terms[tuple(new)] = c
            return MPoly._trusted(self.n, self.m, terms)
        if self._rank_one is not None and f.degree() > 1:
            return self._pull_taylor(f)
        return lincomb(((c, self._image(e)) for e, c in f.terms.items()), self.n, self.m)

    def _pull_taylor(self, f: MPoly) -> MPoly:
        # M = I + v u^T, so f(Mx) = sum_k (u.x)^k / k! (D_v^k f)(x); Horner in u.x
        v, t = self._rank_one
        derivs = [f]
        while derivs[-1]:
            g = derivs[-1]
            derivs.append(lincomb(((c, g.diff(i)) for i, c in enumerate(v) if c), self.n, self.m))
        derivs.pop()
        acc = derivs[-1]
        for k in range(len(derivs) - 2, -1, -1):
            acc = derivs[k] + (t * acc).scale(Fraction(1, k + 1))
        return acc

    def pull_basis(self, I: tuple[int, ...]) -> DiffForm:
        """Pullback of dx_I: sum over J of the minor M[I, J] dx_J."""
        hit = self._minors.get(I)
        if hit is not None:
            return hit
        n, m = self.n, self.m
        comps = {}
        for J in multiindices(n, len(I)):
            if I:
                c = mat_det([[self.matrix[i][j] for j in J] for i in I])
            else:
                c = CycNum.one(m)
            if c:
                comps[J] = MPoly.const(n, m, c)
        val = DiffForm._trusted(n, m, len(I), comps)
        self._minors[I] = val
        return val

    def pull_form(self, w: DiffForm) -> DiffForm:
        if w.nvars != self.n:
            raise ValueError("dimension mismatch")
        if self._pattern is not None:
            pat = self._pattern
            comps = {}
            for I, mu in w.comps.items():
                cols = [pat[i][0] for i in I]
                scal = CycNum.one(self.m)
                for i in I:
                    scal = scal * pat[i][1]
                order = sorted(range(len(cols)), key=lambda t: cols[t])
                if _perm_parity(order):
                    scal = -scal
                comps[tuple(sorted(cols))] = self.pull_poly(mu).scale(scal)
            return DiffForm._trusted(self.n, self.m, w.p, comps)
        acc: dict[tuple[int, ...], list] = {}
        zero_exp = (0,) * self.n
        for I, mu in w.comps.items():
            pm = self.pull_poly(mu)
            for J, c in self.pull_basis(I).comps.items():
                acc.setdefault(J, []).append((c.terms[zero_exp], pm))
        comps = {}
        for J, lst in acc.items():
            v = lincomb(lst, self.n, self.m)
            if v:
                comps[J] = v
        return DiffForm._trusted(self.n, self.m, w.p, comps)


def _perm_parity(order: Sequence[int]) -> int:
    seen = [False] * len(order)
    parity = 0
    for i in range(len(order)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = order[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


def substitute(obj, change: LinearChange):
    """Pullback of a polynomial or form under x -> M x."""
    if isinstance(obj, MPoly):
        return change.pull_poly(obj)
    return change.pull_form(obj)
