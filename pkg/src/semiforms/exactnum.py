"""Exact arithmetic in a cyclotomic field Q(zeta_m).

Elements are kept in the power basis 1, z, ..., z^(phi(m)-1) modulo the
m-th cyclotomic polynomial, as an integer numerator vector over a single
positive denominator.  Keeping the reduced form at all times makes equality
and hashing structural, which the group closure relies on.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence


class ConductorMismatch(ValueError):
    """Raised when two field elements live in different cyclotomic fields."""


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    # coefficient lists, lowest degree first; den is monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1]
        out[k] = c
        if c:
            for j, dj in enumerate(den):
                num[k + j] -= c * dj
    if any(num):
        raise ArithmeticError("cyclotomic polynomial division left a remainder")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_m, lowest degree first."""
    if m < 1:
        raise ValueError("conductor must be positive")
    p = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            p = _poly_divexact(p, list(cyclotomic_polynomial(d)))
    return tuple(p)


class _Field:
    """Per-conductor tables: reduction of z^k into the power basis."""

    def __init__(self, m: int):
        self.m = m
        phi_poly = cyclotomic_polynomial(m)
        self.phi = len(phi_poly) - 1
        phi = self.phi
        # powers z^k for 0 <= k < 2m, reduced; enough for products and conjugation
        red: list[tuple[int, ...]] = []
        cur = [1] + [0] * (phi - 1)
        for _ in range(2 * m):
            red.append(tuple(cur))
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                for j in range(phi):
                    cur[j] -= top * phi_poly[j]
        self.power = red
        # sparse rows for reducing convolution products of length 2*phi-1
        self.high = [
            [(j, c) for j, c in enumerate(red[k]) if c] for k in range(phi, 2 * phi - 1)
        ]
        self.conj = [
            [(j, c) for j, c in enumerate(red[(m - k) % m]) if c] for k in range(phi)
        ]
        self.roots_order = m if m % 2 == 0 else 2 * m


@lru_cache(maxsize=None)
def field(m: int) -> _Field:
    return _Field(m)


def _normalize(num: list[int], den: int) -> tuple[tuple[int, ...], int]:
    if den < 0:
        num = [-c for c in num]
        den = -den
    g = math.gcd(den, *num)
    if g != 1:
        num = [c // g for c in num]
        den //= g
    return tuple(num), den


class CycNum:
    """Immutable element of Q(zeta_m)."""

    __slots__ = ("m", "num", "den", "_hash")

    def __init__(self, m: int, num: Sequence[int], den: int = 1, _reduced: bool = False):
        self.m = m
        if _reduced:
            self.num = tuple(num)
            self.den = den
        else:
            if den == 0:
                raise ZeroDivisionError("zero denominator")
            self.num, self.den = _normalize(list(num), den)
        self._hash = None

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, m: int) -> CycNum:
        return cls(m, (0,) * field(m).phi, 1, _reduced=True)

    @classmethod
    def one(cls, m: int) -> CycNum:
        return cls.from_rational(m, 1)

    @classmethod
    def from_rational(cls, m: int, q) -> CycNum:
        q = Fraction(q)
        phi = field(m).phi
        return cls(m, (q.numerator,) + (0,) * (phi - 1), q.denominator, _reduced=True)

    @classmethod
    def root_of_unity(cls, m: int, k: int = 1) -> CycNum:
        """zeta_m ** k."""
        return cls(m, field(m).power[k % m], 1, _reduced=True)

    @classmethod
    def from_coeffs(cls, m: int, coeffs: Iterable) -> CycNum:
        """Build sum_k coeffs[k] * zeta_m**k from a (possibly redundant) vector."""
        F = field(m)
        fr = [Fraction(c) for c in coeffs]
        if len(fr) > m:
            raise ValueError(f"expected at most {m} coefficients, got {len(fr)}")
        den = 1
        for c in fr:
            den = den * c.denominator // math.gcd(den, c.denominator)
        acc = [0] * F.phi
        for k, c in enumerate(fr):
            if c:
                s = c.numerator * (den // c.denominator)
                for j, r in enumerate(F.power[k]):
                    if r:
                        acc[j] += s * r
        return cls(m, acc, den)

    def _coerce(self, other) -> CycNum:
        if isinstance(other, CycNum):
            if other.m != self.m:
                raise ConductorMismatch(f"conductor {self.m} vs {other.m}")
            return other
        if isinstance(other, (int, Fraction)):
            return CycNum.from_rational(self.m, other)
        return NotImplemented

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self) -> bool:
        return any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def is_one(self) -> bool:
        return self.den == 1 and self.num[0] == 1 and not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.num[0], self.den)

    def __eq__(self, other) -> bool:
        if isinstance(other, CycNum):
            return self.m == other.m and self.den == other.den and self.num == other.num
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self.num[0], self.den) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.m, self.num, self.den))
        return self._hash

    # -- arithmetic ---------------------------------------------------

    def __neg__(self) -> CycNum:
        return CycNum(self.m, tuple(-c for c in self.num), self.den, _reduced=True)

    def __add__(self, other) -> CycNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            num = [a + b for a, b in zip(self.num, other.num)]
            if self.den == 1:
                return CycNum(self.m, num, 1, _reduced=True)
            return CycNum(self.m, num, self.den)
        da, db = self.den, other.den
        return CycNum(self.m, [a * db + b * da for a, b in zip(self.num, other.num)], da * db)

    __radd__ = __add__

    def __sub__(self, other) -> CycNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> CycNum:
        return (-self) + other

    def __mul__(self, other) -> CycNum:
        if isinstance(other, int):
            if other == 0:
                return CycNum.zero(self.m)
            return CycNum(self.m, [c * other for c in self.num], self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.num, other.num
        if not any(a[1:]):
            a0 = a[0]
            return CycNum(self.m, [a0 * c for c in b], self.den * other.den)
        if not any(b[1:]):
            b0 = b[0]
            return CycNum(self.m, [b0 * c for c in a], self.den * other.den)
        F = field(self.m)
        phi = F.phi
        conv = [0] * (2 * phi - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        out = conv[:phi]
        for k, row in enumerate(F.high):
            c = conv[phi + k]
            if c:
                for j, r in row:
                    out[j] += c * r
        den = self.den * other.den
        if den == 1:
            return CycNum(self.m, out, 1, _reduced=True)
        return CycNum(self.m, out, den)

    __rmul__ = __mul__

    def _mul_matrix(self) -> list[list[Fraction]]:
        # column k holds self * z^k in the power basis
        F = field(self.m)
        cols = []
        for k in range(F.phi):
            e = self * CycNum(self.m, F.power[k], 1, _reduced=True)
            cols.append([Fraction(c, e.den) for c in e.num])
        return [[cols[k][j] for k in range(F.phi)] for j in range(F.phi)]

    def inverse(self) -> CycNum:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in cyclotomic field")
        if self.is_rational():
            return CycNum(self.m, (self.den,) + (0,) * (len(self.num) - 1), self.num[0])
        A = self._mul_matrix()
        phi = len(A)
        rhs = [Fraction(1)] + [Fraction(0)] * (phi - 1)
        x = solve_rational(A, rhs)
        den = 1
        for c in x:
            den = den * c.denominator // math.gcd(den, c.denominator)
        return CycNum(self.m, [int(c * den) for c in x], den)

    def __truediv__(self, other) -> CycNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> CycNum:
        return self.inverse() * other

    def __pow__(self, k: int) -> CycNum:
        if k < 0:
            return self.inverse() ** (-k)
        result = CycNum.one(self.m)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> CycNum:
        """Galois action z -> z^-1, which is complex conjugation."""
        F = field(self.m)
        out = [0] * F.phi
        for k, c in enumerate(self.num):
            if c:
                for j, r in F.conj[k]:
                    out[j] += c * r
        return CycNum(self.m, out, self.den, _reduced=True)

    def complex_embed(self) -> complex:
        """Floating-point value at zeta_m = exp(2 pi i / m); diagnostics only."""
        z = cmath.exp(2j * math.pi / self.m)
        return sum(c * z**k for k, c in enumerate(self.num)) / self.den

    def root_of_unity_exponent(self) -> int | None:
        """Return k with self == exp(2 pi i k / M), M = roots_order; None if not a root of unity."""
        F = field(self.m)
        M = F.roots_order
        for k in range(M):
            if self == root_of_unity_ext(self.m, k):
                return k
        return None

    @property
    def coeffs(self) -> list[Fraction]:
        """Length-m coefficient vector (zero-padded power-basis coordinates)."""
        out = [Fraction(c, self.den) for c in self.num]
        return out + [Fraction(0)] * (self.m - len(out))

    # -- encoding -----------------------------------------------------

    def to_json(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    @classmethod
    def from_json(cls, m: int, data: Sequence[str | int]) -> CycNum:
        if len(data) != m:
            raise ValueError(f"expected {m} coefficients, got {len(data)}")
        return cls.from_coeffs(m, [Fraction(str(c)) for c in data])

    def __repr__(self) -> str:
        return f"CycNum({self.m}, {self})"

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.num):
            if not c:
                continue
            q = Fraction(c, self.den)
            if k == 0:
                parts.append(str(q))
            else:
                z = "z" if k == 1 else f"z^{k}"
                parts.append(z if q == 1 else f"-{z}" if q == -1 else f"{q}*{z}")
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")


@lru_cache(maxsize=None)
def root_of_unity_ext(m: int, k: int) -> CycNum:
    """exp(2 pi i k / M) where M = m for even m and 2m for odd m."""
    F = field(m)
    M = F.roots_order
    k %= M
    if M == m:
        return CycNum.root_of_unity(m, k)
    # odd m: exp(2 pi i k / 2m) = -zeta_m^((k + m) / 2) for odd k
    if k % 2 == 0:
        return CycNum.root_of_unity(m, k // 2)
    return -CycNum.root_of_unity(m, (k + m) // 2)


def solve_rational(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Solve the square nonsingular system A x = b over Q."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular rational system")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def sqrt3(m: int = 12) -> CycNum:
    """sqrt(3) = zeta_12 + zeta_12^-1; requires 12 | m."""
    if m % 12:
        raise ConductorMismatch("sqrt(3) needs a conductor divisible by 12")
    s = m // 12
    return CycNum.root_of_unity(m, s) + CycNum.root_of_unity(m, m - s)
