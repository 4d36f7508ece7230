"""Finite unitary reflection groups over Q(zeta_m).

Groups are built by breadth-first closure from generator matrices.  The
element list is ordered by discovery, so every derived object (hyperplane
order, chosen stabilizer generators, certificates) is reproducible.
"""

from __future__ import annotations

import json
import os
from itertools import combinations
from math import gcd, lcm
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

from .exactnum import CycNum, root_of_unity_ext, field
from .polyring import MPoly, mat_det, mat_mul

Matrix = tuple[tuple[CycNum, ...], ...]

DEFAULT_CAP = 100_000
DATA_DIR = Path(__file__).parent / "data"


class GroupSpecError(ValueError):
    """Malformed or inconsistent group input."""


class NonUnitary(GroupSpecError):
    pass


class NotAReflection(GroupSpecError):
    pass


class ClosureCapExceeded(GroupSpecError):
    pass


class CharacterError(ValueError):
    """A proposed character is not a homomorphism into the roots of unity."""


def identity(n: int, m: int) -> Matrix:
    one, zero = CycNum.one(m), CycNum.zero(m)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def conj_transpose(A: Matrix) -> Matrix:
    n = len(A)
    return tuple(tuple(A[j][i].conjugate() for j in range(n)) for i in range(n))


def is_unitary(A: Matrix) -> bool:
    n = len(A)
    return mat_mul(conj_transpose(A), A) == identity(n, A[0][0].m)


def mat_rank(A: Sequence[Sequence[CycNum]]) -> int:
    rows = [list(r) for r in A]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        for i in range(rank + 1, len(rows)):
            if rows[i][col]:
                f = rows[i][col] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def mat_sub_identity(A: Matrix) -> list[list[CycNum]]:
    return [[c - 1 if i == j else c for j, c in enumerate(row)] for i, row in enumerate(A)]


@dataclass(eq=False)
class GroupElement:
    matrix: Matrix
    index: int = -1

    @cached_property
    def det(self) -> CycNum:
        return mat_det(self.matrix)

    @cached_property
    def is_reflection(self) -> bool:
        return mat_rank(mat_sub_identity(self.matrix)) == 1

    @property
    def n(self) -> int:
        return len(self.matrix)

    def __repr__(self) -> str:
        return f"GroupElement(#{self.index})"


@dataclass(eq=False)
class Hyperplane:
    alpha: MPoly
    normal: tuple[CycNum, ...]
    stab_order: int
    stab_generator: GroupElement
    stab_elements: tuple[int, ...]

    def __repr__(self) -> str:
        return f"Hyperplane({self.alpha}, order={self.stab_order})"


class ReflectionGroup:
    """A closed finite matrix group; immutable after construction."""

    def __init__(self, name: str, generators: Sequence[GroupElement], elements: list[GroupElement],
                 gen_table: list[list[int]]):
        self.name = name
        self.generators = list(generators)
        self.elements = elements
        self.n = elements[0].n
        self.m = elements[0].matrix[0][0].m
        self.gen_table = gen_table
        self._index = {g.matrix: g.index for g in elements}
        self._products: dict[tuple[int, int], int] = {}

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"ReflectionGroup({self.name!r}, order={self.order})"

    def index_of(self, matrix: Matrix) -> int:
        return self._index[tuple(tuple(r) for r in matrix)]

    def __contains__(self, matrix) -> bool:
        return tuple(tuple(r) for r in matrix) in self._index

    def mult(self, i: int, j: int) -> int:
        """Index of elements[i] @ elements[j]."""
        key = (i, j)
        hit = self._products.get(key)
        if hit is None:
            hit = self.index_of(mat_mul(self.elements[i].matrix, self.elements[j].matrix))
            self._products[key] = hit
        return hit

    @cached_property
    def inverses(self) -> list[int]:
        return [self.index_of(conj_transpose(g.matrix)) for g in self.elements]

    @cached_property
    def element_orders(self) -> list[int]:
        orders = [0] * self.order
        for g in self.elements:
            k, cur = 1, g.index
            while cur != 0:
                cur = self.mult(cur, g.index)
                k += 1
            orders[g.index] = k
        return orders

    @cached_property
    def reflections(self) -> list[int]:
        return [g.index for g in self.elements[1:] if g.is_reflection]

    @cached_property
    def monomial_subgroup(self) -> list[int]:
        """Indices of elements that are monomial matrices (a subgroup)."""
        out = []
        for g in self.elements:
            if all(sum(1 for c in row if c) == 1 for row in g.matrix):
                out.append(g.index)
        return out

    @cached_property
    def coset_representatives(self) -> list[int]:
        """Representatives r of the left cosets r H of the monomial subgroup H."""
        H = self.monomial_subgroup
        covered = [False] * self.order
        reps = []
        for g in self.elements:
            if covered[g.index]:
                continue
            reps.append(g.index)
            for h in H:
                covered[self.mult(g.index, h)] = True
        return reps

    @cached_property
    def arrangement(self) -> list[Hyperplane]:
        return arrangement(self)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "conductor": self.m,
            "dim": self.n,
            "generators": [[[c.to_json() for c in row] for row in g.matrix] for g in self.generators],
        }


def generate_closure(gens: Sequence[Sequence[Sequence[CycNum]]], cap: int = DEFAULT_CAP,
                     name: str = "G", require_reflections: bool = True) -> ReflectionGroup:
    """Breadth-first closure of the group generated by ``gens``.

    Generators equal to the identity are dropped; any other non-reflection is
    rejected when ``require_reflections`` is set.
    """
    if not gens:
        raise GroupSpecError("no generators")
    mats = [tuple(tuple(r) for r in g) for g in gens]
    n = len(mats[0])
    m = mats[0][0][0].m
    for g in mats:
        if len(g) != n or any(len(r) != n for r in g):
            raise GroupSpecError("generators must be square matrices of a common size")
        if any(c.m != m for r in g for c in r):
            raise GroupSpecError("generators must share one conductor")
        if not is_unitary(g):
            raise NonUnitary("generator is not unitary")
    ident = identity(n, m)
    mats = [g for g in mats if g != ident]
    generators = [GroupElement(g) for g in mats]
    if require_reflections:
        for g in generators:
            if not g.is_reflection:
                raise NotAReflection("generator is not a reflection")
    elements = [GroupElement(ident, 0)]
    index = {ident: 0}
    gen_table: list[list[int]] = [[] for _ in mats]
    queue = deque([0])
    while queue:
        h = queue.popleft()
        hm = elements[h].matrix
        for k, s in enumerate(mats):
            prod = mat_mul(s, hm)
            j = index.get(prod)
            if j is None:
                j = len(elements)
                if j >= cap:
                    raise ClosureCapExceeded(f"closure exceeded cap {cap}")
                index[prod] = j
                elements.append(GroupElement(prod, j))
                queue.append(j)
            gen_table[k].append(j)
    for g in generators:
        g.index = index[g.matrix]
    return ReflectionGroup(name, [elements[g.index] for g in generators], elements, gen_table)


def _normalize_normal(row: Sequence[CycNum]) -> tuple[CycNum, ...]:
    lead = next(c for c in row if c)
    inv = lead.inverse()
    return tuple(c * inv for c in row)


def arrangement(G: ReflectionGroup) -> list[Hyperplane]:
    """Reflecting hyperplanes, in order of first appearance among the elements."""
    groups: dict[tuple[CycNum, ...], list[int]] = {}
    for r in G.reflections:
        A = mat_sub_identity(G.elements[r].matrix)
        row = next(row for row in A if any(row))
        groups.setdefault(_normalize_normal(row), []).append(r)
    M = field(G.m).roots_order
    out = []
    for normal, refl in groups.items():
        stab = (0,) + tuple(refl)
        o = len(stab)
        if M % o:
            raise GroupSpecError(f"stabilizer order {o} incompatible with conductor {G.m}")
        target = root_of_unity_ext(G.m, M // o)
        gen = next((G.elements[r] for r in refl if G.elements[r].det == target), None)
        if gen is None:
            raise GroupSpecError("pointwise stabilizer is not cyclic")
        out.append(Hyperplane(MPoly.linear(normal, G.m), normal, o, gen, stab))
    return out


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------


class Character:
    """Multiplicative character, stored as a value per group element."""

    def __init__(self, G: ReflectionGroup, values: Sequence[CycNum], label: str):
        self.G = G
        self.values = tuple(values)
        self.label = label

    def __call__(self, g) -> CycNum:
        idx = g.index if isinstance(g, GroupElement) else g
        return self.values[idx]

    def __repr__(self) -> str:
        return f"Character({self.label})"

    def __mul__(self, other: Character) -> Character:
        return Character(self.G, [a * b for a, b in zip(self.values, other.values)],
                         _combine_labels(self.label, other.label))

    def inverse(self) -> Character:
        return Character(self.G, [v.conjugate() for v in self.values], _neg_label(self.label))

    def __eq__(self, other) -> bool:
        return isinstance(other, Character) and self.G is other.G and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def is_trivial(self) -> bool:
        return all(v.is_one() for v in self.values)

    @cached_property
    def order(self) -> int:
        exps = [v.root_of_unity_exponent() for v in self.values]
        M = field(self.G.m).roots_order
        out = 1
        for e in exps:
            out = lcm(out, M // gcd(M, e))
        return out

    def spec(self) -> str | dict:
        return self.label


def _det_power_from_label(label: str) -> int | None:
    if label.startswith("det^"):
        try:
            return int(label[4:])
        except ValueError:
            return None
    return None


def _combine_labels(a: str, b: str) -> str:
    ka, kb = _det_power_from_label(a), _det_power_from_label(b)
    if ka is not None and kb is not None:
        return f"det^{ka + kb}"
    return f"({a})*({b})"


def _neg_label(a: str) -> str:
    k = _det_power_from_label(a)
    return f"det^{-k}" if k is not None else f"({a})^-1"


def validate_character(G: ReflectionGroup, values: Sequence[CycNum], exhaustive: bool = False) -> None:
    """Check root-of-unity values and chi(gh) = chi(g) chi(h).

    The default test runs over (generator, element) pairs, which implies the
    full identity by induction on word length.  ``exhaustive`` checks all pairs.
    """
    if len(values) != G.order:
        raise CharacterError(f"expected {G.order} values, got {len(values)}")
    if not values[0].is_one():
        raise CharacterError("character is not 1 on the identity")
    for v in values:
        if v.root_of_unity_exponent() is None:
            raise CharacterError(f"value {v} is not a root of unity")
    if exhaustive:
        for i in range(G.order):
            for j in range(G.order):
                if values[G.mult(i, j)] != values[i] * values[j]:
                    raise CharacterError(f"homomorphism fails at ({i}, {j})")
        return
    for k, s in enumerate(G.generators):
        cs = values[s.index]
        for h, sh in enumerate(G.gen_table[k]):
            if values[sh] != cs * values[h]:
                raise CharacterError(f"homomorphism fails at (generator {k}, element {h})")


def character(G: ReflectionGroup, spec, exhaustive: bool = False) -> Character:
    """Build and validate a character.

    ``spec`` is an int k or a string "det^k" for a power of the determinant,
    a mapping {"generators": [values]} giving the value on each group
    generator, or {"values": [...]} with one value per element.
    """
    if isinstance(spec, str):
        spec = spec.strip().replace(" ", "")
        if spec in ("trivial", "1", "det^0"):
            k = 0
        elif spec == "det":
            k = 1
        elif spec.startswith("det^"):
            try:
                k = int(spec[4:].strip("()"))
            except ValueError as exc:
                raise CharacterError(f"cannot parse character spec {spec!r}") from exc
        else:
            raise CharacterError(f"cannot parse character spec {spec!r}")
        spec = k
    if isinstance(spec, int):
        values = [g.det**spec for g in G.elements]
        validate_character(G, values, exhaustive)
        return Character(G, values, f"det^{spec}")
    if isinstance(spec, Mapping):
        if "values" in spec:
            values = [_as_cyc(G.m, v) for v in spec["values"]]
        elif "generators" in spec:
            gv = [_as_cyc(G.m, v) for v in spec["generators"]]
            if len(gv) != len(G.generators):
                raise CharacterError(f"need {len(G.generators)} generator values, got {len(gv)}")
            values = _extend_from_generators(G, gv)
        else:
            raise CharacterError("table spec needs 'values' or 'generators'")
        validate_character(G, values, exhaustive)
        return Character(G, values, str(spec.get("label", "table")))
    raise CharacterError(f"unsupported character spec {spec!r}")


def _as_cyc(m: int, v) -> CycNum:
    if isinstance(v, CycNum):
        return v
    if isinstance(v, (int, Fraction)):
        return CycNum.from_rational(m, v)
    if isinstance(v, str):
        return CycNum.from_rational(m, Fraction(v))
    return CycNum.from_json(m, v)


def _extend_from_generators(G: ReflectionGroup, gen_values: Sequence[CycNum]) -> list[CycNum]:
    values: list[CycNum | None] = [None] * G.order
    values[0] = CycNum.one(G.m)
    for h in range(G.order):
        # BFS order guarantees h was reached before its successors
        if values[h] is None:
            raise CharacterError("element unreachable during extension")
        for k, table in enumerate(G.gen_table):
            j = table[h]
            if values[j] is None:
                values[j] = gen_values[k] * values[h]
    return values  # type: ignore[return-value]


def a_H(H: Hyperplane, chi: Character, generator: GroupElement | None = None) -> int:
    """Least 0 <= a < o(s_H) with chi(s_H) = det(s_H)^(-a)."""
    s = generator or H.stab_generator
    rho_inv = s.det.inverse()
    target = chi(s)
    cur = CycNum.one(rho_inv.m)
    for a in range(H.stab_order):
        if cur == target:
            return a
        cur = cur * rho_inv
    raise CharacterError(f"no exponent a with chi(s_H) = det(s_H)^-a on {H}")


def q_product(G: ReflectionGroup, exponents: Sequence[int]) -> MPoly:
    out = MPoly.const(G.n, G.m, 1)
    for H, a in zip(G.arrangement, exponents):
        if a:
            out = out * H.alpha**a
    return out


# ---------------------------------------------------------------------------
# Isotypic dimensions
# ---------------------------------------------------------------------------


def _elementary_symmetric(A: Matrix) -> tuple[CycNum, ...]:
    """e_1..e_n of the eigenvalues of A, as sums of principal minors."""
    n = len(A)
    out = []
    for k in range(1, n + 1):
        s = CycNum.zero(A[0][0].m)
        for I in combinations(range(n), k):
            s = s + mat_det([[A[i][j] for j in I] for i in I])
        out.append(s)
    return tuple(out)


class _TraceTable:
    """Per-element data for S_d (x) Lambda^p traces of the contragredient action."""

    def __init__(self, G: ReflectionGroup):
        self.G = G
        self.keys: list[tuple[CycNum, ...]] = []
        inv = G.inverses
        for g in G.elements:
            # g acts on coordinate functions through g^-1
            self.keys.append(_elementary_symmetric(G.elements[inv[g.index]].matrix))
        self._h: dict[tuple, list[CycNum]] = {}

    def h(self, key: tuple[CycNum, ...], d: int) -> CycNum:
        series = self._h.get(key)
        m = self.G.m
        if series is None:
            series = self._h[key] = [CycNum.one(m)]
        n = len(key)
        while len(series) <= d:
            t = len(series)
            s = CycNum.zero(m)
            for k in range(1, min(t, n) + 1):
                term = key[k - 1] * series[t - k]
                s = s + term if k % 2 else s - term
            series.append(s)
        return series[d]


def _trace_table(G: ReflectionGroup) -> _TraceTable:
    tab = G.__dict__.get("_trace_table")
    if tab is None:
        tab = G.__dict__["_trace_table"] = _TraceTable(G)
    return tab


def isotypic_dim(G: ReflectionGroup, chi: Character, p: int, d: int) -> int:
    """dim of the degree-d piece of (Omega^p)^chi by character averaging.

    The trace of g on S_d (x) Lambda^p V* is h_d * e_p of the eigenvalues of
    g^-1, read off the characteristic polynomial; elements are bucketed by
    (characteristic polynomial, character value) before summing.
    """
    if not 0 <= p <= G.n or d < 0:
        raise ValueError(f"need 0 <= p <= {G.n} and d >= 0")
    cache = G.__dict__.setdefault("_isotypic_cache", {})
    hit = cache.get((chi.values, p, d))
    if hit is not None:
        return hit
    tab = _trace_table(G)
    buckets = cache.get(chi.values)
    if buckets is None:
        buckets = cache[chi.values] = {}
        for g in range(G.order):
            key = (tab.keys[g], chi.values[g])
            buckets[key] = buckets.get(key, 0) + 1
    m = G.m
    total = CycNum.zero(m)
    for (key, val), count in buckets.items():
        ep = CycNum.one(m) if p == 0 else key[p - 1]
        total = total + val.conjugate() * tab.h(key, d) * ep * count
    avg = total / G.order
    if not avg.is_rational() or avg.den != 1 or avg.num[0] < 0:
        raise ArithmeticError(f"character average {avg} is not a nonnegative integer")
    cache[(chi.values, p, d)] = avg.num[0]
    return avg.num[0]


def hilbert_series(G: ReflectionGroup, chi: Character, p: int, dmax: int) -> list[int]:
    return [isotypic_dim(G, chi, p, d) for d in range(dmax + 1)]


def stanley_series(shift: int, degrees: Sequence[int], dmax: int) -> list[int]:
    """Coefficients of t^shift / prod(1 - t^d_i) up to t^dmax."""
    coeffs = [0] * (dmax + 1)
    if shift <= dmax:
        coeffs[shift] = 1
    for d in degrees:
        for k in range(d, dmax + 1):
            coeffs[k] += coeffs[k - d]
    return coeffs


# ---------------------------------------------------------------------------
# Group-spec files
# ---------------------------------------------------------------------------


def group_from_json(data: Mapping, cap: int = DEFAULT_CAP) -> ReflectionGroup:
    try:
        m = int(data["conductor"])
        n = int(data["dim"])
        gens = []
        for g in data["generators"]:
            if len(g) != n:
                raise GroupSpecError("generator has wrong number of rows")
            gens.append(tuple(tuple(CycNum.from_json(m, c) for c in row) for row in g))
    except (KeyError, TypeError) as exc:
        raise GroupSpecError(f"malformed group spec: {exc}") from exc
    return generate_closure(gens, cap=cap, name=str(data.get("name", "G")))


def load_group(path: str | os.PathLike, cap: int = DEFAULT_CAP) -> ReflectionGroup:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GroupSpecError(f"{path}: {exc}") from exc
    return group_from_json(data, cap=cap)


def fixture_path(name: str) -> Path:
    p = DATA_DIR / name
    if not p.suffix:
        p = p.with_suffix(".json")
    return p


def load_fixture(name: str) -> ReflectionGroup:
    return load_group(fixture_path(name))


def cyclic_group(order: int) -> ReflectionGroup:
    """Z_order acting on C^1 through zeta_order."""
    return generate_closure([((CycNum.root_of_unity(order, 1),),)], name=f"Z{order}")
