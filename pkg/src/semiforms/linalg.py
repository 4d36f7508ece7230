"""Exact incremental row echelon form over Q(zeta_m).

Vectors are sparse dicts ``key -> CycNum`` with any hashable, orderable key.
"""

from __future__ import annotations

from typing import Hashable, Mapping, Sequence

from .exactnum import CycNum

Vector = dict


def form_vector(w) -> Vector:
    """Flatten a form (or polynomial) to a sparse vector keyed by (index, exponent)."""
    if hasattr(w, "comps"):
        return {(I, e): c for I, mu in w.comps.items() for e, c in mu.terms.items()}
    return {((), e): c for e, c in w.terms.items()}


class Echelon:
    """Span of a growing set of vectors, kept in row echelon form.

    Rows are stored with pivot coefficient 1; each new row is reduced against
    all earlier rows, so reduction in insertion order is complete.
    """

    def __init__(self):
        self.rows: list[tuple[Hashable, Vector]] = []
        self.pivots: set = set()

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: Mapping) -> Vector:
        v = dict(v)
        for piv, row in self.rows:
            c = v.get(piv)
            if c is None:
                continue
            for k, r in row.items():
                t = v.get(k)
                val = -(c * r) if t is None else t - c * r
                if val:
                    v[k] = val
                else:
                    v.pop(k, None)
        return v

    def contains(self, v: Mapping) -> bool:
        return not self.reduce(v)

    def add(self, v: Mapping) -> bool:
        """Insert v; return True if it enlarged the span."""
        r = self.reduce(v)
        if not r:
            return False
        piv = max(r)
        inv = r[piv].inverse()
        self.rows.append((piv, {k: c * inv for k, c in r.items()}))
        self.pivots.add(piv)
        return True


def rank(vectors: Sequence[Mapping]) -> int:
    E = Echelon()
    for v in vectors:
        E.add(v)
    return E.rank


def nullspace(rows: Sequence[Sequence[CycNum]], ncols: int, m: int) -> list[list[CycNum]]:
    """Basis of {x : rows . x = 0} for a dense matrix given row by row."""
    A = [list(r) for r in rows]
    pivcols = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][col]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][col].inverse()
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][col]:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivcols.append(col)
        r += 1
        if r == len(A):
            break
    free = [c for c in range(ncols) if c not in pivcols]
    basis = []
    for fc in free:
        x = [CycNum.zero(m) for _ in range(ncols)]
        x[fc] = CycNum.one(m)
        for i, pc in enumerate(pivcols):
            x[pc] = -A[i][fc]
        basis.append(x)
    return basis
