"""Semiinvariant forms: Q_chi, twisted projection, the chi-wedge and generator search.

Conventions.  g acts on polynomials by f -> f o g^-1 and on forms by the
matching pullback, so g.dx_i = sum_j (g^-1)_ij dx_j.  A form w is
chi-invariant when g.w = chi(g) w for every g.  Under this action vol is
det^-1-invariant and Q_chi is chi-invariant.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from .exactnum import CycNum, field as cyc_field, root_of_unity_ext
from .linalg import Echelon, form_vector
from .polyring import (
    DiffForm, LinearChange, MPoly, NotDivisible, eq_up_to_scalar, exact_divide,
    form_lincomb, jacobian_det, lincomb, merge_sign, multiindices,
)
from .reflgroup import (
    Character, GroupElement, Hyperplane, ReflectionGroup, a_H, character, isotypic_dim,
    q_product,
)


class GeneratorSearchExhausted(RuntimeError):
    """Degree cap reached before enough generators were found."""


# ---------------------------------------------------------------------------
# Group action
# ---------------------------------------------------------------------------


def _cache(G: ReflectionGroup, name: str) -> dict:
    c = G.__dict__.get(name)
    if c is None:
        c = G.__dict__[name] = {}
    return c


def _index(g) -> int:
    return g.index if isinstance(g, GroupElement) else g


def action_change(G: ReflectionGroup, g) -> LinearChange:
    """The substitution x -> g^-1 x realising the action of g."""
    idx = _index(g)
    cache = _cache(G, "_action_changes")
    ch = cache.get(idx)
    if ch is None:
        ch = cache[idx] = LinearChange(G.elements[G.inverses[idx]].matrix)
    return ch


def group_action(G: ReflectionGroup, g, w):
    """g.w for a polynomial or a form."""
    ch = action_change(G, g)
    if isinstance(w, MPoly):
        return ch.pull_poly(w)
    if isinstance(w, PolyVector):
        return polyvector_action(G, g, w)
    return ch.pull_form(w)


def is_chi_invariant(G: ReflectionGroup, chi: Character, w) -> bool:
    """g.w == chi(g) w for every generator g (hence for all of G)."""
    for s in G.generators:
        img = group_action(G, s, w)
        if img != w.scale(chi(s)):
            return False
    return True


# ---------------------------------------------------------------------------
# Twisted Reynolds projection
# ---------------------------------------------------------------------------


def _monomial_forms(n: int, p: int, d: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(I, e) for all x^e dx_I with |e| = d, e in descending graded-lex order."""
    def exps(k, left):
        if k == 1:
            yield (left,)
            return
        for a in range(left, -1, -1):
            for rest in exps(k - 1, left - a):
                yield (a,) + rest
    for e in exps(n, d):
        for I in multiindices(n, p):
            yield I, e


class Projector:
    """Projection onto the chi-isotypic part, factored through the monomial subgroup.

    With H the monomial subgroup and r_1..r_k left coset representatives,
    P_G = (1/k) sum_i chi(r_i)^-1 r_i . P_H.  P_H only permutes and rescales
    monomial forms, so the dense substitutions are limited to the k cosets.
    Projections of monomial forms are cached per H-orbit, using
    P(h.w) = chi(h) P(w).
    """

    def __init__(self, G: ReflectionGroup, chi: Character):
        self.G = G
        self.chi = chi
        self.H = G.monomial_subgroup
        self.reps = G.coset_representatives
        m = G.m
        self._patterns = []
        for h in self.H:
            M = G.elements[G.inverses[h]].matrix
            self._patterns.append([next((j, c) for j, c in enumerate(row) if c) for row in M])
        self._chi_inv_H = [chi(h).conjugate() for h in self.H]
        self._exps = self._exponent_tables()
        self._paths = self._coset_paths()
        self._orbit: dict[tuple, tuple[tuple, CycNum]] = {}
        self._ph: dict[tuple, DiffForm] = {}
        self._proj: dict[tuple, DiffForm] = {}
        self._reps_by_degree: dict[tuple[int, int], list[tuple]] = {}
        self._bases: dict[tuple[int, int], list[DiffForm]] = {}
        self._index_H = CycNum.from_rational(m, 1) / len(self.H)
        self._index_G = CycNum.from_rational(m, 1) / len(self.reps)

    def _coset_paths(self) -> list[list[int]]:
        """Per left coset, a word of reflections whose product lies in it.

        Reflections act by a rank-one substitution, which is much cheaper
        than a general dense one; the coset representative is kept when no
        word of length at most two is found.
        """
        G = self.G
        coset = {}
        for i, r in enumerate(self.reps):
            for h in self.H:
                coset[G.mult(r, h)] = i
        paths: list[list[int] | None] = [None] * len(self.reps)
        paths[coset[0]] = []
        refl = G.reflections
        for s in refl:
            if paths[coset[s]] is None:
                paths[coset[s]] = [s]
        for s in refl:
            for t in refl:
                c = coset[G.mult(s, t)]
                if paths[c] is None:
                    paths[c] = [s, t]
        return [p if p is not None else [r] for p, r in zip(paths, self.reps)]

    def _exponent_tables(self):
        # entries and chi values as powers of a root of unity, when they all are
        M = cyc_field(self.G.m).roots_order
        pats = []
        for pat in self._patterns:
            row = [(j, c.root_of_unity_exponent()) for j, c in pat]
            if any(k is None for _, k in row):
                return None
            pats.append(row)
        chis = [c.root_of_unity_exponent() for c in self._chi_inv_H]
        roots = [root_of_unity_ext(self.G.m, k) for k in range(M)]
        return M, pats, chis, roots

    def _orbit_fast(self, I, e) -> dict[tuple, list[int]]:
        M, pats, chis, roots = self._exps
        half = M // 2
        acc: dict[tuple, list[int]] = {}
        key = (I, e)
        for k, pat in enumerate(pats):
            s = 0
            new = [0] * len(e)
            for i, a in enumerate(e):
                if a:
                    j, t = pat[i]
                    new[j] += a
                    s += t * a
            cols = [pat[i][0] for i in I]
            for i in I:
                s += pat[i][1]
            inv = sum(1 for a in range(len(cols)) for b in range(a + 1, len(cols)) if cols[a] > cols[b])
            if inv % 2:
                s += half
            img = (tuple(sorted(cols)), tuple(new))
            if img not in self._orbit:
                self._orbit[img] = (key, roots[(-chis[k] - s) % M])
            counts = acc.get(img)
            if counts is None:
                counts = acc[img] = [0] * M
            counts[(chis[k] + s) % M] += 1
        return acc

    def _apply_monomial(self, k: int, I, e) -> tuple[tuple, tuple, CycNum]:
        """h_k . (x^e dx_I) = c x^e' dx_I'."""
        pat = self._patterns[k]
        n = len(e)
        c = CycNum.one(self.G.m)
        new = [0] * n
        for i, a in enumerate(e):
            if a:
                j, v = pat[i]
                new[j] += a
                c = c * v**a
        cols = [pat[i][0] for i in I]
        for i in I:
            c = c * pat[i][1]
        inv = sum(1 for s in range(len(cols)) for t in range(s + 1, len(cols)) if cols[s] > cols[t])
        if inv % 2:
            c = -c
        return tuple(sorted(cols)), tuple(new), c

    def _orbit_of(self, I, e) -> tuple[tuple, CycNum]:
        """Register the H-orbit of x^e dx_I and cache P_H of its representative."""
        key = (I, e)
        hit = self._orbit.get(key)
        if hit is not None:
            return hit
        n, m = self.G.n, self.G.m
        if self._exps is not None:
            roots = self._exps[3]
            phi = cyc_field(m).phi
            comps: dict[tuple, dict] = {}
            for (I2, e2), counts in self._orbit_fast(I, e).items():
                num = [0] * phi
                for k, c in enumerate(counts):
                    if c:
                        for j, r in enumerate(roots[k].num):
                            num[j] += c * r
                if any(num):
                    comps.setdefault(I2, {})[e2] = CycNum(m, num, len(self.H))
            self._ph[key] = DiffForm._trusted(n, m, len(I), {J: MPoly(n, m, t) for J, t in comps.items()})
            return self._orbit[key]
        acc: dict[tuple, CycNum] = {}
        for k in range(len(self.H)):
            I2, e2, c = self._apply_monomial(k, I, e)
            ci = self._chi_inv_H[k]
            # P(h.w) = chi(h) P(w) and h.w = c w'  =>  P(w') = chi(h)/c P(w)
            if (I2, e2) not in self._orbit:
                self._orbit[(I2, e2)] = (key, ci.conjugate() / c)
            v = ci * c
            prev = acc.get((I2, e2))
            acc[(I2, e2)] = v if prev is None else prev + v
        comps: dict[tuple, dict] = {}
        for (I2, e2), v in acc.items():
            if v:
                comps.setdefault(I2, {})[e2] = v * self._index_H
        self._ph[key] = DiffForm._trusted(n, m, len(I), {J: MPoly(n, m, t) for J, t in comps.items()})
        return self._orbit[key]

    def _full(self, rep) -> DiffForm:
        """P_G of an orbit representative, from its cached P_H."""
        w = self._proj.get(rep)
        if w is None:
            ph = self._ph[rep]
            if not ph or len(self.reps) == 1:
                w = ph
            else:
                parts = []
                for path in self._paths:
                    img, val = ph, CycNum.one(self.G.m)
                    for s in reversed(path):
                        img = action_change(self.G, s).pull_form(img)
                        val = val * self.chi(s)
                    parts.append((val.conjugate() * self._index_G, img))
                w = form_lincomb(parts, ph)
            self._proj[rep] = w
        return w

    def project_monomial(self, I: tuple[int, ...], e: tuple[int, ...]) -> DiffForm:
        key = (I, e)
        rep, f = self._orbit_of(I, e)
        base = self._full(rep)
        return base if rep == key else base.scale(f)

    def project(self, w: DiffForm) -> DiffForm:
        pairs = []
        for I, mu in w.comps.items():
            for e, c in mu.terms.items():
                pairs.append((c, self.project_monomial(I, e)))
        return form_lincomb(pairs, DiffForm.zero(w.nvars, w.m, w.p))

    def _rep_keys(self, p: int, d: int) -> list[tuple]:
        """H-orbit representatives in degree d whose P_H is nonzero, in a fixed order."""
        key = (p, d)
        hit = self._reps_by_degree.get(key)
        if hit is None:
            hit = []
            for I, e in _monomial_forms(self.G.n, p, d):
                rep = self._orbit_of(I, e)[0]
                if rep == (I, e) and self._ph[rep]:
                    hit.append(rep)
            self._reps_by_degree[key] = hit
        return hit

    def isotypic_basis(self, p: int, d: int) -> list[DiffForm]:
        """Basis of the degree-d part of (Omega^p)^chi, each form monic.

        Stops as soon as the rank reaches the character-theoretic dimension;
        falling short of it is an arithmetic error.
        """
        key = (p, d)
        if key in self._bases:
            return self._bases[key]
        target = isotypic_dim(self.G, self.chi, p, d)
        basis: list[DiffForm] = []
        if target:
            E = Echelon()
            for rep in self._rep_keys(p, d):
                w = self._full(rep)
                if w and E.add(form_vector(w)):
                    basis.append(_monic(w))
                    if len(basis) == target:
                        break
            if len(basis) != target:
                raise ArithmeticError(
                    f"projection spans {len(basis)} dimensions, character sum says {target}")
        self._bases[key] = basis
        return basis

    def support(self, p: int, d: int) -> list[tuple]:
        """Orbit representatives of degree-d monomial p-forms with nonzero projection."""
        return [rep for rep in self._rep_keys(p, d) if self._full(rep)]

    def random_form(self, rng: random.Random, p: int, d: int, nterms: int = 3) -> DiffForm:
        """Projection of a random integer combination of monomial p-forms.

        Orbit representatives are visited in a seeded random order and the
        first ``nterms`` with nonzero projection are combined, so only those
        projections are computed.
        """
        zero = DiffForm.zero(self.G.n, self.G.m, p)
        reps = list(self._rep_keys(p, d))
        rng.shuffle(reps)
        for _ in range(8):
            pairs = []
            for rep in reps:
                w = self._full(rep)
                if w:
                    c = rng.choice((-4, -3, -2, -1, 1, 2, 3, 4))
                    pairs.append((CycNum.from_rational(self.G.m, c), w))
                    if len(pairs) == nterms:
                        break
            if not pairs:
                return zero
            w = form_lincomb(pairs, zero)
            if w:
                return w
        raise ArithmeticError("random combinations keep cancelling")


def _monic(w: DiffForm) -> DiffForm:
    return w.scale(w.leading_term()[1].inverse())


def projector(G: ReflectionGroup, chi: Character) -> Projector:
    cache = _cache(G, "_projectors")
    P = cache.get(chi.values)
    if P is None:
        P = cache[chi.values] = Projector(G, chi)
    return P


def reynolds_project(G: ReflectionGroup, w: DiffForm, chi: Character) -> DiffForm:
    """(1/|G|) sum_g chi(g)^-1 g.w."""
    return projector(G, chi).project(w)


def reynolds_project_bruteforce(G: ReflectionGroup, w: DiffForm, chi: Character) -> DiffForm:
    """The same average, summed over every element; independent of the coset factoring."""
    inv_order = CycNum.from_rational(G.m, 1) / G.order
    parts = [(chi(g).conjugate() * inv_order, group_action(G, g.index, w)) for g in G.elements]
    return form_lincomb(parts, DiffForm.zero(w.nvars, w.m, w.p))


def isotypic_basis(G: ReflectionGroup, chi: Character, p: int, d: int) -> list[DiffForm]:
    return projector(G, chi).isotypic_basis(p, d)


# ---------------------------------------------------------------------------
# Q polynomials and the context object
# ---------------------------------------------------------------------------


def det_character(G: ReflectionGroup) -> Character:
    cache = _cache(G, "_characters")
    chi = cache.get("det")
    if chi is None:
        chi = cache["det"] = character(G, 1)
    return chi


def q_poly(G: ReflectionGroup, chi: Character) -> MPoly:
    """Q_chi = prod_H alpha_H^(a_H(chi)), monic in graded-lex order."""
    return q_product(G, [a_H(H, chi) for H in G.arrangement])


class SemiInvariantContext:
    """G, chi and the Q polynomials built from the arrangement."""

    def __init__(self, G: ReflectionGroup, chi: Character):
        if not G.arrangement:
            raise ValueError("group has no reflections")
        self.G = G
        self.chi = chi
        self.arrangement: list[Hyperplane] = G.arrangement
        self.det = det_character(G)
        self.chi_det = chi * self.det
        self.a = [a_H(H, chi) for H in self.arrangement]
        self.a_det = [a_H(H, self.chi_det) for H in self.arrangement]
        self.q_chi = q_product(G, self.a)
        self.q_chi_det = q_product(G, self.a_det)

    @property
    def n(self) -> int:
        return self.G.n

    @property
    def m(self) -> int:
        return self.G.m

    @cached_property
    def q_det(self) -> MPoly:
        return q_product(self.G, [H.stab_order - 1 for H in self.arrangement])

    @cached_property
    def q_det_inv(self) -> MPoly:
        return q_product(self.G, [1] * len(self.arrangement))

    @cached_property
    def projector(self) -> Projector:
        return projector(self.G, self.chi)

    def factors(self, exponents: Sequence[int]) -> list[MPoly]:
        out = []
        for H, a in zip(self.arrangement, exponents):
            out.extend([H.alpha] * a)
        return out

    def is_invariant(self, w) -> bool:
        return is_chi_invariant(self.G, self.chi, w)

    def __repr__(self) -> str:
        return f"SemiInvariantContext({self.G.name}, {self.chi.label})"


def context(G: ReflectionGroup, chi) -> SemiInvariantContext:
    if not isinstance(chi, Character):
        chi = character(G, chi)
    cache = _cache(G, "_contexts")
    ctx = cache.get(chi.values)
    if ctx is None:
        ctx = cache[chi.values] = SemiInvariantContext(G, chi)
    return ctx


@dataclass
class RecurrenceCheck:
    passed: bool
    a_chi: int
    a_chi_det: int
    expected: int


def ah_recurrence_check(H: Hyperplane, chi: Character, det: Character) -> RecurrenceCheck:
    """a_H(chi det) = a_H(chi) - 1 if a_H(chi) != 0, else o(s_H) - 1."""
    a = a_H(H, chi)
    b = a_H(H, chi * det)
    expected = a - 1 if a else H.stab_order - 1
    return RecurrenceCheck(b == expected, a, b, expected)


# ---------------------------------------------------------------------------
# chi-wedge and the generation criterion
# ---------------------------------------------------------------------------


class ChiWedgeError(NotDivisible):
    def __init__(self, msg: str, hyperplane: Hyperplane | None = None, power: int = 0):
        super().__init__(msg)
        self.hyperplane = hyperplane
        self.power = power


def divide_by_factors(w: DiffForm, ctx: SemiInvariantContext, exponents: Sequence[int]) -> DiffForm:
    """Divide w by prod alpha_H^(exponents[H]), one linear factor at a time."""
    for H, a in zip(ctx.arrangement, exponents):
        for k in range(a):
            try:
                w = w.divide(H.alpha)
            except NotDivisible:
                raise ChiWedgeError(
                    f"alpha_H = {H.alpha} divides only to power {k} < {a}", H, a) from None
    return w


def chi_wedge(mu: DiffForm, w: DiffForm, ctx: SemiInvariantContext, check: bool = False) -> DiffForm:
    """(mu ^ w) / Q_chi.  Non-divisibility means an operand is not chi-invariant."""
    if check:
        for x in (mu, w):
            if not ctx.is_invariant(x):
                raise ValueError("operand is not chi-invariant")
    return divide_by_factors(mu.wedge(w), ctx, ctx.a)


def chi_wedge_all(forms: Sequence[DiffForm], ctx: SemiInvariantContext) -> DiffForm:
    acc = forms[0]
    for w in forms[1:]:
        acc = chi_wedge(acc, w, ctx)
    return acc


@dataclass
class GeneratorCertificate:
    forms: list[DiffForm]
    witness_scalar: CycNum
    degrees: list[int]
    det_witness: CycNum

    ok = True
    reason = ""


@dataclass
class SaitoFailure:
    reason: str
    forms: list[DiffForm] = field(default_factory=list)

    ok = False


def saito_check(forms: Sequence[DiffForm], ctx: SemiInvariantContext,
                check_invariance: bool = True) -> GeneratorCertificate | SaitoFailure:
    """Do the chi-wedges of ``forms`` generate Omega^chi over R?

    Success iff w_1 ^chi ... ^chi w_n = c Q_{chi det} vol with c != 0.  The
    plain determinant of the coefficient matrix is cross-checked against
    c Q_{chi det} Q_chi^(n-1).
    """
    forms = list(forms)
    n = ctx.n
    if len(forms) != n or any(w.p != 1 or w.nvars != n for w in forms):
        return SaitoFailure(f"need {n} one-forms in {n} variables", forms)
    if check_invariance:
        for i, w in enumerate(forms):
            if not ctx.is_invariant(w):
                return SaitoFailure(f"form {i + 1} is not {ctx.chi.label}-invariant", forms)
    try:
        top = chi_wedge_all(forms, ctx)
    except ChiWedgeError as exc:
        return SaitoFailure(f"chi-wedge not divisible: {exc}", forms)
    coeff = top.coeff(tuple(range(n))) if top.p == n else MPoly.zero(n, ctx.m)
    if coeff.is_zero():
        return SaitoFailure("top chi-wedge is zero", forms)
    c = eq_up_to_scalar(coeff, ctx.q_chi_det)
    if c is None:
        return SaitoFailure("top chi-wedge is not a scalar multiple of Q_chi_det vol", forms)
    det_m = forms[0]
    for w in forms[1:]:
        det_m = det_m.wedge(w)
    det_poly = det_m.top_coeff()
    expected = ctx.q_chi_det * ctx.q_chi ** (n - 1)
    c2 = eq_up_to_scalar(det_poly, expected)
    if c2 is None or c2 != c:
        raise AssertionError("coefficient determinant disagrees with the iterated chi-wedge")
    degrees = [w.coeff_degree() for w in forms]
    if sum(degrees) - (n - 1) * ctx.q_chi.degree() != ctx.q_chi_det.degree():
        raise AssertionError("degree bookkeeping of the top chi-wedge failed")
    return GeneratorCertificate(forms, c, degrees, c2)


# ---------------------------------------------------------------------------
# Basic invariants and generator search
# ---------------------------------------------------------------------------


@dataclass
class BasicInvariants:
    fs: list[MPoly]
    degrees: list[int]
    jacobian_witness: CycNum

    def monomials_of_degree(self, k: int) -> list[MPoly]:
        """All products f^a with sum a_i deg f_i = k."""
        cache = self.__dict__.setdefault("_graded", {})
        hit = cache.get(k)
        if hit is not None:
            return hit
        out = []
        n = self.fs[0].nvars
        m = self.fs[0].m

        def rec(i, left, acc):
            if i == len(self.fs):
                if left == 0:
                    out.append(acc)
                return
            d = self.degrees[i]
            power = MPoly.const(n, m, 1) if acc is None else acc
            e = 0
            while e * d <= left:
                rec(i + 1, left - e * d, power)
                power = power * self.fs[i]
                e += 1

        rec(0, k, None)
        cache[k] = out
        return out


def _subalgebra_span(fs: Sequence[MPoly], degrees: Sequence[int], d: int) -> Echelon:
    E = Echelon()
    if fs:
        binv = BasicInvariants(list(fs), list(degrees), CycNum.one(fs[0].m))
        for prod in binv.monomials_of_degree(d):
            E.add(form_vector(prod))
    return E


def basic_invariants(G: ReflectionGroup, degree_cap: int | None = None) -> BasicInvariants:
    """Homogeneous generators of the invariant ring, lowest degrees first."""
    cache = _cache(G, "_basic")
    if "fs" in cache:
        return cache["fs"]
    trivial = character(G, 0)
    P = projector(G, trivial)
    n = G.n
    cap = degree_cap if degree_cap is not None else G.order
    fs: list[MPoly] = []
    degrees: list[int] = []
    for d in range(1, cap + 1):
        dim = isotypic_dim(G, trivial, 0, d)
        if not dim:
            continue
        span = _subalgebra_span(fs, degrees, d)
        if span.rank == dim:
            continue
        for b in P.isotypic_basis(0, d):
            if span.add(form_vector(b)):
                fs.append(b.as_poly())
                degrees.append(d)
        if len(fs) >= n:
            break
    if len(fs) != n:
        raise GeneratorSearchExhausted(
            f"found {len(fs)} of {n} basic invariants below degree {cap} (degrees {degrees})")
    prod = 1
    for d in degrees:
        prod *= d
    if prod != G.order:
        raise AssertionError(f"product of degrees {degrees} is {prod}, not |G| = {G.order}")
    for f in fs:
        if not is_chi_invariant(G, trivial, f):
            raise AssertionError("basic invariant is not invariant")
    ctx = context(G, 0)
    c = eq_up_to_scalar(jacobian_det(fs), ctx.q_det)
    if c is None:
        raise AssertionError("Jacobian of basic invariants is not a multiple of Q_det")
    out = BasicInvariants(fs, degrees, c)
    cache["fs"] = out
    return out


def find_generators(ctx: SemiInvariantContext, degree_cap: int | None = None) -> GeneratorCertificate:
    """Minimal homogeneous R-generators of (Omega^1)^chi, certified by saito_check."""
    G = ctx.G
    n = ctx.n
    if degree_cap is None:
        degree_cap = ctx.q_chi_det.degree() + ctx.q_det.degree()
    if degree_cap < 1:
        raise ValueError("degree_cap must be at least 1")
    binv = basic_invariants(G)
    P = ctx.projector
    selected: list[DiffForm] = []
    sel_deg: list[int] = []
    for d in range(0, degree_cap + 1):
        dim = isotypic_dim(G, ctx.chi, 1, d)
        if not dim:
            continue
        span = Echelon()
        for w, e in zip(selected, sel_deg):
            for r in binv.monomials_of_degree(d - e):
                span.add(form_vector(w.scale(r)))
        if span.rank == dim:
            continue
        for b in P.isotypic_basis(1, d):
            if span.add(form_vector(b)):
                selected.append(b)
                sel_deg.append(d)
        if len(selected) >= n:
            break
    if len(selected) < n:
        raise GeneratorSearchExhausted(
            f"found {len(selected)} of {n} generators up to degree {degree_cap} (degrees {sel_deg})")
    if len(selected) > n:
        raise AssertionError(f"(Omega^1)^chi needs more than {n} generators: degrees {sel_deg}")
    cert = saito_check(selected, ctx, check_invariance=True)
    if not cert.ok:
        raise AssertionError(f"generators failed the criterion: {cert.reason}")
    return cert


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------


class PolyVector(DiffForm):
    """Polynomial polyvector sum_J nu_J d/dx_J, stored like a form."""

    kind = "polyvector"

    @classmethod
    def top(cls, nvars: int, m: int) -> PolyVector:
        return cls(nvars, m, nvars, {tuple(range(nvars)): MPoly.const(nvars, m, 1)})

    def _basis_name(self, I) -> str:
        names = "xyzw" if self.nvars <= 4 else [f"x{i + 1}" for i in range(self.nvars)]
        return "^".join(f"D{names[i]}" for i in I)


def polyvector_action(G: ReflectionGroup, g, theta: PolyVector) -> PolyVector:
    """Coefficients by f -> f o g^-1; d/dx_i -> sum_j g_ji d/dx_j."""
    idx = _index(g)
    coeff_change = action_change(G, idx)
    cache = _cache(G, "_transpose_changes")
    tr = cache.get(idx)
    if tr is None:
        M = G.elements[idx].matrix
        tr = cache[idx] = LinearChange(tuple(zip(*M)))
    acc: dict[tuple[int, ...], list] = {}
    zero_exp = (0,) * theta.nvars
    for J, nu in theta.comps.items():
        pn = coeff_change.pull_poly(nu)
        for K, c in tr.pull_basis(J).comps.items():
            acc.setdefault(K, []).append((c.terms[zero_exp], pn))
    comps = {K: lincomb(v, theta.nvars, theta.m) for K, v in acc.items()}
    return PolyVector._trusted(theta.nvars, theta.m, theta.p, {K: v for K, v in comps.items() if v})


def _complement(n: int, I: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(i for i in range(n) if i not in I)


def derivation_dual(w: DiffForm) -> PolyVector:
    """p-form -> (n-p)-polyvector: mu dx_I -> eps(I, I^c) mu d/dx_{I^c}."""
    n = w.nvars
    comps = {}
    for I, mu in w.comps.items():
        J = _complement(n, I)
        comps[J] = mu if merge_sign(I, J) > 0 else -mu
    return PolyVector._trusted(n, w.m, n - w.p, comps)


def form_dual(theta: PolyVector) -> DiffForm:
    """Inverse-up-to-sign of derivation_dual: nu d/dx_J -> eps(J, J^c) nu dx_{J^c}."""
    n = theta.nvars
    comps = {}
    for J, nu in theta.comps.items():
        I = _complement(n, J)
        comps[I] = nu if merge_sign(J, I) > 0 else -nu
    return DiffForm._trusted(n, theta.m, n - theta.p, comps)


def dual_generators(cert: GeneratorCertificate, ctx: SemiInvariantContext) -> list[PolyVector]:
    """Derivations dual to the (n-1)-fold chi-wedges of a generator set.

    The i-th derivation is the dual of the chi-wedge of all generators but
    the i-th; these are (chi det)-invariant.
    """
    forms = cert.forms
    n = ctx.n
    out = []
    for i in range(n):
        rest = forms[:i] + forms[i + 1:]
        eta = chi_wedge_all(rest, ctx) if rest else DiffForm.from_poly(ctx.q_chi)
        out.append(derivation_dual(eta))
    return out


def derivation_saito_check(thetas: Sequence[PolyVector], ctx: SemiInvariantContext) -> CycNum | None:
    """Witness c with theta_1 ^psi ... ^psi theta_n = c Q_{psi det^-1} D-vol, psi = ctx.chi.

    Returns None when the product is not of that form.
    """
    try:
        top = chi_wedge_all(list(thetas), ctx)
    except ChiWedgeError:
        return None
    if top.p != ctx.n or top.is_zero():
        return None
    inv_det = ctx.det.inverse()
    target = q_poly(ctx.G, ctx.chi * inv_det)
    return eq_up_to_scalar(top.coeff(tuple(range(ctx.n))), target)


# ---------------------------------------------------------------------------
# Coordinate-adapted divisibility
# ---------------------------------------------------------------------------


_ADAPTED: dict[int, tuple[Hyperplane, LinearChange]] = {}


def adapted_coordinates(H: Hyperplane) -> LinearChange:
    """x = C y with y_1 = alpha_H and s_H = diag(rho, 1, ..., 1) in y."""
    hit = _ADAPTED.get(id(H))
    if hit is not None and hit[0] is H:
        return hit[1]
    s = H.stab_generator.matrix
    n = len(s)
    m = s[0][0].m
    cols = [[s[i][j] - (1 if i == j else 0) for i in range(n)] for j in range(n)]
    root = next(c for c in cols if any(c))
    a = H.normal
    ar = sum((ai * ri for ai, ri in zip(a, root)), CycNum.zero(m))
    inv = ar.inverse()
    basis = [[r * inv for r in root]]
    k = next(i for i, c in enumerate(a) if c)
    for j in range(n):
        if j == k:
            continue
        v = [CycNum.zero(m)] * n
        v[j] = CycNum.one(m)
        v[k] = -a[j]
        basis.append(v)
    C = LinearChange(tuple(tuple(basis[col][row] for col in range(n)) for row in range(n)))
    _ADAPTED[id(H)] = (H, C)
    return C


@dataclass
class DivisibilityReport:
    passed: bool
    witness: tuple | None = None


def _alpha_order(f: MPoly, alpha: MPoly, cap: int) -> int:
    """Largest k <= cap with alpha^k | f."""
    k = 0
    while k < cap:
        try:
            f = exact_divide(f, alpha)
        except NotDivisible:
            break
        k += 1
    return k


def adapted_divisibility(w: DiffForm, H: Hyperplane, a: int) -> DivisibilityReport:
    """In adapted coordinates: y_1^(a-1) | w_J when 1 in J, y_1^a | w_J otherwise.

    With x = C y the dy_J coefficient is nu_J(C y), nu_J = sum_I det C[I, J] w_I,
    and the substitution sends alpha_H to y_1.  So the test runs on nu_J and
    alpha_H in the original coordinates, without expanding the substitution.
    """
    C = adapted_coordinates(H)
    n = w.nvars
    zero_exp = (0,) * n
    parts: dict[tuple[int, ...], list] = {}
    for I, mu in w.comps.items():
        for J, c in C.pull_basis(I).comps.items():
            parts.setdefault(J, []).append((c.terms[zero_exp], mu))
    for J in sorted(parts):
        need = a - 1 if 0 in J else a
        if need <= 0:
            continue
        nu = lincomb(parts[J], n, w.m)
        if nu.is_zero():
            continue
        got = _alpha_order(nu, H.alpha, need)
        if got < need:
            return DivisibilityReport(False, (J, need, got))
    return DivisibilityReport(True)


def adapted_divisibility_substituted(w: DiffForm, H: Hyperplane, a: int) -> DivisibilityReport:
    """The same test by expanding the pullback to y-coordinates."""
    v = adapted_coordinates(H).pull_form(w)
    for J in sorted(v.comps):
        mu = v.comps[J]
        need = a - 1 if 0 in J else a
        if need > 0 and mu.min_exponent(0) < need:
            return DivisibilityReport(False, (J, need, mu.min_exponent(0)))
    return DivisibilityReport(True)
