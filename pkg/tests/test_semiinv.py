import random

import pytest

from semiforms import semiinv as S
from semiforms.exactnum import CycNum
from semiforms.linalg import Echelon, form_vector
from semiforms.polyring import DiffForm, MPoly, eq_up_to_scalar, jacobian_det
from semiforms.reflgroup import character, generate_closure
from conftest import SHIPPED, group, reference_forms


def test_group_action_examples(b2):
    w = DiffForm.dx(2, 2, 1).scale(MPoly.var(2, 2, 0))
    assert S.group_action(b2, 0, w) == w
    swap = next(g for g in b2.elements if str(g.matrix[0][1]) == "1")
    assert S.group_action(b2, swap, w) == DiffForm.dx(2, 2, 0).scale(MPoly.var(2, 2, 1))
    rho = CycNum.root_of_unity(3, 1)
    one, zero = CycNum.one(3), CycNum.zero(3)
    G = generate_closure([((rho, zero), (zero, one))])
    s = G.generators[0]
    s_inv = G.inverses[s.index]
    assert S.group_action(G, s_inv, DiffForm.dx(2, 3, 0)) == DiffForm.dx(2, 3, 0).scale(rho)


def test_vol_and_q_det_characters():
    for name in SHIPPED:
        G = group(name)
        ctx = S.context(G, 1)
        assert S.is_chi_invariant(G, ctx.det.inverse(), DiffForm.vol(G.n, G.m))
        assert S.is_chi_invariant(G, ctx.det, ctx.q_det)
        assert S.is_chi_invariant(G, ctx.chi, ctx.q_chi)


def test_projection_matches_bruteforce(b2, g26):
    rng = random.Random(3)
    for k in range(2):
        chi = character(b2, k)
        for _ in range(5):
            terms = {(rng.randint(0, 3), rng.randint(0, 3)): CycNum.from_rational(2, rng.randint(-3, 3))
                     for _ in range(3)}
            w = DiffForm(2, 2, 1, {(0,): MPoly(2, 2, terms), (1,): MPoly(2, 2, terms)})
            assert S.reynolds_project(b2, w, chi) == S.reynolds_project_bruteforce(b2, w, chi)
    chi = character(g26, 5)
    w = DiffForm.basis(3, 12, (0, 1), MPoly.var(3, 12, 2))
    fast = S.reynolds_project(g26, w, chi)
    assert fast and fast == S.reynolds_project_bruteforce(g26, w, chi)


def test_projection_idempotent_and_kills(b2):
    ctx = S.context(b2, 1)
    assert S.reynolds_project(b2, DiffForm.dx(2, 2, 0), ctx.chi).is_zero()
    for w in S.find_generators(ctx).forms:
        assert S.reynolds_project(b2, w, ctx.chi) == w


def test_q_poly_and_recurrence(g26):
    for name in SHIPPED:
        G = group(name)
        assert S.q_poly(G, character(G, 0)) == MPoly.const(G.n, G.m, 1)
    Z = group("cyclic_m")
    r = S.ah_recurrence_check(Z.arrangement[0], character(Z, 2), character(Z, 1))
    assert (r.a_chi, r.a_chi_det, r.passed) == (4, 3, True)
    b2 = group("b2")
    for H in b2.arrangement:
        r = S.ah_recurrence_check(H, character(b2, 1), character(b2, 1))
        assert (r.a_chi, r.a_chi_det) == (1, 0)
    assert S.context(g26, 3).q_chi.degree() == 9


def test_chi_wedge_examples(g26, b2):
    ctx = S.context(g26, 3)
    w1, w2, _ = reference_forms()
    unit = DiffForm.from_poly(ctx.q_chi)
    assert S.chi_wedge(unit, w1, ctx) == w1
    v = S.chi_wedge(w1, w2, ctx, check=True)
    assert v.p == 2 and ctx.is_invariant(v)
    triv = S.context(b2, 0)
    dx, dy = DiffForm.dx(2, 2, 0), DiffForm.dx(2, 2, 1)
    assert S.chi_wedge(dx, dy, triv) == DiffForm.vol(2, 2)
    with pytest.raises(S.ChiWedgeError) as err:
        S.chi_wedge(dx, dy, S.context(b2, 1))
    assert err.value.hyperplane is not None


def test_saito_on_reference_forms(g26):
    ctx = S.context(g26, 3)
    cert = S.saito_check(reference_forms(), ctx)
    assert cert.ok and cert.witness_scalar == CycNum.from_rational(12, -16)
    assert cert.degrees == [8, 14, 20]


def test_saito_failures(b2):
    ctx = S.context(b2, 1)
    w = S.find_generators(ctx).forms[0]
    res = S.saito_check([w, w], ctx)
    assert not res.ok and "zero" in res.reason
    res = S.saito_check([DiffForm.dx(2, 2, 0), DiffForm.dx(2, 2, 1)], ctx)
    assert not res.ok and "invariant" in res.reason
    res = S.saito_check([DiffForm.dx(2, 2, 0)], ctx)
    assert not res.ok


def test_basic_invariants():
    b = S.basic_invariants(group("b2"))
    assert b.degrees == [2, 4]
    assert eq_up_to_scalar(jacobian_det(b.fs), MPoly.var(2, 2, 0) ** 3 * MPoly.var(2, 2, 1)
                           - MPoly.var(2, 2, 0) * MPoly.var(2, 2, 1) ** 3) is not None
    z = S.basic_invariants(group("cyclic_m"))
    assert [str(f) for f in z.fs] == ["x^6"]
    assert S.basic_invariants(group("g26")).degrees == [6, 12, 18]


def test_find_generators_cyclic():
    Z = group("cyclic_m")
    for k in range(6):
        ctx = S.context(Z, k)
        cert = S.find_generators(ctx)
        (w,) = cert.forms
        assert eq_up_to_scalar(w.coeff((0,)), ctx.q_chi_det) is not None
        assert cert.degrees == [(-(k + 1)) % 6]


def test_find_generators_trivial_b2_matches_differentials(b2):
    ctx = S.context(b2, 0)
    cert = S.find_generators(ctx)
    dfs = [DiffForm.exterior_derivative(f) for f in S.basic_invariants(b2).fs]
    for w, df in zip(cert.forms, dfs):
        assert eq_up_to_scalar(w, df) is not None
    assert eq_up_to_scalar(jacobian_det(S.basic_invariants(b2).fs), ctx.q_det) is not None


def _r_span(forms, degrees, binv, d):
    E = Echelon()
    for w, e in zip(forms, degrees):
        for r in binv.monomials_of_degree(d - e):
            E.add(form_vector(w.scale(r)))
    return E


def test_find_generators_g26_det3_span_reference(g26):
    ctx = S.context(g26, 3)
    cert = S.find_generators(ctx)
    assert cert.degrees == [8, 14, 20]
    reference = reference_forms()
    binv = S.basic_invariants(g26)
    for d in (8, 14, 20):
        ours = _r_span(cert.forms, cert.degrees, binv, d)
        theirs = _r_span(reference, [8, 14, 20], binv, d)
        assert ours.rank == theirs.rank
        for row in theirs.rows:
            assert ours.contains(row[1])


def test_duality():
    top = S.derivation_dual(DiffForm.vol(3, 12))
    assert top.p == 0 and top.coeff(()) == MPoly.const(3, 12, 1)
    assert S.form_dual(S.PolyVector.top(3, 12)) == DiffForm.from_poly(MPoly.const(3, 12, 1))
    d = S.derivation_dual(DiffForm.dx(2, 2, 0))
    assert d.p == 1 and set(d.comps) == {(1,)}
    w = reference_forms()[0]
    assert S.form_dual(S.derivation_dual(w)) in (w, -w)


def test_dual_of_reference_generators(g26):
    ctx = S.context(g26, 3)
    cert = S.saito_check(reference_forms(), ctx)
    thetas = S.dual_generators(cert, ctx)
    psi = S.context(g26, 4)
    assert all(S.is_chi_invariant(g26, psi.chi, t) for t in thetas)
    assert S.derivation_saito_check(thetas, psi) == CycNum.from_rational(12, -256)


def test_adapted_divisibility_negative(b2):
    H = next(H for H in b2.arrangement if str(H.alpha) == "x - y")
    assert not S.adapted_divisibility(DiffForm.dx(2, 2, 0), H, 1).passed


def test_adapted_divisibility_agrees_with_substitution(g26, b2):
    rng = random.Random(11)
    for G, k in ((b2, 1), (g26, 3), (g26, 4)):
        ctx = S.context(G, k)
        forms = [ctx.projector.random_form(rng, p, d) for p, d in ((1, 8), (2, 13), (1, 17))
                 if ctx.projector.support(p, d)]
        forms.append(DiffForm.dx(G.n, G.m, 0).scale(MPoly.var(G.n, G.m, G.n - 1) ** 2))
        for w in forms:
            for H, a in zip(ctx.arrangement, ctx.a):
                for shift in (0, 1):
                    fast = S.adapted_divisibility(w, H, a + shift)
                    slow = S.adapted_divisibility_substituted(w, H, a + shift)
                    assert fast.passed == slow.passed
