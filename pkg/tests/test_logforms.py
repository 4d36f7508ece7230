import random

import pytest

from semiforms import logforms as L, semiinv as S
from semiforms.exactnum import CycNum
from semiforms.polyring import DiffForm, MPoly
from semiforms.reflgroup import Hyperplane
from conftest import group, reference_forms


def test_multiarrangement_poly(b2):
    ctx = S.context(b2, 1)
    M = L.multiarrangement_for(ctx)
    assert M.defining_poly == ctx.q_chi
    assert [a for _, a in M.hyperplanes] == ctx.a
    triv = L.multiarrangement_for(S.context(b2, 0))
    assert triv.defining_poly == MPoly.const(2, 2, 1)


def test_membership_examples(b2):
    ctx = S.context(b2, 1)
    M = L.multiarrangement_for(ctx)
    for i in range(2):
        assert L.is_logarithmic(DiffForm.dx(2, 2, i).scale(ctx.q_chi), M)
    res = L.is_logarithmic(DiffForm.dx(2, 2, 0), M)
    assert not res.passed and str(res.hyperplane.alpha) == "x - y"


def test_projected_forms_are_logarithmic(b2):
    rng = random.Random(7)
    for k in range(2):
        ctx = S.context(b2, k)
        M = L.multiarrangement_for(ctx)
        forms = [ctx.projector.random_form(rng, p, d) for p in (1, 2) for d in range(1, 7)]
        forms = [w for w in forms if w]
        assert forms
        for w in forms:
            assert L.is_logarithmic(w, M)
        for a, b in zip(forms, forms[1:]):
            assert L.closure_product_check(a, b, M)


def test_rescaled_alpha_gives_same_answer(b2):
    ctx = S.context(b2, 1)
    M = L.multiarrangement_for(ctx)
    c = CycNum.from_rational(2, -7)
    scaled = L.Multiarrangement(tuple(
        (Hyperplane(H.alpha.scale(c), H.normal, H.stab_order, H.stab_generator, H.stab_elements), a)
        for H, a in M.hyperplanes))
    rng = random.Random(1)
    for w in [ctx.projector.random_form(rng, 1, d) for d in (3, 5)] + [DiffForm.dx(2, 2, 1)]:
        assert bool(L.is_logarithmic(w, M)) == bool(L.is_logarithmic(w, scaled))


def test_zero_forms_and_reference_pair(g26):
    b2 = group("b2")
    ctx = S.context(b2, 1)
    M = L.multiarrangement_for(ctx)
    q = DiffForm.from_poly(ctx.q_chi)
    assert L.closure_product_check(q, q, M)
    ctx3 = S.context(g26, 3)
    M3 = L.multiarrangement_for(ctx3)
    w1, w2, _ = reference_forms()
    assert L.closure_product_check(w1, w2, M3)


def test_closure_precondition(b2):
    M = L.multiarrangement_for(S.context(b2, 1))
    with pytest.raises(ValueError):
        L.closure_product_check(DiffForm.dx(2, 2, 0), DiffForm.dx(2, 2, 1), M)
