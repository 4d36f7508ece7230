"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""

import itertools
import random
import sys
from contextlib import contextmanager

import pytest

from semiforms import logforms as L, semiinv as S
from semiforms.cli import Report, cmd_verify_g26
from semiforms.exactnum import CycNum
from semiforms.polyring import DiffForm, eq_up_to_scalar, jacobian_det
from semiforms.reflgroup import cyclic_group, isotypic_dim, stanley_series
from conftest import SHIPPED, group

SEED = 20240917


@contextmanager
def criterion(number, title, capsys):
    ok = False
    try:
        yield
        ok = True
    finally:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")


def det_powers(G):
    return range(S.det_character(G).order)


def low_degrees(ctx, p, count=3, limit=60):
    out = []
    for d in range(limit):
        if isotypic_dim(ctx.G, ctx.chi, p, d):
            out.append(d)
            if len(out) == count:
                break
    return out


def sample(ctx, rng, p, count):
    degs = low_degrees(ctx, p)
    return [ctx.projector.random_form(rng, p, rng.choice(degs)) for _ in range(count)]


class Args:
    group = "g26"
    forms = None


def test_criterion_1_g26_reproduction(capsys):
    with criterion(1, "G26 closure, Q_det^3, Q_det^4, reference forms, -16 witness", capsys):
        rep = Report("verify-g26")
        cmd_verify_g26(Args(), rep)
        failed = [c["name"] for c in rep.checks if not c["pass"]]
        assert not failed, failed
        names = " ".join(c["name"] for c in rep.checks)
        for needle in ("1296", "Q_det^3", "Q_det^4", "invariant", "divides", "-16", "saito"):
            assert needle in names
        assert rep.data["q_det4_literal_matches"] is False
        assert rep.data["witness_scalar"] == CycNum.from_rational(12, -16).to_json()


def test_criterion_2_stanley(capsys):
    with criterion(2, "isotypic dimensions equal t^deg Q_chi / prod(1 - t^d_i)", capsys):
        for name in SHIPPED:
            G = group(name)
            degrees = S.basic_invariants(G).degrees
            D = 2 * S.context(G, 0).q_det.degree()
            for k in det_powers(G):
                ctx = S.context(G, k)
                got = [isotypic_dim(G, ctx.chi, 0, d) for d in range(D + 1)]
                assert got == stanley_series(ctx.q_chi.degree(), degrees, D), (name, k)


def test_criterion_3_steinberg(capsys):
    with criterion(3, "Jacobian of basic invariants is a multiple of Q_det", capsys):
        for name in SHIPPED:
            G = group(name)
            b = S.basic_invariants(G)
            c = eq_up_to_scalar(jacobian_det(b.fs), S.q_poly(G, S.det_character(G)))
            assert c is not None and c, name


def test_criterion_4_adapted_divisibility(capsys):
    with criterion(4, "coordinate-adapted divisibility of invariant 1- and 2-forms", capsys):
        for name in SHIPPED:
            G = group(name)
            for k in det_powers(G):
                ctx = S.context(G, k)
                rng = random.Random(f"{SEED}-{name}-{k}-4")
                forms = []
                for p in range(1, min(2, G.n) + 1):
                    forms += sample(ctx, rng, p, 50)
                for w in forms:
                    assert w
                    for H, a in zip(ctx.arrangement, ctx.a):
                        rep = S.adapted_divisibility(w, H, a)
                        assert rep.passed, (name, k, str(H.alpha), rep.witness)


def test_criterion_5_q_divides_products(capsys):
    with criterion(5, "Q_chi divides products; the chi-wedge is chi-invariant", capsys):
        for name in SHIPPED:
            G = group(name)
            for k in det_powers(G):
                ctx = S.context(G, k)
                rng = random.Random(f"{SEED}-{name}-{k}-5")
                for _ in range(100):
                    p = rng.randint(1, G.n)
                    q = rng.randint(0, G.n - p)
                    mu = sample(ctx, rng, p, 1)[0]
                    w = sample(ctx, rng, q, 1)[0]
                    v = S.chi_wedge(mu, w, ctx)
                    assert v.p == p + q
                    assert ctx.is_invariant(v), (name, k)


def test_criterion_6_generator_search(capsys):
    with criterion(6, "find_generators within the degree cap passes the criterion", capsys):
        for name in SHIPPED:
            G = group(name)
            for k in det_powers(G):
                ctx = S.context(G, k)
                cap = ctx.q_chi_det.degree() + ctx.q_det.degree()
                cert = S.find_generators(ctx, max(cap, 1))
                assert cert.ok and cert.witness_scalar, (name, k)
                assert max(cert.degrees) <= max(cap, 1)
                if G.n > 1:
                    forms = list(cert.forms)
                    forms[-1] = forms[0]
                    bad = S.saito_check(forms, ctx)
                    assert not bad.ok and "zero" in bad.reason


def test_criterion_7_recurrence(capsys):
    with criterion(7, "a_H(chi det) recurrence on every hyperplane", capsys):
        for name in SHIPPED:
            G = group(name)
            det = S.det_character(G)
            for k in det_powers(G):
                chi = S.context(G, k).chi
                for H in G.arrangement:
                    assert S.ah_recurrence_check(H, chi, det).passed, (name, k)


def test_criterion_8_logarithmic(capsys):
    with criterion(8, "projected forms are logarithmic; products stay logarithmic", capsys):
        for name in SHIPPED:
            G = group(name)
            for k in det_powers(G):
                ctx = S.context(G, k)
                M = L.multiarrangement_for(ctx)
                rng = random.Random(f"{SEED}-{name}-{k}-8")
                pool = []
                for p in range(1, G.n + 1):
                    pool += sample(ctx, rng, p, 6)
                for w in pool:
                    assert L.is_logarithmic(w, M), (name, k)
                for _ in range(50):
                    a, b = rng.choice(pool), rng.choice(pool)
                    assert L.closure_product_check(a, b, M), (name, k)


def test_criterion_9_duality(capsys):
    with criterion(9, "dual derivations wedge to Q_(psi det^-1) D-vol; double dual is +-id", capsys):
        for name in ("b2", "s2", "cyclic_m"):
            G = group(name)
            for k in det_powers(G):
                ctx = S.context(G, k)
                cert = S.find_generators(ctx)
                thetas = S.dual_generators(cert, ctx)
                psi = S.context(G, ctx.chi_det)
                for t in thetas:
                    assert S.is_chi_invariant(G, psi.chi, t)
                c = S.derivation_saito_check(thetas, psi)
                assert c is not None and c, (name, k)
        Z = cyclic_group(5)
        for k in range(5):
            ctx = S.context(Z, k)
            thetas = S.dual_generators(S.find_generators(ctx), ctx)
            assert S.derivation_saito_check(thetas, S.context(Z, ctx.chi_det))
        rng = random.Random(SEED)
        for name in SHIPPED:
            G = group(name)
            ctx = S.context(G, 1)
            for p in range(G.n + 1):
                for w in sample(ctx, rng, p, 3):
                    back = S.form_dual(S.derivation_dual(w))
                    assert back == w or back == -w


def test_criterion_10_wedge_algebra(capsys):
    with criterion(10, "unit, associativity and graded commutativity of the chi-wedge", capsys):
        for name in SHIPPED:
            G = group(name)
            for k in det_powers(G):
                ctx = S.context(G, k)
                unit = DiffForm.from_poly(ctx.q_chi)
                rng = random.Random(f"{SEED}-{name}-{k}-10")
                triples = [t for t in itertools.product(range(3), repeat=3) if sum(t) <= G.n]
                for _ in range(5):
                    ps = rng.choice(triples)
                    a, b, c = (sample(ctx, rng, p, 1)[0] for p in ps)
                    assert S.chi_wedge(unit, a, ctx) == a == S.chi_wedge(a, unit, ctx)
                    left = S.chi_wedge(S.chi_wedge(a, b, ctx), c, ctx)
                    right = S.chi_wedge(a, S.chi_wedge(b, c, ctx), ctx)
                    assert left == right
                    sign = -1 if (a.p * b.p) % 2 else 1
                    ab, ba = S.chi_wedge(a, b, ctx), S.chi_wedge(b, a, ctx)
                    assert ab == (ba if sign == 1 else -ba)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
