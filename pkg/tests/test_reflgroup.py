import itertools

import pytest

from semiforms.exactnum import CycNum
from semiforms.linalg import Echelon, form_vector
from semiforms.polyring import DiffForm, MPoly
from semiforms.reflgroup import (
    CharacterError, ClosureCapExceeded, NonUnitary, NotAReflection, a_H, character, cyclic_group,
    generate_closure, group_from_json, identity, isotypic_dim, q_product, stanley_series,
)
from semiforms.semiinv import _monomial_forms, reynolds_project_bruteforce
from conftest import SHIPPED, group


def cz(m, v, k=0):
    return CycNum.from_rational(m, v) * CycNum.root_of_unity(m, k)


def test_closure_orders(g26, b2):
    assert g26.order == 1296
    assert b2.order == 8
    assert group("s2").order == 2
    assert group("cyclic_m").order == 6
    assert generate_closure([identity(2, 1)]).order == 1


def test_b2_is_signed_permutations(b2):
    # brute-force oracle: all 8 signed 2x2 permutation matrices
    mats = set()
    for perm in itertools.permutations(range(2)):
        for signs in itertools.product((1, -1), repeat=2):
            mats.add(tuple(tuple(cz(2, signs[i] if perm[i] == j else 0) for j in range(2))
                           for i in range(2)))
    assert {g.matrix for g in b2.elements} == mats


def test_closure_errors():
    with pytest.raises(NonUnitary):
        generate_closure([((cz(4, 2),),)])
    with pytest.raises(NotAReflection):
        generate_closure([((cz(4, -1), cz(4, 0)), (cz(4, 0), cz(4, -1)))])
    with pytest.raises(ClosureCapExceeded):
        generate_closure([((CycNum.root_of_unity(12, 1),),)], cap=5)


def test_arrangements(g26, b2):
    alphas = sorted(str(H.alpha) for H in b2.arrangement)
    assert alphas == ["x", "x + y", "x - y", "y"]
    assert all(H.stab_order == 2 for H in b2.arrangement)
    Z = group("cyclic_m")
    assert [(str(H.alpha), H.stab_order) for H in Z.arrangement] == [("x", 6)]
    orders = sorted(H.stab_order for H in g26.arrangement)
    assert orders.count(2) == 9 and orders.count(3) == 12


def test_a_h_values(b2):
    det = character(b2, 1)
    assert [a_H(H, det) for H in b2.arrangement] == [1, 1, 1, 1]
    Z = cyclic_group(6)
    for k in range(6):
        assert a_H(Z.arrangement[0], character(Z, k)) == (-k) % 6
    for name in SHIPPED:
        G = group(name)
        triv = character(G, 0)
        assert all(a_H(H, triv) == 0 for H in G.arrangement)


def test_a_h_independent_of_stabilizer_generator():
    for name in SHIPPED:
        G = group(name)
        for k in range(6):
            chi = character(G, k)
            for H in G.arrangement:
                gens = [G.elements[i] for i in H.stab_elements
                        if G.element_orders[i] == H.stab_order]
                assert len({a_H(H, chi, s) for s in gens}) == 1


def test_characters(g26, b2):
    chi = character(g26, "det^3")
    assert chi.order in (1, 2, 3, 6)
    assert character(g26, "det^0").is_trivial()
    assert character(g26, 6).is_trivial()
    tab = character(b2, {"generators": [-1, 1]})
    exps = [a_H(H, tab) for H in b2.arrangement]
    assert str(q_product(b2, exps)) == "x*y"
    with pytest.raises(CharacterError):
        character(b2, {"generators": [-1, CycNum.root_of_unity(2, 0) * 2]})
    with pytest.raises(CharacterError):
        character(b2, "det^x")


def _projection_rank(G, chi, p, d):
    """Explicit oracle: rank of brute-force projections of all monomial p-forms."""
    E = Echelon()
    for I, e in _monomial_forms(G.n, p, d):
        w = DiffForm.basis(G.n, G.m, I, MPoly.monomial(e, G.m))
        E.add(form_vector(reynolds_project_bruteforce(G, w, chi)))
    return E.rank


@pytest.mark.parametrize("name", ["b2", "s2", "cyclic_m"])
def test_isotypic_dim_against_explicit_projection(name):
    G = group(name)
    for k in range(3):
        chi = character(G, k)
        for p in range(G.n + 1):
            for d in range(6):
                assert isotypic_dim(G, chi, p, d) == _projection_rank(G, chi, p, d), (k, p, d)


def test_isotypic_dim_small_cases(g26, b2):
    for name in SHIPPED:
        G = group(name)
        assert isotypic_dim(G, character(G, 0), 0, 0) == 1
    det = character(b2, 1)
    assert [isotypic_dim(b2, det, 0, d) for d in range(13)] == stanley_series(4, [2, 4], 12)
    assert isotypic_dim(g26, character(g26, 3), 0, 9) == 1
    assert all(isotypic_dim(g26, character(g26, 3), 0, d) == 0 for d in range(9))


def test_stanley_series():
    assert stanley_series(0, [2, 4], 8) == [1, 0, 1, 0, 2, 0, 2, 0, 3]
    assert stanley_series(3, [1], 5) == [0, 0, 0, 1, 1, 1]


def test_json_roundtrip(g26):
    H = group_from_json(g26.to_json())
    assert H.order == g26.order
    assert {g.matrix for g in H.elements} == {g.matrix for g in g26.elements}
