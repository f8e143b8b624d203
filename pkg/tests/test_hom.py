import random

import pytest

from polytree import fixtures as F
from polytree import hom as H
from polytree import laws as L
from polytree import poly as P
from polytree import tree as T
from polytree.poly import Poly
from polytree.tree import constant_tree

B = Poly.of(1, 0)
BB = constant_tree(B)
YB = constant_tree(P.Y)


def test_counts_for_constant_b():
    assert H.hom_count_table(BB, BB, 3) == [1, 2, 3, 4]
    assert [len(H.enumerate_trunc_homs(BB, BB, n)) for n in range(4)] == [1, 2, 3, 4]


def test_counts_match_cofree_counts():
    h = P.ihom_poly(B, B)
    assert [P.cofree_count(h, n) for n in range(4)] == [1, 2, 3, 4]


def test_login_counts():
    login = F.login_tree()
    # root maps Login -> Login: the start node maps to itself (login keeps both
    # replies) or to quit; 5 in total.
    assert H.hom_count_table(login, login, 1) == [1, 5]
    assert H.count_ihom_positions(login, login, 2) == H.count_trunc_homs(login, login, 2)
    small = F.login_tree(1, 1)
    assert [len(H.enumerate_trunc_homs(small, small, n)) for n in range(3)] == H.hom_count_table(small, small, 2)


def test_enumeration_distinct_and_valid():
    small = F.login_tree(1, 1)
    homs = H.enumerate_trunc_homs(small, small, 2)
    assert len(set(homs)) == len(homs)
    assert all(H.validate_trunc(h, small, small) for h in homs)


def test_budget_guard():
    login = F.login_tree()
    with pytest.raises(P.BudgetExceeded):
        H.enumerate_trunc_homs(login, login, 2)


def test_validate_reports_path():
    login = F.login_tree()
    good = H.id_trunc(login, 2)
    assert H.validate_trunc(good, login, login)
    # The child under (i=0, e=0) must go between authenticated nodes, not start nodes.
    bad = H.TruncMorphism(2, good.root_map, (H.id_trunc(login, 1),) + good.children[1:])
    res = H.validate_trunc(bad, login, login)
    assert not res and res.path == ((0, 0),) and "does not match" in res.message
    short = H.TruncMorphism(2, good.root_map, (H.TRIVIAL,) + good.children[1:])
    res = H.validate_trunc(short, login, login)
    assert not res and res.path == ((0, 0),) and "depth 0" in res.message
    assert not H.validate_trunc(H.TruncMorphism(2, good.root_map, good.children[:1]), login, login)


def test_restrict_is_projection():
    small = F.login_tree(1, 1)
    for phi in H.enumerate_trunc_homs(small, small, 2):
        assert phi.restrict(1) in set(H.enumerate_trunc_homs(small, small, 1))
    with pytest.raises(H.HomError):
        H.id_trunc(small, 1).restrict(2)


def test_identity_and_composition_laws():
    rng = random.Random(1)
    login = F.login_tree()
    for _ in range(8):
        f = L.random_trunc_hom(login, login, 3, rng)
        g = L.random_trunc_hom(login, login, 3, rng)
        k = L.random_trunc_hom(login, login, 3, rng)
        assert H.compose_trunc(H.id_trunc(login, 3), f) == f == H.compose_trunc(f, H.id_trunc(login, 3))
        assert H.compose_trunc(H.compose_trunc(f, g), k) == H.compose_trunc(f, H.compose_trunc(g, k))
        assert H.validate_trunc(H.compose_trunc(f, g), login, login)


def test_random_sampler_only_yields_valid_homs():
    rng = random.Random(7)
    for p, q in ((F.login_tree(), F.login_tree()), (F.readonly_tree(), F.login_tree()), (YB, BB)):
        for _ in range(10):
            phi = L.random_trunc_hom(p, q, 3, rng)
            assert phi is not None and H.validate_trunc(phi, p, q, 3)
    assert L.random_trunc_hom(BB, YB, 1, rng) is None
    assert H.count_trunc_homs(BB, YB, 1) == 0


def test_strictness_of_constant_tensor():
    for p in L.poly_fixtures().values():
        for q in L.poly_fixtures().values():
            assert T.structurally_equal(
                T.tensor_tree(constant_tree(p), constant_tree(q)), constant_tree(P.tensor_poly(p, q))
            )


def test_braid_involutive_and_natural():
    login, nim = F.login_tree(1, 1), F.nim_tree(3)
    for n in range(4):
        b1, b2 = H.braid(login, nim, n), H.braid(nim, login, n)
        assert H.compose_trunc(b1, b2) == H.id_trunc(T.tensor_tree(login, nim), n)
        assert H.validate_trunc(b1, T.tensor_tree(login, nim), T.tensor_tree(nim, login))


def test_assoc_and_unitors_are_isos():
    p, q, r = F.login_tree(1, 1), BB, F.nim_tree(3)
    for n in range(3):
        assert H.is_iso_trunc(H.assoc(p, q, r, n), H.assoc_inv(p, q, r, n), _t(_t(p, q), r), _t(p, _t(q, r)))
        assert H.is_iso_trunc(H.left_unitor(p, n), H.left_unitor_inv(p, n), _t(YB, p), p)
        assert H.is_iso_trunc(H.right_unitor(p, n), H.right_unitor_inv(p, n), _t(p, YB), p)
        s = T.sum_tree(q, r)
        assert H.is_iso_trunc(
            H.distrib(p, q, r, n), H.distrib_inv(p, q, r, n), _t(p, s), T.sum_tree(_t(p, q), _t(p, r))
        )


def _t(a, b):
    return T.tensor_tree(a, b)


def test_coproduct_not_preserved_at_depth_two():
    s = T.sum_tree(YB, constant_tree(P.ONE))
    assert T.bisimilar(s, constant_tree(B), 1)
    assert not T.bisimilar(s, constant_tree(B), 2)
    # the sum keeps y below its first position, the constant tree offers y + 1 again
    assert s.child(0, 0).root() == P.Y
    assert H.count_trunc_homs(s, s, 2) != H.count_trunc_homs(BB, BB, 2)


def test_tensor_distributes_over_sums():
    p = F.nim_tree(2)
    s = T.sum_tree(YB, constant_tree(P.ONE))
    assert T.bisimilar(_t(p, s), T.sum_tree(_t(p, YB), _t(p, constant_tree(P.ONE))))


@pytest.mark.parametrize("r,p,q", [(YB, BB, BB), (BB, YB, BB), (YB, F.login_tree(1, 1), F.login_tree(1, 1))])
def test_curry_round_trip(r, p, q):
    rng = random.Random(3)
    pq = H.ihom_tree(p, q)
    for n in range(4):
        assert H.count_trunc_homs(_t(r, p), q, n) == H.count_homs_to_ihom(r, p, q, n)
        if n <= 2:
            assert H.count_trunc_homs(r, pq, n) == H.count_homs_to_ihom(r, p, q, n)
        for phi in L.closure_cases(r, p, q, n, rng):
            psi = H.curry(phi, r, p, q)
            assert H.validate_trunc(psi, r, pq, n)
            assert H.uncurry(psi, r, p, q) == phi


def test_curry_surjective_small():
    r, p, q = YB, BB, BB
    pq = H.ihom_tree(p, q)
    for n in range(3):
        targets = set(H.enumerate_trunc_homs(r, pq, n))
        curried = {H.curry(phi, r, p, q) for phi in H.enumerate_trunc_homs(_t(r, p), q, n)}
        assert curried == targets


def test_positions_of_ihom_tree_name_homs():
    small = F.login_tree(1, 1)
    for n in range(3):
        homs = H.enumerate_trunc_homs(small, small, n)
        positions = {H.hom_to_position(h) for h in homs}
        assert len(positions) == len(homs)
        assert all(H.position_to_hom(H.hom_to_position(h), small, small, n) == h for h in homs)
        assert len(homs) == H.count_ihom_positions(small, small, n)


def test_count_oracles_agree_on_login():
    login = F.login_tree()
    assert H.count_trunc_homs(login, login, 2) == 8199965982269871
    assert H.count_ihom_positions(login, login, 2) == 8199965982269871
    for n in range(4):
        assert H.count_homs_to_ihom(YB, login, login, n) == H.count_trunc_homs(_t(YB, login), login, n)


def test_injections_and_copair():
    p, q = BB, F.nim_tree(3)
    s = T.sum_tree(p, q)
    for n in range(3):
        assert H.copair(H.injection_trunc(p, q, 0, n), H.injection_trunc(p, q, 1, n)) == H.id_trunc(s, n)


def test_constant_trunc_functor():
    f = P.map_at(B, B, 1)
    assert H.constant_trunc(f, 2).root_map == f
    assert H.validate_trunc(H.constant_trunc(f, 3), BB, BB)
