import itertools

import pytest

from polytree import fixtures as F
from polytree import hom as H
from polytree import machine as M
from polytree import poly as P
from polytree import tree as T
from polytree.poly import Coalgebra, Poly, PolyMap
from polytree.tree import constant_tree

B = Poly.of(1, 0)
BB = constant_tree(B)
H_BB = P.ihom_poly(B, B)


def refinement_by_hand(p, q, n, str_n=3):
    """The read-only embedding written directly as a tower, independent of the machine."""
    if n == 0:
        return H.TRIVIAL
    a, b = p.root(), q.root()
    if a.npos == 2:
        m = P.identity_poly_map(a)
    else:
        on_pos = tuple(range(str_n)) + (2 * str_n,)
        m = PolyMap(a, b, on_pos, tuple(tuple(range(b.dirs(j))) for j in on_pos))
    kids = tuple(
        refinement_by_hand(p.child(i, m.on_dir[i][e]), q.child(m.on_pos[i], e), n - 1, str_n)
        for i, e in m.directions()
    )
    return H.TruncMorphism(n, m, kids)


def test_identity_machines_validate_and_unfold():
    for t in (F.login_tree(), F.cell_tree(), F.nim_tree(5), BB):
        m = M.id_machine(t)
        assert M.validate_machine(m)
        for n in range(4):
            assert M.unfold_machine(m, n) == H.id_trunc(t, n)


def test_refinement_unfolds_to_the_embedding():
    ref = F.readonly_refinement()
    assert M.validate_machine(ref)
    assert M.validate_machine(ref, depth=6)
    for n in range(5):
        assert M.unfold_machine(ref, n) == refinement_by_hand(ref.p, ref.q, n)
        assert H.validate_trunc(M.unfold_machine(ref, n), ref.p, ref.q)


def test_unfold_projection():
    ref = F.readonly_refinement()
    deep = M.unfold_machine(ref, 4)
    for m in range(5):
        assert deep.restrict(m) == M.unfold_machine(ref, m)


def test_stale_code_reports_triple():
    login = F.login_tree()
    root_id = P.identity_poly_map(login.root())
    stale = M.machine(login, login, 1, 0, lambda s, a, b: root_id, lambda s, a, b, i, e: 0)
    res = M.validate_machine(stale)
    assert not res
    assert res.path == (0, 1, 1)
    assert "act source code mismatch" in res.message


def test_unknown_state_and_undefined_act():
    login = F.login_tree()
    bad_upd = M.machine(login, login, 1, 0, lambda s, a, b: P.identity_poly_map(a.root()), lambda s, a, b, i, e: 7)
    res = M.validate_machine(bad_upd)
    assert not res and "unknown state 7" in res.message

    def partial(s, a, b):
        if a.key == "authenticated":
            raise KeyError("no row")
        return P.identity_poly_map(a.root())

    res = M.validate_machine(M.machine(login, login, 1, 0, partial, lambda s, a, b, i, e: 0))
    assert not res and res.message.startswith("act undefined") and res.path == (0, 1, 1)


def test_composition_with_identity():
    ref = F.readonly_refinement()
    comp = M.compose_machines(ref, M.id_machine(ref.q))
    assert comp.states == ((0, 0),)
    for n in range(4):
        assert M.unfold_machine(comp, n) == M.unfold_machine(ref, n)
    with pytest.raises(M.MachineError):
        M.compose_machines(M.id_machine(ref.q), ref)


def test_unfolding_is_functorial_for_coalgebras():
    coalgs = list(P.all_coalgebras(H_BB, 1)) + list(P.all_coalgebras(H_BB, 2))
    for c1, c2 in itertools.product(coalgs[:6], coalgs[-6:]):
        e1, e2 = M.embed_coalgebra(B, B, c1), M.embed_coalgebra(B, B, c2)
        comp = M.compose_machines(e1, e2)
        assert M.validate_machine(comp)
        for n in range(4):
            assert M.unfold_machine(comp, n) == H.compose_trunc(M.unfold_machine(e1, n), M.unfold_machine(e2, n))


def test_embedded_single_state_applies_map_twice():
    for k in range(P.map_count(B, B)):
        phi = P.map_at(B, B, k)
        beta = Coalgebra(H_BB, ((k, (0,) * len(phi.directions())),))
        u = M.unfold_machine(M.embed_coalgebra(B, B, beta), 2)
        assert u.root_map == phi
        assert all(c.root_map == phi for c in u.children)
    with pytest.raises(M.MachineError):
        M.embed_coalgebra(B, P.Y, Coalgebra(H_BB, ((0, (0,)),)))


def _coalgebras_up_to(n):
    return [c for k in range(1, n + 1) for c in P.all_coalgebras(H_BB, k)]


def test_machine_maps_are_coalgebra_morphisms():
    coalgs = _coalgebras_up_to(2)
    three = list(P.all_coalgebras(H_BB, 3))[::97]
    for c1, c2 in itertools.chain(itertools.product(coalgs, repeat=2), itertools.product(three, coalgs)):
        e1, e2 = M.embed_coalgebra(B, B, c1), M.embed_coalgebra(B, B, c2)
        assert set(M.machine_maps(e1, e2)) == set(P.coalgebra_morphisms(c1, c2))


def test_machine_map_basics():
    ref = F.readonly_refinement()
    assert M.check_machine_map({0: 0}, ref, ref)
    c = Coalgebra(H_BB, ((0, (1,)), (1, ())))
    e = M.embed_coalgebra(B, B, c)
    assert P.map_at(B, B, 0) != P.map_at(B, B, 1)
    assert M.check_machine_map(lambda s: s, e, e)
    assert not M.check_machine_map([0, 0], e, e)


def test_time_invariance():
    coalgs = _coalgebras_up_to(2)
    for c in coalgs:
        e = M.embed_coalgebra(B, B, c)
        assert M.is_time_invariant(e)
        assert M.retract_to_coalgebra(e) == c


def test_parity_machine_is_time_invariant():
    maps = [P.map_at(B, B, k) for k in range(2)]
    two_phase = M.machine(BB, BB, 2, 0, lambda s, a, b: maps[s], lambda s, a, b, i, e: 1 - s)
    assert M.is_time_invariant(two_phase)


def test_node_dependent_single_state_is_not_time_invariant():
    # B presented with two nodes; the second node acts differently.
    u = T.unrolled_constant(B, 1)
    maps = [P.map_at(B, B, k) for k in range(2)]
    m = M.machine(u, BB, 1, 0, lambda s, a, b: maps[a.node], lambda s, a, b, i, e: 0)
    assert M.validate_machine(m)
    assert not M.is_time_invariant(m)
    with pytest.raises(M.MachineError):
        M.is_time_invariant(F.readonly_refinement())


def test_recovery_round_trip():
    homs = H.enumerate_trunc_homs(BB, BB, 2)
    assert len(homs) == 3
    for phi in homs:
        mach = M.trunc_to_s1(phi, BB, BB)
        assert M.validate_machine(mach, depth=2)
        assert M.s1_to_trunc(mach, 2) == phi
    ident = M.trunc_to_s1(H.id_trunc(F.login_tree(), 3), F.login_tree(), F.login_tree())
    assert M.s1_to_trunc(ident, 3) == M.unfold_machine(M.id_machine(F.login_tree()), 3)
    with pytest.raises(M.MachineError):
        M.s1_to_trunc(M.embed_coalgebra(B, B, Coalgebra(H_BB, ((1, ()), (1, ())))), 1)


def test_single_state_machines_count_homs():
    for n in range(4):
        u = T.unrolled_constant(B, n)
        unfolded = {M.unfold_machine(m, n) for m in M.node_machines(u, u)}
        assert len(unfolded) == H.count_trunc_homs(BB, BB, n) == n + 1


def test_witnesses():
    w = M.witness_from_y(F.nim_tree(4))
    assert w is not None and M.validate_machine(w)
    assert M.witness_from_y(F.nim_tree(3)) is None
    assert M.witness_to_y(F.nim_tree(3)) is not None
    assert M.witness_to_y(F.nim_tree(1)) is None
    z = M.witness_to_y(constant_tree(P.ZERO))
    assert z is not None and M.validate_machine(z)


def test_simulation_follows_the_tree():
    sim = M.Simulation(F.readonly_refinement())
    assert sim.nodes[1].key == "start"
    rec = sim.step(0, 0)
    assert rec == {"step": 1, "i": 0, "j": 0, "e": 0, "d": 0}
    assert sim.nodes[0].key == sim.nodes[1].key == "authenticated"
    assert sim.action().on_pos[-1] == 6


def test_organ_machine():
    org = F.organ_machine(2)
    assert M.validate_machine(org, depth=4)
    root = M.unfold_machine(org, 1).root_map
    assert root.source.npos == 8 and root.target == Poly.of(2, 2)
    assert root.on_pos == tuple(max(c) for c in itertools.product(range(2), repeat=3))
