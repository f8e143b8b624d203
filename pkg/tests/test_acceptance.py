"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line."""
import itertools
import random
import time

import numpy as np
import pytest

from polytree import fixtures as F
from polytree import hom as H
from polytree import laws as L
from polytree import machine as M
from polytree import poly as P
from polytree import tree as T
from polytree.poly import Poly
from polytree.tree import constant_tree

B = Poly.of(1, 0)
BB = constant_tree(B)
YB = constant_tree(P.Y)


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return emit


def _suites(names, depth):
    results = L.run_suites(depth, names)
    bad = [f"{r.name}={r.status} {r.detail}" for r in results if r.status != "pass"]
    return not bad, bad


def test_criterion_1_poly_laws(report):
    start = time.perf_counter()
    ok, bad = _suites(["poly-counts", "poly-category", "poly-functor"], 3)
    n_b = len(P.enumerate_maps(B, B))
    n_b2 = len(P.enumerate_maps(Poly.of(2, 0), Poly.of(2, 0)))
    elapsed = time.perf_counter() - start
    ok = ok and n_b == 2 and n_b2 == 5 and elapsed < 10.0
    report(1, ok, f"suites {bad or 'all pass'}; |Poly(y+1,y+1)|={n_b}, |Poly(y^2+1,y^2+1)|={n_b2}; {elapsed:.2f}s < 10s")


def test_criterion_2_correspondence(report):
    h = P.ihom_poly(B, B)
    towers = [H.count_trunc_homs(BB, BB, n) for n in range(4)]
    listed = [len(H.enumerate_trunc_homs(BB, BB, n)) for n in range(4)]
    cofree = [P.cofree_count(h, n) for n in range(4)]
    login = F.login_tree()
    login_towers = [H.count_trunc_homs(login, login, n) for n in range(3)]
    # positions of the truncated internal-hom tree; depth 1 also straight from the lazy tree
    login_ihom = [H.count_ihom_positions(login, login, n) for n in range(3)]
    direct = T.count_positions(T.truncate(H.ihom_tree(login, login), 1))
    ok = towers == listed == cofree == [1, 2, 3, 4] and login_towers == login_ihom and direct == login_ihom[1]
    report(2, ok, f"B: towers {towers} = cofree {cofree}; Login n<=2: towers {login_towers} = ihom positions {login_ihom}")


def _closure_exhaustive(r, p, q, n):
    rp, pq = T.tensor_tree(r, p), H.ihom_tree(p, q)
    homs = H.enumerate_trunc_homs(rp, q, n)
    curried = [H.curry(phi, r, p, q) for phi in homs]
    round_trip = all(H.uncurry(psi, r, p, q) == phi for phi, psi in zip(homs, curried))
    valid = all(H.validate_trunc(psi, r, pq, n) for psi in curried)
    targets = set(H.enumerate_trunc_homs(r, pq, n))
    return round_trip and valid and set(curried) == targets and len(homs) == len(targets), len(homs)


def test_criterion_3_closure(report):
    rng = random.Random(L.SEED)
    notes, ok = [], True
    for name, (r, p, q) in {"(y,B,B)": (YB, BB, BB), "(B,y,B)": (BB, YB, BB)}.items():
        counts = []
        for n in range(4):
            good, count = _closure_exhaustive(r, p, q, n)
            ok &= good and count == H.count_homs_to_ihom(r, p, q, n)
            counts.append(count)
        notes.append(f"{name} exhaustive {counts}")
    login = F.login_tree()
    rl = T.tensor_tree(YB, login)
    counts = [H.count_trunc_homs(rl, login, n) for n in range(4)]
    ok &= counts == [H.count_homs_to_ihom(YB, login, login, n) for n in range(4)]
    ok &= H.count_trunc_homs(YB, H.ihom_tree(login, login), 1) == counts[1]
    good, _ = _closure_exhaustive(YB, login, login, 1)
    ok &= good
    # deeper levels are far too many to list; check seeded samples element by element
    sampled = 0
    for n in (2, 3):
        for phi in L.closure_cases(YB, login, login, n, rng):
            psi = H.curry(phi, YB, login, login)
            ok &= H.uncurry(psi, YB, login, login) == phi
            ok &= bool(H.validate_trunc(psi, YB, H.ihom_tree(login, login), n))
            sampled += 1
    small = F.login_tree(1, 1)
    for n in range(3):
        good, _ = _closure_exhaustive(YB, small, small, n)
        ok &= good
    shown = [c if c < 10**12 else f"~1e{len(str(c)) - 1}" for c in counts]
    notes.append(f"(y,Login,Login) counts {shown} equal; every element at n<=1, {sampled} sampled at n=2,3")
    report(3, ok, "; ".join(notes))


def test_criterion_4_coherence(report):
    fixtures = L.small_trees()
    ok, bad = _suites(["pentagon", "triangle", "hexagon", "distributivity"], 3)
    strict = all(
        T.structurally_equal(T.tensor_tree(constant_tree(p), constant_tree(q)), constant_tree(P.tensor_poly(p, q)))
        for p, q in itertools.product(L.poly_fixtures().values(), repeat=2)
    )
    s = T.sum_tree(YB, constant_tree(P.ONE))
    witness = T.bisimilar(s, constant_tree(B), 1) and not T.bisimilar(s, constant_tree(B), 2)
    ok = ok and strict and witness and len(fixtures) >= 5
    report(4, ok, f"coherence {bad or 'all pass'} over {len(fixtures)} trees; strictness {strict}; "
                  f"coproduct differs first at depth 2: {witness}")


def _recovery(p, q, homs):
    for phi in homs:
        n = phi.depth
        mach = M.trunc_to_s1(phi, p, q)
        if not (M.validate_machine(mach, depth=n) and M.s1_to_trunc(mach, n) == phi):
            return False
        if M.trunc_to_s1(M.s1_to_trunc(mach, n), p, q).morphism != phi:
            return False
    return True


def test_criterion_5_recovery(report):
    rng = random.Random(L.SEED + 1)
    bb = H.enumerate_trunc_homs(BB, BB, 2)
    ok = len(bb) == 3 and _recovery(BB, BB, bb)
    login = F.login_tree()
    listed = [h for n in range(2) for h in H.enumerate_trunc_homs(login, login, n)]
    sampled = [L.random_trunc_hom(login, login, 2, rng) for _ in range(200)]
    ok &= _recovery(login, login, listed + sampled)
    small = F.login_tree(1, 1)
    small_homs = H.enumerate_trunc_homs(small, small, 2)
    ok &= _recovery(small, small, small_homs)
    report(5, ok, f"B: all {len(bb)} depth-2 homs; Login: all {len(listed)} at depth<=1, 200 sampled at depth 2 "
                  f"(of {H.count_trunc_homs(login, login, 2)}); one-letter Login: all {len(small_homs)} at depth 2")


def test_criterion_6_coalgebras(report):
    h = P.ihom_poly(B, B)
    coalgs = [c for k in (1, 2) for c in P.all_coalgebras(h, k)]
    pairs = maps_equal = 0
    compose_ok = True
    for c1, c2 in itertools.product(coalgs, repeat=2):
        e1, e2 = M.embed_coalgebra(B, B, c1), M.embed_coalgebra(B, B, c2)
        pairs += 1
        maps_equal += set(M.machine_maps(e1, e2)) == set(P.coalgebra_morphisms(c1, c2))
        comp = M.embed_coalgebra(B, B, M.compose_coalgebras(c1, c2, B, B, B))
        joint = M.compose_machines(e1, e2)
        compose_ok &= all(M.unfold_machine(joint, n) == M.unfold_machine(comp, n) for n in range(4))
    ok = maps_equal == pairs and compose_ok
    report(6, ok, f"{maps_equal}/{pairs} coalgebra pairs with equal map sets; composition respected to depth 3: {compose_ok}")


def _never_loses(mach):
    def go(s, ctx):
        node = mach.endpoints(ctx)[1]
        if node.root().npos == 0:
            return False
        i = mach.action(s, ctx).on_pos[0]
        if node.root().dirs(i) == 0:
            return True
        return all(go(*mach.advance(s, ctx, 0, e)) for e in range(node.root().dirs(i)))

    return go(mach.start, mach.initial())


def test_criterion_7_strategies(report):
    start = time.perf_counter()
    decided = [T.exists_map_from_y(F.nim_tree(h)) for h in range(1, 10)]
    expected = [h % 3 != 0 for h in range(1, 10)]
    oracle = [L.minimax_first_player_wins(h, (1, 2)) for h in range(1, 10)]
    witnesses = [M.witness_from_y(F.nim_tree(h)) for h in (4, 5)]
    wins = all(w is not None and M.validate_machine(w) and _never_loses(w) for w in witnesses)
    elapsed = time.perf_counter() - start
    ok = decided == expected == oracle and wins and elapsed < 5.0
    report(7, ok, f"h=1..9 decided {''.join('1' if x else '0' for x in decided)} matches minimax; "
                  f"witnesses for 4, 5 never lose: {wins}; {elapsed:.2f}s < 5s")


def test_criterion_8_refinement(report):
    ref = F.readonly_refinement()
    valid = bool(M.validate_machine(ref, depth=6))
    same_trees = T.structurally_equal(ref.p, F.readonly_tree()) and T.structurally_equal(ref.q, F.login_tree())
    hits = [
        j
        for ctx in M.reachable_contexts(ref)
        for j in ref.action(0, ctx).on_pos
        if ref.endpoints(ctx)[1].root().pos_label(j).startswith("set:")
    ]
    ok = valid and same_trees and not hits
    report(8, ok, f"validates to depth 6: {valid}; set positions hit: {len(hits)}")


def test_criterion_9_progressive(report):
    start = time.perf_counter()
    cfg = F.ProgressiveConfig(latent_dim=2, resolutions=(1, 2), levels=3, seed=42)
    log = F.progressive_demo(cfg, 200)
    again = F.progressive_demo(cfg, 200)
    a = F.dump_log(log) == F.dump_log(again)

    last = len(cfg.resolutions) - 1
    b = True
    for prev, nxt in zip(log, log[1:]):
        cot = np.array(prev["direction"]["cotangent"])
        grows = prev["level"] < last and float(np.max(np.abs(cot))) <= cfg.threshold
        b &= (prev["branch"] == "grow") == grows
        b &= nxt["level"] == prev["level"] + (1 if grows else 0)
    transitions = sum(r["branch"] == "grow" for r in log)

    wg0, wd0 = F.initial_weights(cfg)
    prev_g, prev_d = [w.copy() for w in wg0], [w.copy() for w in wd0]
    worst = 0.0
    eta = cfg.learning_rate
    for rec in log:
        lvl = rec["level"]
        z = np.array(rec["position"]["latent"])
        x = np.array(rec["position"]["image"])
        v = np.array(rec["direction"]["cotangent"])
        f = rec["direction"]["env"]
        new_g = np.array(rec["wG"][lvl])
        new_d = np.array(rec["wD"][lvl])
        jt_g = F.fd_vjp(lambda W: W @ z, prev_g[lvl], v)
        jt_d = F.fd_vjp(lambda u: np.array([u @ x]), prev_d[lvl], np.array([f]))
        worst = max(worst, float(np.max(np.abs(jt_g - (new_g - prev_g[lvl]) / eta))))
        worst = max(worst, float(np.max(np.abs(jt_d + (new_d - prev_d[lvl]) / eta))))
        prev_g = [np.array(w) for w in rec["wG"]]
        prev_d = [np.array(w) for w in rec["wD"]]
    c = worst <= 1e-6

    wg, wd = F.replay_separately(cfg, log)
    d = [w.tolist() for w in wg] == log[-1]["wG"] and [w.tolist() for w in wd] == log[-1]["wD"]
    elapsed = time.perf_counter() - start
    ok = a and b and c and d and elapsed < 10.0
    report(9, ok, f"(a) identical runs {a}; (b) {transitions} transitions all at small cotangents {b}; "
                  f"(c) max |fd - update| {worst:.2e} <= 1e-6; (d) separate replay equal {d}; {elapsed:.2f}s < 10s")
