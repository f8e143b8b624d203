"""Executable law suites shared by the CLI and the test-suite.

Each suite takes a depth and returns the number of cases checked, raising
:class:`LawFailure` on the first counterexample.
"""
from __future__ import annotations

import functools
import itertools
import random
import time
from dataclasses import dataclass
from typing import Callable

from . import fixtures as F
from . import hom as H
from . import machine as M
from . import poly as P
from . import tree as T
from .poly import BudgetExceeded, Poly
from .tree import Tree, constant_tree

SEED = 20240601
EXHAUSTIVE_LIMIT = 200
RANDOM_CASES = 100
ENUMERATION_LIMIT = 5000


class LawFailure(AssertionError):
    pass


def ensure(cond: bool, message: str) -> None:
    if not cond:
        raise LawFailure(message)


# ---------------------------------------------------------------------------
# fixtures


def poly_fixtures() -> dict[str, Poly]:
    return {
        "0": P.ZERO,
        "1": P.ONE,
        "y": P.Y,
        "y+1": Poly.of(1, 0),
        "y^2": Poly.of(2),
        "y^2+1": Poly.of(2, 0),
    }


def tree_fixtures() -> dict[str, Tree]:
    return {
        "0": constant_tree(P.ZERO),
        "1": constant_tree(P.ONE),
        "y": constant_tree(P.Y),
        "B": constant_tree(Poly.of(1, 0)),
        "y^2+1": constant_tree(Poly.of(2, 0)),
        "login": F.login_tree(1, 1),
        "nim3": F.nim_tree(3),
    }


def small_trees() -> dict[str, Tree]:
    """Fixtures whose four-fold tensors stay small enough for coherence checks."""
    t = tree_fixtures()
    return {k: t[k] for k in ("0", "1", "y", "B", "y^2+1", "nim3")}


def random_trunc_hom(p: Tree, q: Tree, n: int, rng: random.Random) -> H.TruncMorphism | None:
    """A random depth-``n`` hom, or None when there is none.

    Each source position picks a target position uniformly among those whose
    directions can all be answered by an extendable source direction; each
    target direction then picks such a source direction uniformly.  Root maps
    are never enumerated, so large polynomials are fine.
    """
    if n == 0:
        return H.TRIVIAL
    a, b = p.root(), q.root()
    on_pos, on_dir = [], []
    for i in range(a.npos):
        options = []
        for j in range(b.npos):
            rows = []
            for e in range(b.dirs(j)):
                ds = [d for d in range(a.dirs(i)) if H.count_trunc_homs(p.child(i, d), q.child(j, e), n - 1) > 0]
                if not ds:
                    break
                rows.append(ds)
            else:
                options.append((j, rows))
        if not options:
            return None
        j, rows = rng.choice(options)
        on_pos.append(j)
        on_dir.append(tuple(rng.choice(ds) for ds in rows))
    m = P.PolyMap(a, b, tuple(on_pos), tuple(on_dir))
    kids = []
    for i, e in m.directions():
        sub = random_trunc_hom(p.child(i, m.on_dir[i][e]), q.child(m.on_pos[i], e), n - 1, rng)
        assert sub is not None
        kids.append(sub)
    return H.TruncMorphism(n, m, tuple(kids))


def sample_homs(p: Tree, q: Tree, n: int, rng: random.Random, k: int = RANDOM_CASES) -> list[H.TruncMorphism]:
    """All homs when there are few, otherwise ``k`` random ones."""
    count = H.count_trunc_homs(p, q, n)
    if count <= EXHAUSTIVE_LIMIT:
        return H.enumerate_trunc_homs(p, q, n)
    out = [random_trunc_hom(p, q, n, rng) for _ in range(k)]
    return [h for h in out if h is not None]


# ---------------------------------------------------------------------------
# polynomials


def suite_poly_counts(depth: int) -> int:
    ps = poly_fixtures().values()
    cases = 0
    for p, q in itertools.product(ps, repeat=2):
        maps = P.enumerate_maps(p, q)
        closed = 1
        for i in range(p.npos):
            closed *= sum(p.dirs(i) ** q.dirs(j) for j in range(q.npos))
        ensure(len(maps) == closed == P.map_count(p, q), f"map count {p} -> {q}")
        ensure(len(set(maps)) == len(maps), f"duplicate maps {p} -> {q}")
        for k, m in enumerate(maps):
            ensure(P.map_index(m) == k and P.map_at(p, q, k) == m, f"rank/unrank {p} -> {q} at {k}")
        ensure(P.ihom_poly(p, q).npos == len(maps), f"ihom positions {p} -> {q}")
        cases += 1
    ensure(P.map_count(Poly.of(1, 0), Poly.of(1, 0)) == 2, "|Poly(y+1, y+1)| != 2")
    ensure(P.map_count(Poly.of(2, 0), Poly.of(2, 0)) == 5, "|Poly(y^2+1, y^2+1)| != 5")
    return cases


def suite_poly_category(depth: int) -> int:
    ps = list(poly_fixtures().values())
    homs = {(a, b): P.enumerate_maps(p, q) for (a, p), (b, q) in itertools.product(enumerate(ps), repeat=2)}
    cases = 0
    for (a, b), maps in homs.items():
        for m in maps:
            ensure(P.compose_poly_maps(P.identity_poly_map(ps[a]), m) == m, f"left unit {m}")
            ensure(P.compose_poly_maps(m, P.identity_poly_map(ps[b])) == m, f"right unit {m}")
            cases += 1
    for a, b, c, d in itertools.product(range(len(ps)), repeat=4):
        for f, g, h in itertools.product(homs[a, b], homs[b, c], homs[c, d]):
            lhs = P.compose_poly_maps(P.compose_poly_maps(f, g), h)
            ensure(lhs == P.compose_poly_maps(f, P.compose_poly_maps(g, h)), f"associativity {f}, {g}, {h}")
            cases += 1
    return cases


def suite_poly_functor(depth: int) -> int:
    """Tensor preserves identities and composition, over every composable pair of pairs."""
    ps = list(poly_fixtures().values())
    tensor = functools.lru_cache(maxsize=None)(P.tensor_maps)
    chains = [
        (f, g, P.compose_poly_maps(f, g))
        for a, b, c in itertools.product(ps, repeat=3)
        for f in P.enumerate_maps(a, b)
        for g in P.enumerate_maps(b, c)
    ]
    cases = 0
    for (f, g, fg), (f2, g2, fg2) in itertools.product(chains, repeat=2):
        ensure(P.compose_poly_maps(tensor(f, f2), tensor(g, g2)) == tensor(fg, fg2), f"tensor of {f}, {f2}")
        cases += 1
    for a, a2 in itertools.product(ps, repeat=2):
        ensure(
            tensor(P.identity_poly_map(a), P.identity_poly_map(a2)) == P.identity_poly_map(P.tensor_poly(a, a2)),
            "tensor does not preserve identities",
        )
        cases += 1
    for p in ps:
        ensure(P.realize(P.code_of(p)) == p.strip(), f"realize . code_of on {p}")
        ensure(P.code_of(P.realize(P.code_of(p))) == P.code_of(p), f"code_of . realize on {p}")
        ensure(P.subst_poly(P.Y, p) == p and P.subst_poly(p, P.Y) == p, f"substitution units on {p}")
        ensure(P.tensor_poly(P.Y, p) == p, f"tensor unit on {p}")
        cases += 1
    return cases


# ---------------------------------------------------------------------------
# trees


def suite_tree_truncation(depth: int) -> int:
    trees = tree_fixtures()
    cases = 0
    top = min(depth, 4)
    for t in trees.values():
        tt = T.truncate(t, top)
        for m in range(top + 1):
            ensure(tt.restrict(m) == T.truncate(t, m), f"truncation coherence at {m}")
            cases += 1
    names = list(trees)
    for n in range(top + 1):
        rel = {(a, b): T.bisimilar(trees[a], trees[b], n) for a in names for b in names}
        for a, b, c in itertools.product(names, repeat=3):
            ensure(rel[a, a], "reflexivity")
            ensure(rel[a, b] == rel[b, a], "symmetry")
            ensure(not (rel[a, b] and rel[b, c]) or rel[a, c], "transitivity")
        cases += 1
    for a, b in itertools.product(names, repeat=2):
        exact = T.bisimilar(trees[a], trees[b])
        ensure(exact == all(T.bisimilar(trees[a], trees[b], n) for n in range(6)), f"exact vs bounded {a},{b}")
        cases += 1
    return cases


def suite_tree_constructions(depth: int) -> int:
    ps = list(poly_fixtures().values())
    cases = 0
    for p, q in itertools.product(ps, repeat=2):
        lhs = T.tensor_tree(constant_tree(p), constant_tree(q))
        ensure(T.structurally_equal(lhs, constant_tree(P.tensor_poly(p, q))), f"strictness {p}, {q}")
        ensure(T.bisimilar(T.act_prod(p, constant_tree(q)), constant_tree(P.prod_poly([p, q]))), f"action {p}, {q}")
        cases += 1
    for t in tree_fixtures().values():
        ensure(T.bisimilar(T.sum_tree(t, constant_tree(P.ZERO)), t), "0 is a unit for +")
        ensure(T.bisimilar(T.tensor_tree(constant_tree(P.Y), t), t), "y is a unit for tensor")
        ensure(T.bisimilar(T.act_prod(P.ONE, t), t), "1 is a unit for the action")
        cases += 1
    s = T.sum_tree(constant_tree(P.Y), constant_tree(P.ONE))
    ensure(T.bisimilar(s, constant_tree(Poly.of(1, 0)), 1), "sums agree at the root")
    ensure(not T.bisimilar(s, constant_tree(Poly.of(1, 0)), 2), "coproducts preserved at depth 2")
    return cases + 1


def minimax_first_player_wins(heap: int, takes: tuple[int, ...]) -> bool:
    """Plain recursive game solver: the player to move wins iff some take leaves a losing heap."""
    wins = [False] * (heap + 1)
    for h in range(1, heap + 1):
        wins[h] = any(t <= h and (t == h or not wins[h - t]) for t in takes)
    return wins[heap]


def suite_strategies(depth: int) -> int:
    cases = 0
    for takes in ((1, 2), (1, 2, 3)):
        for h in range(1, 10):
            t = F.nim_tree(h, takes)
            ensure(T.exists_map_from_y(t) == minimax_first_player_wins(h, takes), f"nim {h} {takes}")
            w = M.witness_from_y(t)
            if w is not None:
                phi = M.unfold_machine(w, min(depth, 4))
                ensure(bool(H.validate_trunc(phi, w.p, w.q)), f"witness for nim {h}")
            v = M.witness_to_y(t)
            ensure((v is not None) == T.exists_map_to_y(t), f"counter-witness for nim {h}")
            if v is not None:
                ensure(bool(H.validate_trunc(M.unfold_machine(v, min(depth, 4)), v.p, v.q)), f"to-y witness nim {h}")
            cases += 1
    return cases


# ---------------------------------------------------------------------------
# tree morphisms


def suite_hom_category(depth: int) -> int:
    trees = list(tree_fixtures().values())
    rng = random.Random(SEED)
    cases = 0
    for n in range(min(depth, 4) + 1):
        for p, q in itertools.product(trees, repeat=2):
            for phi in sample_homs(p, q, n, rng, 20):
                ensure(bool(H.validate_trunc(phi, p, q, n)), "sampled hom does not validate")
                ensure(H.compose_trunc(H.id_trunc(p, n), phi) == phi, "left unit")
                ensure(H.compose_trunc(phi, H.id_trunc(q, n)) == phi, "right unit")
                cases += 1
        B = constant_tree(Poly.of(1, 0))
        homs = H.enumerate_trunc_homs(B, B, n)
        for f, g, h in itertools.product(homs, repeat=3):
            ensure(
                H.compose_trunc(H.compose_trunc(f, g), h) == H.compose_trunc(f, H.compose_trunc(g, h)),
                "associativity on B",
            )
            cases += 1
        done = 0
        while done < RANDOM_CASES:
            a, b, c, d = (rng.choice(trees) for _ in range(4))
            f, g, h = (random_trunc_hom(x, y, n, rng) for x, y in ((a, b), (b, c), (c, d)))
            if f is None or g is None or h is None:
                continue
            fg = H.compose_trunc(f, g)
            ensure(bool(H.validate_trunc(fg, a, c, n)), "composite does not validate")
            ensure(H.compose_trunc(fg, h) == H.compose_trunc(f, H.compose_trunc(g, h)), "associativity")
            done += 1
        cases += done
    return cases


def suite_projection(depth: int) -> int:
    trees = small_trees()
    rng = random.Random(SEED + 1)
    cases = 0
    for n in range(min(depth, 3)):
        for p, q in itertools.product(trees.values(), repeat=2):
            ensure(H.id_trunc(p, n + 1).restrict(n) == H.id_trunc(p, n), "id projection")
            f, g = random_trunc_hom(p, q, n + 1, rng), random_trunc_hom(q, p, n + 1, rng)
            if f is not None and g is not None:
                ensure(H.compose_trunc(f, g).restrict(n) == H.compose_trunc(f.restrict(n), g.restrict(n)), "compose")
                ensure(
                    H.tensor_trunc(f, g).restrict(n) == H.tensor_trunc(f.restrict(n), g.restrict(n)), "tensor projection"
                )
                c = H.curry(H.tensor_trunc(f, g), p, q, T.tensor_tree(q, p))
                ensure(
                    c.restrict(n) == H.curry(H.tensor_trunc(f, g).restrict(n), p, q, T.tensor_tree(q, p)),
                    "curry projection",
                )
            f2 = random_trunc_hom(p, q, n + 1, rng)
            if f is not None and f2 is not None:
                ensure(H.copair(f, f2).restrict(n) == H.copair(f.restrict(n), f2.restrict(n)), "copair projection")
            cases += 1
    return cases


def suite_correspondence(depth: int) -> int:
    """Hom towers between constant trees count behaviour trees of the internal hom."""
    ps = [P.Y, Poly.of(1, 0), Poly.of(2, 0)]
    cases = 0
    for p, q in itertools.product(ps, repeat=2):
        h = P.ihom_poly(p, q)
        for n in range(min(depth, 3) + 1):
            ensure(
                H.count_trunc_homs(constant_tree(p), constant_tree(q), n) == P.cofree_count(h, n),
                f"count mismatch {p}, {q}, {n}",
            )
            cases += 1
    for login in (F.login_tree(1, 1), F.login_tree()):
        for n in range(min(depth, 2) + 1):
            c = H.count_trunc_homs(login, login, n)
            ensure(c == H.count_ihom_positions(login, login, n), f"login count {n}")
            cases += 1
    return cases


def suite_ihom_positions(depth: int) -> int:
    trees = small_trees()
    cases = 0
    for p, q in itertools.product(trees.values(), repeat=2):
        for n in range(min(depth, 3) + 1):
            if H.count_trunc_homs(p, q, n) > 2000:
                continue
            homs = H.enumerate_trunc_homs(p, q, n)
            positions = list(T.iter_positions(T.truncate(H.ihom_tree(p, q), n)))
            ensure([H.hom_to_position(h) for h in homs] == positions, "internal hom positions out of order")
            ensure(all(H.position_to_hom(x, p, q, n) == h for x, h in zip(positions, homs)), "position decoding")
            cases += 1
    return cases


def closure_cases(r: Tree, p: Tree, q: Tree, n: int, rng: random.Random) -> list[H.TruncMorphism]:
    """Every hom ``r ⊗ p -> q`` when at most :data:`ENUMERATION_LIMIT`, else a seeded sample."""
    rp = T.tensor_tree(r, p)
    if H.count_trunc_homs(rp, q, n) <= ENUMERATION_LIMIT:
        return H.enumerate_trunc_homs(rp, q, n)
    out = (random_trunc_hom(rp, q, n, rng) for _ in range(RANDOM_CASES))
    return [h for h in out if h is not None]


def check_closure(r: Tree, p: Tree, q: Tree, n: int, rng: random.Random) -> int:
    rp, pq = T.tensor_tree(r, p), H.ihom_tree(p, q)
    ensure(H.count_trunc_homs(rp, q, n) == H.count_homs_to_ihom(r, p, q, n), f"closure counts at {n}")
    cases = 0
    for phi in closure_cases(r, p, q, n, rng):
        psi = H.curry(phi, r, p, q)
        ensure(bool(H.validate_trunc(psi, r, pq, n)), "curry does not validate")
        ensure(H.uncurry(psi, r, p, q) == phi, "uncurry . curry")
        ensure(H.curry(H.uncurry(psi, r, p, q), r, p, q) == psi, "curry . uncurry")
        cases += 1
    return cases


def closure_triples() -> list[tuple[Tree, Tree, Tree]]:
    y, B = constant_tree(P.Y), constant_tree(Poly.of(1, 0))
    small, login = F.login_tree(1, 1), F.login_tree()
    return [(y, B, B), (B, y, B), (y, small, small), (y, login, login)]


def suite_closure(depth: int) -> int:
    rng = random.Random(SEED + 4)
    cases = 0
    for r, p, q in closure_triples():
        for n in range(min(depth, 3) + 1):
            cases += check_closure(r, p, q, n, rng)
    return cases


# ---------------------------------------------------------------------------
# monoidal coherence


def _t(*ts: Tree) -> Tree:
    return T.tensor_tree(*ts)


def suite_pentagon(depth: int) -> int:
    trees = list(small_trees().values())
    cases = 0
    for n in range(min(depth, 3) + 1):
        for p, q, r, s in itertools.product(trees, repeat=4):
            lhs = H.compose_trunc(H.assoc(_t(p, q), r, s, n), H.assoc(p, q, _t(r, s), n))
            rhs = H.compose_trunc(
                H.compose_trunc(H.tensor_trunc(H.assoc(p, q, r, n), H.id_trunc(s, n)), H.assoc(p, _t(q, r), s, n)),
                H.tensor_trunc(H.id_trunc(p, n), H.assoc(q, r, s, n)),
            )
            ensure(lhs == rhs, f"pentagon at depth {n}")
            cases += 1
    return cases


def suite_triangle(depth: int) -> int:
    trees = list(tree_fixtures().values())
    y = constant_tree(P.Y)
    cases = 0
    for n in range(min(depth, 3) + 1):
        for p, q in itertools.product(trees, repeat=2):
            lhs = H.compose_trunc(H.assoc(p, y, q, n), H.tensor_trunc(H.id_trunc(p, n), H.left_unitor(q, n)))
            ensure(lhs == H.tensor_trunc(H.right_unitor(p, n), H.id_trunc(q, n)), f"triangle at depth {n}")
            unitors = (
                (H.left_unitor(p, n), H.left_unitor_inv(p, n), _t(y, p)),
                (H.right_unitor(p, n), H.right_unitor_inv(p, n), _t(p, y)),
            )
            for u, v, src in unitors:
                ensure(H.compose_trunc(u, v) == H.id_trunc(src, n), "unitor is not split mono")
                ensure(H.compose_trunc(v, u) == H.id_trunc(p, n), "unitor is not split epi")
            cases += 1
    return cases


def suite_hexagon(depth: int) -> int:
    trees = list(small_trees().values())
    cases = 0
    for n in range(min(depth, 3) + 1):
        for p, q in itertools.product(trees, repeat=2):
            ensure(H.compose_trunc(H.braid(p, q, n), H.braid(q, p, n)) == H.id_trunc(_t(p, q), n), "symmetry")
        for p, q, r in itertools.product(trees, repeat=3):
            lhs = H.compose_trunc(
                H.compose_trunc(H.assoc(p, q, r, n), H.braid(p, _t(q, r), n)), H.assoc(q, r, p, n)
            )
            rhs = H.compose_trunc(
                H.compose_trunc(H.tensor_trunc(H.braid(p, q, n), H.id_trunc(r, n)), H.assoc(q, p, r, n)),
                H.tensor_trunc(H.id_trunc(q, n), H.braid(p, r, n)),
            )
            ensure(lhs == rhs, f"hexagon at depth {n}")
            cases += 1
    return cases


def suite_distributivity(depth: int) -> int:
    trees = list(small_trees().values())
    cases = 0
    for n in range(min(depth, 3) + 1):
        for p, q, r in itertools.product(trees, repeat=3):
            src, tgt = _t(p, T.sum_tree(q, r)), T.sum_tree(_t(p, q), _t(p, r))
            f, g = H.distrib(p, q, r, n), H.distrib_inv(p, q, r, n)
            ensure(bool(H.validate_trunc(f, src, tgt, n)), "distributor does not validate")
            ensure(bool(H.validate_trunc(g, tgt, src, n)), "inverse distributor does not validate")
            ensure(H.compose_trunc(f, g) == H.id_trunc(src, n), "distributor is not split mono")
            ensure(H.compose_trunc(g, f) == H.id_trunc(tgt, n), "distributor is not split epi")
            cases += 1
    return cases


def suite_coproducts(depth: int) -> int:
    trees = list(small_trees().values())
    rng = random.Random(SEED + 2)
    cases = 0
    for n in range(min(depth, 3) + 1):
        for p, q, r in itertools.product(trees, repeat=3):
            s = T.sum_tree(p, q)
            ensure(
                H.copair(H.injection_trunc(p, q, 0, n), H.injection_trunc(p, q, 1, n)) == H.id_trunc(s, n),
                "copair of injections",
            )
            f, g = random_trunc_hom(p, r, n, rng), random_trunc_hom(q, r, n, rng)
            if f is not None and g is not None:
                c = H.copair(f, g)
                ensure(bool(H.validate_trunc(c, s, r, n)), "copair does not validate")
                ensure(H.compose_trunc(H.injection_trunc(p, q, 0, n), c) == f, "first injection")
                ensure(H.compose_trunc(H.injection_trunc(p, q, 1, n), c) == g, "second injection")
            cases += 1
        for q in trees:
            ensure(H.count_trunc_homs(constant_tree(P.ZERO), q, n) == 1, "0 is not initial")
    return cases


def suite_constant_functor(depth: int) -> int:
    ps = list(poly_fixtures().values())
    cases = 0
    for n in range(min(depth, 3) + 1):
        for p, q, r in itertools.product(ps, repeat=3):
            for f, g in itertools.product(P.enumerate_maps(p, q), P.enumerate_maps(q, r)):
                lhs = H.constant_trunc(P.compose_poly_maps(f, g), n)
                ensure(lhs == H.compose_trunc(H.constant_trunc(f, n), H.constant_trunc(g, n)), "functoriality")
                ensure(n == 0 or H.constant_trunc(f, n).root_map == f, "faithfulness")
                cases += 1
        for p in ps:
            ensure(H.constant_trunc(P.identity_poly_map(p), n) == H.id_trunc(constant_tree(p), n), "identity")
    return cases


# ---------------------------------------------------------------------------
# machines


def check_recovery(p: Tree, q: Tree, n: int, rng: random.Random) -> int:
    if H.count_trunc_homs(p, q, n) <= ENUMERATION_LIMIT:
        homs = H.enumerate_trunc_homs(p, q, n)
    else:
        homs = [h for h in (random_trunc_hom(p, q, n, rng) for _ in range(RANDOM_CASES)) if h is not None]
    for phi in homs:
        m = M.trunc_to_s1(phi, p, q)
        ensure(bool(M.validate_machine(m, depth=n)), "tower machine invalid")
        ensure(M.s1_to_trunc(m, n) == phi, "s1_to_trunc . trunc_to_s1")
        ensure(M.trunc_to_s1(M.s1_to_trunc(m, n), p, q).morphism == phi, "trunc_to_s1 . s1_to_trunc")
    return len(homs)


def suite_machine_recovery(depth: int) -> int:
    B = constant_tree(Poly.of(1, 0))
    rng = random.Random(SEED + 5)
    cases = 0
    for p, q in ((B, B), (F.login_tree(1, 1), F.login_tree(1, 1)), (F.login_tree(), F.login_tree())):
        for n in range(min(depth, 2) + 1):
            cases += check_recovery(p, q, n, rng)
    for n in range(min(depth, 3) + 1):
        u = T.unrolled_constant(Poly.of(1, 0), n)
        seen = {M.unfold_machine(m, n) for m in M.node_machines(u, u)}
        ensure(len(seen) == H.count_trunc_homs(B, B, n), f"single-state machines at depth {n}")
        cases += 1
    return cases


def suite_machine_composition(depth: int) -> int:
    login, ro = F.login_tree(), F.readonly_tree()
    ref = F.readonly_refinement()
    machines = [(M.id_machine(ro), ro, ro), (ref, ro, login), (M.id_machine(login), login, login)]
    cases = 0
    for (m1, a, b), (m2, c, d) in itertools.product(machines, repeat=2):
        if b != c:
            continue
        comp = M.compose_machines(m1, m2)
        ensure(bool(M.validate_machine(comp)), "composite machine invalid")
        for n in range(min(depth, 3) + 1):
            lhs = M.unfold_machine(comp, n)
            ensure(lhs == H.compose_trunc(M.unfold_machine(m1, n), M.unfold_machine(m2, n)), "unfolding not functorial")
            cases += 1
    B = Poly.of(1, 0)
    h = P.ihom_poly(B, B)
    coalgs = list(P.all_coalgebras(h, 1)) + list(P.all_coalgebras(h, 2))
    rng = random.Random(SEED + 3)
    for _ in range(40):
        b1, b2, b3 = (rng.choice(coalgs) for _ in range(3))
        e1, e2, e3 = (M.embed_coalgebra(B, B, c) for c in (b1, b2, b3))
        left = M.compose_machines(M.compose_machines(e1, e2), e3)
        right = M.compose_machines(e1, M.compose_machines(e2, e3))
        for n in range(min(depth, 3) + 1):
            ensure(M.unfold_machine(left, n) == M.unfold_machine(right, n), "composition not associative")
        cases += 1
    return cases


def suite_coalgebra_embedding(depth: int) -> int:
    B = Poly.of(1, 0)
    h = P.ihom_poly(B, B)
    coalgs = list(P.all_coalgebras(h, 1)) + list(P.all_coalgebras(h, 2))
    cases = 0
    for c1, c2 in itertools.product(coalgs, repeat=2):
        e1, e2 = M.embed_coalgebra(B, B, c1), M.embed_coalgebra(B, B, c2)
        ensure(set(M.machine_maps(e1, e2)) == set(P.coalgebra_morphisms(c1, c2)), "machine maps != coalgebra maps")
        cases += 1
    for c1, c2 in itertools.product(coalgs, repeat=2):
        e1, e2 = M.embed_coalgebra(B, B, c1), M.embed_coalgebra(B, B, c2)
        ensure(M.is_time_invariant(e1), "embedded coalgebra is not time invariant")
        ensure(M.retract_to_coalgebra(e1) == c1, "retraction does not invert the embedding")
        comp = M.embed_coalgebra(B, B, M.compose_coalgebras(c1, c2, B, B, B))
        for n in range(min(depth, 3) + 1):
            ensure(
                M.unfold_machine(M.compose_machines(e1, e2), n) == M.unfold_machine(comp, n),
                "embedding does not respect composition",
            )
        cases += 1
    return cases


def suite_fixtures(depth: int) -> int:
    cases = 0
    for t in (F.login_tree(), F.readonly_tree(), F.cell_tree(), F.nim_tree(5), F.nim_with_outcomes(5)):
        ensure(isinstance(t, T.FiniteTree), "fixture is not finite")
        cases += 1
    ref = F.readonly_refinement()
    ensure(bool(M.validate_machine(ref, depth=6)), "refinement invalid")
    for ctx in M.reachable_contexts(ref, from_all_states=False):
        m = ref.action(0, ctx)
        tgt = m.target
        ensure(all(not tgt.pos_label(j).startswith("set:") for j in m.on_pos), "refinement reaches a set position")
        cases += 1
    ensure(bool(M.validate_machine(F.organ_machine(), depth=6)), "organ machine invalid")
    return cases + 1


# ---------------------------------------------------------------------------
# driver


SUITES: dict[str, Callable[[int], int]] = {
    "poly-counts": suite_poly_counts,
    "poly-category": suite_poly_category,
    "poly-functor": suite_poly_functor,
    "tree-truncation": suite_tree_truncation,
    "tree-constructions": suite_tree_constructions,
    "strategies": suite_strategies,
    "hom-category": suite_hom_category,
    "projection": suite_projection,
    "correspondence": suite_correspondence,
    "ihom-positions": suite_ihom_positions,
    "closure": suite_closure,
    "pentagon": suite_pentagon,
    "triangle": suite_triangle,
    "hexagon": suite_hexagon,
    "distributivity": suite_distributivity,
    "coproducts": suite_coproducts,
    "constant-functor": suite_constant_functor,
    "machine-recovery": suite_machine_recovery,
    "machine-composition": suite_machine_composition,
    "coalgebra-embedding": suite_coalgebra_embedding,
    "fixtures": suite_fixtures,
}


@dataclass(frozen=True)
class SuiteResult:
    name: str
    status: str
    cases: int
    seconds: float
    detail: str = ""


def run_suite(name: str, depth: int) -> SuiteResult:
    start = time.perf_counter()
    try:
        cases = SUITES[name](depth)
    except LawFailure as exc:
        return SuiteResult(name, "fail", 0, time.perf_counter() - start, str(exc))
    except BudgetExceeded as exc:
        return SuiteResult(name, "skip", 0, time.perf_counter() - start, str(exc))
    except (H.HomError, P.PolyError, T.TreeError, M.MachineError) as exc:
        # a broken construction that no longer type-checks is a failed law
        return SuiteResult(name, "fail", 0, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
    return SuiteResult(name, "pass", cases, time.perf_counter() - start)


def run_suites(depth: int, names: list[str] | None = None) -> list[SuiteResult]:
    return [run_suite(name, depth) for name in (names or list(SUITES))]
