"""Morphisms of polynomial trees, truncated to a finite depth.

A depth-``n`` morphism ``p -> q`` is a polynomial map between the root
polynomials together with, for every internal-hom direction ``(i, e)`` of
that map, a depth-``(n-1)`` morphism between the child trees reached by
``(i, d)`` in ``p`` and ``(j, e)`` in ``q`` where ``j = on_pos[i]`` and
``d = on_dir[i][e]``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from . import poly as P
from .poly import PolyError, PolyMap, check_budget
from .tree import LazyTree, Tree, constant_tree, tensor_tree


class HomError(ValueError):
    pass


@dataclass(frozen=True)
class TruncMorphism:
    depth: int
    root_map: PolyMap | None = None
    children: tuple[TruncMorphism, ...] = ()

    def child(self, i: int, e: int) -> TruncMorphism:
        assert self.root_map is not None
        return self.children[self.root_map.dir_index(i, e)]

    def restrict(self, m: int) -> TruncMorphism:
        if m > self.depth:
            raise HomError(f"cannot restrict depth {self.depth} to {m}")
        if m == 0:
            return TRIVIAL
        return TruncMorphism(m, self.root_map, tuple(c.restrict(m - 1) for c in self.children))

    def then(self, other: TruncMorphism) -> TruncMorphism:
        return compose_trunc(self, other)

    def __repr__(self) -> str:
        if self.depth == 0:
            return "TruncMorphism(0)"
        assert self.root_map is not None
        return f"TruncMorphism({self.depth}, onPos={self.root_map.on_pos}, onDir={self.root_map.on_dir})"


TRIVIAL = TruncMorphism(0)


class Check(NamedTuple):
    """Outcome of a validation; falsy on failure, with the offending path."""

    ok: bool
    path: tuple = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# validation, enumeration, counting


def validate_trunc(phi: TruncMorphism, p: Tree, q: Tree, n: int | None = None) -> Check:
    n = phi.depth if n is None else n
    return _validate(phi, p, q, n, ())


def _validate(phi: TruncMorphism, p: Tree, q: Tree, n: int, path: tuple) -> Check:
    if phi.depth != n:
        return Check(False, path, f"depth {phi.depth}, expected {n}")
    if n == 0:
        return Check(True)
    m = phi.root_map
    if m is None:
        return Check(False, path, "missing root map")
    if m.source != p.root() or m.target != q.root():
        return Check(False, path, f"root map {m.source} -> {m.target} does not match {p.root()} -> {q.root()}")
    dirs = m.directions()
    if len(phi.children) != len(dirs):
        return Check(False, path, f"{len(phi.children)} children for {len(dirs)} directions")
    for (i, e), sub in zip(dirs, phi.children):
        j, d = m.on_pos[i], m.on_dir[i][e]
        res = _validate(sub, p.child(i, d), q.child(j, e), n - 1, path + ((i, e),))
        if not res:
            return res
    return Check(True)


def count_trunc_homs(p: Tree, q: Tree, n: int) -> int:
    """``|PolyTr<n>(p, q)|`` straight from the product-sum recurrence."""
    memo: dict = {}

    def go(a: Tree, b: Tree, k: int) -> int:
        if k == 0:
            return 1
        key = (a, b, k)
        if key in memo:
            return memo[key]
        pa, pb = a.root(), b.root()
        total = 1
        for i in range(pa.npos):
            s = 0
            for j in range(pb.npos):
                prod = 1
                for e in range(pb.dirs(j)):
                    prod *= sum(go(a.child(i, d), b.child(j, e), k - 1) for d in range(pa.dirs(i)))
                    if prod == 0:
                        break
                s += prod
            total *= s
            if total == 0:
                break
        memo[key] = total
        return total

    return go(p, q, n)


def enumerate_trunc_homs(p: Tree, q: Tree, n: int, budget: int | None = None) -> list[TruncMorphism]:
    """All depth-``n`` morphisms, ordered by root map index then children by ``(i, e)``."""
    check_budget(f"depth-{n} homs", count_trunc_homs(p, q, n), budget)
    return list(iter_trunc_homs(p, q, n))


def iter_trunc_homs(p: Tree, q: Tree, n: int) -> Iterator[TruncMorphism]:
    if n == 0:
        yield TRIVIAL
        return
    memo: dict = {}

    def homs(a: Tree, b: Tree, k: int) -> list[TruncMorphism]:
        if k == 0:
            return [TRIVIAL]
        key = (a, b, k)
        if key not in memo:
            out = []
            for m in P._iter_maps(a.root(), b.root()):
                subs = [
                    homs(a.child(i, m.on_dir[i][e]), b.child(m.on_pos[i], e), k - 1) for i, e in m.directions()
                ]
                for combo in itertools.product(*subs):
                    out.append(TruncMorphism(k, m, combo))
            memo[key] = out
        return memo[key]

    yield from homs(p, q, n)


# ---------------------------------------------------------------------------
# category structure


def id_trunc(t: Tree, n: int) -> TruncMorphism:
    if n == 0:
        return TRIVIAL
    p = t.root()
    return TruncMorphism(n, P.identity_poly_map(p), tuple(id_trunc(t.child(i, d), n - 1) for i, d in p.pairs()))


def compose_trunc(phi: TruncMorphism, psi: TruncMorphism) -> TruncMorphism:
    """Diagrammatic composite ``phi ; psi``."""
    if phi.depth != psi.depth:
        raise HomError(f"depth mismatch {phi.depth} vs {psi.depth}")
    if phi.depth == 0:
        return TRIVIAL
    m1, m2 = phi.root_map, psi.root_map
    assert m1 is not None and m2 is not None
    try:
        root = P.compose_poly_maps(m1, m2)
    except PolyError as exc:
        raise HomError(str(exc)) from None
    children = []
    for i, f in root.directions():
        j = m1.on_pos[i]
        e = m2.on_dir[j][f]
        children.append(compose_trunc(phi.child(i, e), psi.child(j, f)))
    return TruncMorphism(phi.depth, root, tuple(children))


def injection_trunc(p: Tree, q: Tree, k: int, n: int) -> TruncMorphism:
    """Coproduct inclusion of summand ``k`` (0 or 1) into ``p + q``."""
    if n == 0:
        return TRIVIAL
    summand = (p, q)[k]
    root = P.injection([p.root(), q.root()], k)
    kids = tuple(id_trunc(summand.child(i, d), n - 1) for i, d in summand.root().pairs())
    return TruncMorphism(n, root, kids)


def copair(phi: TruncMorphism, psi: TruncMorphism) -> TruncMorphism:
    if phi.depth != psi.depth:
        raise HomError(f"depth mismatch {phi.depth} vs {psi.depth}")
    if phi.depth == 0:
        return TRIVIAL
    assert phi.root_map is not None and psi.root_map is not None
    try:
        root = P.copair_maps(phi.root_map, psi.root_map)
    except PolyError as exc:
        raise HomError(str(exc)) from None
    return TruncMorphism(phi.depth, root, phi.children + psi.children)


def constant_trunc(phi: PolyMap, n: int) -> TruncMorphism:
    """The map ``phi`` applied at every depth, between constant trees."""
    if n == 0:
        return TRIVIAL
    sub = constant_trunc(phi, n - 1)
    return TruncMorphism(n, phi, (sub,) * len(phi.directions()))


# ---------------------------------------------------------------------------
# monoidal structure


def tensor_trunc(phi: TruncMorphism, psi: TruncMorphism) -> TruncMorphism:
    if phi.depth != psi.depth:
        raise HomError(f"depth mismatch {phi.depth} vs {psi.depth}")
    if phi.depth == 0:
        return TRIVIAL
    m1, m2 = phi.root_map, psi.root_map
    assert m1 is not None and m2 is not None
    root = P.tensor_maps(m1, m2)
    children = []
    for i in range(m1.source.npos):
        for i2 in range(m2.source.npos):
            j, j2 = m1.on_pos[i], m2.on_pos[i2]
            for e in range(m1.target.dirs(j)):
                for e2 in range(m2.target.dirs(j2)):
                    children.append(tensor_trunc(phi.child(i, e), psi.child(i2, e2)))
    return TruncMorphism(phi.depth, root, tuple(children))


def _structural(n: int, root: PolyMap, child) -> TruncMorphism:
    """Build a morphism whose child at ``(i, e)`` is ``child(i, d, j, e)``."""
    if n == 0:
        return TRIVIAL
    kids = tuple(child(i, root.on_dir[i][e], root.on_pos[i], e) for i, e in root.directions())
    return TruncMorphism(n, root, kids)


def braid(p: Tree, q: Tree, n: int) -> TruncMorphism:
    """``p ⊗ q -> q ⊗ p``."""
    if n == 0:
        return TRIVIAL
    a, b = p.root(), q.root()
    root = P.braid_map(a, b)

    def child(idx, dd, _j, _e):
        i, j = divmod(idx, b.npos)
        d, e = divmod(dd, b.dirs(j))
        return braid(p.child(i, d), q.child(j, e), n - 1)

    return _structural(n, root, child)


def assoc(p: Tree, q: Tree, r: Tree, n: int) -> TruncMorphism:
    """``(p ⊗ q) ⊗ r -> p ⊗ (q ⊗ r)``."""
    if n == 0:
        return TRIVIAL
    a, b, c = p.root(), q.root(), r.root()
    root = P.assoc_map(a, b, c)

    def child(idx, dd, _j, _e):
        ij, k = divmod(idx, c.npos)
        i, j = divmod(ij, b.npos)
        de, f = divmod(dd, c.dirs(k))
        d, e = divmod(de, b.dirs(j))
        return assoc(p.child(i, d), q.child(j, e), r.child(k, f), n - 1)

    return _structural(n, root, child)


def assoc_inv(p: Tree, q: Tree, r: Tree, n: int) -> TruncMorphism:
    """``p ⊗ (q ⊗ r) -> (p ⊗ q) ⊗ r``."""
    if n == 0:
        return TRIVIAL
    a, b, c = p.root(), q.root(), r.root()
    root = P.invert(P.assoc_map(a, b, c))

    def child(idx, dd, _j, _e):
        i, jk = divmod(idx, b.npos * c.npos)
        j, k = divmod(jk, c.npos)
        d, ef = divmod(dd, b.dirs(j) * c.dirs(k))
        e, f = divmod(ef, c.dirs(k))
        return assoc_inv(p.child(i, d), q.child(j, e), r.child(k, f), n - 1)

    return _structural(n, root, child)


def left_unitor(p: Tree, n: int) -> TruncMorphism:
    """``ȳ ⊗ p -> p``."""
    if n == 0:
        return TRIVIAL
    root = P.left_unitor_map(p.root())
    return _structural(n, root, lambda i, d, _j, _e: left_unitor(p.child(i, d), n - 1))


def left_unitor_inv(p: Tree, n: int) -> TruncMorphism:
    if n == 0:
        return TRIVIAL
    root = P.invert(P.left_unitor_map(p.root()))
    return _structural(n, root, lambda i, d, _j, _e: left_unitor_inv(p.child(i, d), n - 1))


def right_unitor(p: Tree, n: int) -> TruncMorphism:
    """``p ⊗ ȳ -> p``."""
    if n == 0:
        return TRIVIAL
    root = P.right_unitor_map(p.root())
    return _structural(n, root, lambda i, d, _j, _e: right_unitor(p.child(i, d), n - 1))


def right_unitor_inv(p: Tree, n: int) -> TruncMorphism:
    if n == 0:
        return TRIVIAL
    root = P.invert(P.right_unitor_map(p.root()))
    return _structural(n, root, lambda i, d, _j, _e: right_unitor_inv(p.child(i, d), n - 1))


def distrib(p: Tree, q: Tree, r: Tree, n: int) -> TruncMorphism:
    """``p ⊗ (q + r) -> (p ⊗ q) + (p ⊗ r)``; every child is an identity."""
    if n == 0:
        return TRIVIAL
    a, b, c = p.root(), q.root(), r.root()
    root = P.distrib_map(a, b, c)
    nbc = b.npos + c.npos

    def child(idx, dd, _j, _e):
        i, jj = divmod(idx, nbc)
        width = b.dirs(jj) if jj < b.npos else c.dirs(jj - b.npos)
        d, e = divmod(dd, width)
        right = q.child(jj, e) if jj < b.npos else r.child(jj - b.npos, e)
        return id_trunc(tensor_tree(p.child(i, d), right), n - 1)

    return _structural(n, root, child)


def distrib_inv(p: Tree, q: Tree, r: Tree, n: int) -> TruncMorphism:
    if n == 0:
        return TRIVIAL
    a, b, c = p.root(), q.root(), r.root()
    root = P.invert(P.distrib_map(a, b, c))
    split = a.npos * b.npos

    def child(idx, dd, _j, _e):
        if idx < split:
            i, j = divmod(idx, b.npos)
            d, e = divmod(dd, b.dirs(j))
            right = q.child(j, e)
        else:
            i, k = divmod(idx - split, c.npos)
            d, e = divmod(dd, c.dirs(k))
            right = r.child(k, e)
        return id_trunc(tensor_tree(p.child(i, d), right), n - 1)

    return _structural(n, root, child)


# ---------------------------------------------------------------------------
# internal hom and closure


def ihom_tree(p: Tree, q: Tree) -> LazyTree:
    """``[p, q]``: root ``[p.root, q.root]``; the child at ``(phi, (i, e))`` is
    ``[p.rest(i, phi#_i(e)), q.rest(phi_1(i), e)]``."""
    return LazyTree((p, q), _ihom_step)


def _ihom_step(seed):
    p, q = seed
    a, b = p.root(), q.root()
    h = P.ihom_indexed(a, b)

    def nxt(k, idx):
        m = P.map_at(a, b, k)
        i, e = m.directions()[idx]
        return p.child(i, m.on_dir[i][e]), q.child(m.on_pos[i], e)

    return h, nxt


def hom_to_position(phi: TruncMorphism) -> tuple:
    """The position of the truncated internal hom tree naming ``phi``."""
    if phi.depth == 0:
        return ()
    assert phi.root_map is not None
    return (P.map_index(phi.root_map), tuple(hom_to_position(c) for c in phi.children))


def position_to_hom(pos: tuple, p: Tree, q: Tree, n: int) -> TruncMorphism:
    if n == 0:
        return TRIVIAL
    k, subs = pos
    m = P.map_at(p.root(), q.root(), k)
    kids = tuple(
        position_to_hom(s, p.child(i, m.on_dir[i][e]), q.child(m.on_pos[i], e), n - 1)
        for (i, e), s in zip(m.directions(), subs)
    )
    return TruncMorphism(n, m, kids)


def curry(phi: TruncMorphism, r: Tree, p: Tree, q: Tree) -> TruncMorphism:
    """``r ⊗ p -> q`` into ``r -> [p, q]``, by swapping the two inner sums."""
    n = phi.depth
    if n == 0:
        return TRIVIAL
    m = phi.root_map
    assert m is not None
    c, a, b = r.root(), p.root(), q.root()
    h = P.ihom_indexed(a, b)
    on_pos, on_dir, kids = [], [], []
    for k in range(c.npos):
        pos_k = tuple(m.on_pos[k * a.npos + i] for i in range(a.npos))
        dir_k, back_k, sub_k = [], [], []
        for i in range(a.npos):
            j = pos_k[i]
            row_d = []
            for e in range(b.dirs(j)):
                f, d = divmod(m.on_dir[k * a.npos + i][e], a.dirs(i))
                row_d.append(d)
                back_k.append(f)
                sub_k.append(
                    curry(phi.child(k * a.npos + i, e), r.child(k, f), p.child(i, d), q.child(j, e))
                )
            dir_k.append(tuple(row_d))
        chi = PolyMap(a, b, pos_k, tuple(dir_k))
        on_pos.append(P.map_index(chi))
        on_dir.append(tuple(back_k))
        kids.extend(sub_k)
    return TruncMorphism(n, PolyMap(c, h, tuple(on_pos), tuple(on_dir)), tuple(kids))


def uncurry(psi: TruncMorphism, r: Tree, p: Tree, q: Tree) -> TruncMorphism:
    """Inverse of :func:`curry`."""
    n = psi.depth
    if n == 0:
        return TRIVIAL
    m = psi.root_map
    assert m is not None
    c, a, b = r.root(), p.root(), q.root()
    src = P.tensor_poly(c, a)
    on_pos, on_dir, kids = [], [], []
    for k in range(c.npos):
        chi = P.map_at(a, b, m.on_pos[k])
        for i in range(a.npos):
            j = chi.on_pos[i]
            on_pos.append(j)
            row = []
            for e in range(b.dirs(j)):
                idx = chi.dir_index(i, e)
                f, d = m.on_dir[k][idx], chi.on_dir[i][e]
                row.append(f * a.dirs(i) + d)
                kids.append(uncurry(psi.child(k, idx), r.child(k, f), p.child(i, d), q.child(j, e)))
            on_dir.append(tuple(row))
    return TruncMorphism(n, PolyMap(src, b, tuple(on_pos), tuple(on_dir)), tuple(kids))


def count_ihom_positions(p: Tree, q: Tree, n: int, budget: int | None = None) -> int:
    """Positions of ``truncate(ihom_tree(p, q), n)`` without building deep internal homs.

    Sums over enumerated root maps; the last level uses the closed-form map
    count, so the internal-hom polynomial itself is never materialised.
    """
    memo: dict = {}

    def go(a: Tree, b: Tree, k: int) -> int:
        if k == 0:
            return 1
        if k == 1:
            return P.map_count(a.root(), b.root())
        key = (a, b, k)
        if key not in memo:
            total = 0
            for m in P.enumerate_maps(a.root(), b.root(), budget):
                prod = 1
                for i, e in m.directions():
                    prod *= go(a.child(i, m.on_dir[i][e]), b.child(m.on_pos[i], e), k - 1)
                    if not prod:
                        break
                total += prod
            memo[key] = total
        return memo[key]

    return go(p, q, n)


def count_homs_to_ihom(r: Tree, p: Tree, q: Tree, n: int) -> int:
    """``|PolyTr<n>(r, [p, q])|`` by recursing on triples ``(r, p, q)``.

    A map into the internal hom picks, per position of ``r``, a map
    ``p.root -> q.root`` and answers each of its directions with a direction
    of ``r``; the sum over maps factors position by position.
    """
    memo: dict = {}

    def go(c: Tree, a: Tree, b: Tree, k: int) -> int:
        if k == 0:
            return 1
        key = (c, a, b, k)
        if key not in memo:
            rc, ra, rb = c.root(), a.root(), b.root()
            total = 1
            for kk in range(rc.npos):
                for i in range(ra.npos):
                    s = 0
                    for j in range(rb.npos):
                        prod = 1
                        for e in range(rb.dirs(j)):
                            prod *= sum(
                                go(c.child(kk, f), a.child(i, d), b.child(j, e), k - 1)
                                for d in range(ra.dirs(i))
                                for f in range(rc.dirs(kk))
                            )
                            if not prod:
                                break
                        s += prod
                    total *= s
                    if not total:
                        break
            memo[key] = total
        return memo[key]

    return go(r, p, q, n)


def hom_count_table(p: Tree, q: Tree, depth: int) -> list[int]:
    return [count_trunc_homs(p, q, n) for n in range(depth + 1)]


def is_iso_trunc(phi: TruncMorphism, inverse: TruncMorphism, p: Tree, q: Tree) -> bool:
    n = phi.depth
    return compose_trunc(phi, inverse) == id_trunc(p, n) and compose_trunc(inverse, phi) == id_trunc(q, n)


def ybar() -> Tree:
    return constant_tree(P.Y)


def zero_tree() -> Tree:
    return constant_tree(P.ZERO)

