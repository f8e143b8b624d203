"""Polynomial trees: interfaces that change after every round of interaction.

Two presentations are supported.  :class:`FiniteTree` is a node of a finite
coalgebra (a :class:`Graph`); every decision procedure works on these.
:class:`LazyTree` unfolds on demand from a seed and covers trees that are
only generated programmatically, such as internal homs.
"""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterator, Sequence

from .poly import (
    Y,
    Poly,
    check_budget,
    prod_poly,
    sum_poly,
    tensor_poly,
)


class TreeError(ValueError):
    pass


class Tree(ABC):
    is_finite = False

    @abstractmethod
    def root(self) -> Poly: ...

    @abstractmethod
    def child(self, i: int, d: int) -> Tree: ...

    def _check_dir(self, i: int, d: int) -> None:
        p = self.root()
        if not (0 <= i < p.npos and 0 <= d < p.dirs(i)):
            raise TreeError(f"direction (i={i}, d={d}) out of range for root {p}")


def tree_root(t: Tree) -> Poly:
    return t.root()


def tree_child(t: Tree, i: int, d: int) -> Tree:
    return t.child(i, d)


# ---------------------------------------------------------------------------
# finite presentation


@dataclass(frozen=True, eq=False)
class Graph:
    """A finite ``(u◁u)``-coalgebra: a polynomial per node and a total transition.

    ``succ[v][i][d]`` is the node reached from ``v`` after position ``i`` and
    direction ``d``.  ``keys`` is optional provenance metadata (ignored by
    equality).
    """

    polys: tuple[Poly, ...]
    succ: tuple[tuple[tuple[int, ...], ...], ...]
    keys: tuple[Any, ...] | None = field(default=None)

    def __post_init__(self):
        n = len(self.polys)
        if len(self.succ) != n:
            raise TreeError(f"{len(self.succ)} transition rows for {n} nodes")
        for v, (p, row) in enumerate(zip(self.polys, self.succ)):
            if len(row) != p.npos:
                raise TreeError(f"next not total at node {v}: {len(row)} rows for {p.npos} positions")
            for i, targets in enumerate(row):
                if len(targets) != p.dirs(i):
                    d = min(len(targets), p.dirs(i))
                    raise TreeError(f"next not total at node {v}, (i={i},d={d})")
                for d, w in enumerate(targets):
                    if not 0 <= w < n:
                        raise TreeError(f"next at node {v}, (i={i},d={d}) targets missing node {w}")

    def __len__(self) -> int:
        return len(self.polys)

    @cached_property
    def _hash(self) -> int:
        return hash((self.polys, self.succ))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Graph):
            return NotImplemented
        return self._hash == other._hash and self.polys == other.polys and self.succ == other.succ


@dataclass(frozen=True)
class FiniteTree(Tree):
    graph: Graph
    node: int = 0
    is_finite = True

    def __post_init__(self):
        if not 0 <= self.node < len(self.graph):
            raise TreeError(f"node {self.node} not in graph of {len(self.graph)} nodes")

    def root(self) -> Poly:
        return self.graph.polys[self.node]

    def child(self, i: int, d: int) -> FiniteTree:
        self._check_dir(i, d)
        return FiniteTree(self.graph, self.graph.succ[self.node][i][d])

    def at(self, v: int) -> FiniteTree:
        return FiniteTree(self.graph, v)

    @property
    def key(self) -> Any:
        return None if self.graph.keys is None else self.graph.keys[self.node]

    def reachable(self) -> list[int]:
        seen = {self.node}
        order = [self.node]
        queue = deque(order)
        while queue:
            v = queue.popleft()
            for row in self.graph.succ[v]:
                for w in row:
                    if w not in seen:
                        seen.add(w)
                        order.append(w)
                        queue.append(w)
        return order

    def canonical(self) -> FiniteTree:
        """Prune to reachable nodes and re-index breadth-first from the root."""
        g = self.graph
        return explore(self.node, lambda v: (g.polys[v], g.succ[v]), key=lambda v: g.keys[v] if g.keys else v)

    def __repr__(self) -> str:
        return f"FiniteTree(node={self.node}, nodes={len(self.graph)}, root={self.root()})"


def finite_tree(
    polys: Sequence[Poly],
    succ: Sequence[Sequence[Sequence[int]]],
    root: int = 0,
    keys: Sequence[Any] | None = None,
) -> FiniteTree:
    graph = Graph(
        tuple(polys),
        tuple(tuple(tuple(targets) for targets in row) for row in succ),
        None if keys is None else tuple(keys),
    )
    return FiniteTree(graph, root)


def explore(
    start: Hashable,
    expand: Callable[[Any], tuple[Poly, Sequence[Sequence[Hashable]]]],
    key: Callable[[Any], Any] | None = None,
    max_nodes: int | None = None,
) -> FiniteTree:
    """Breadth-first closure of ``expand`` from ``start`` into a finite tree.

    ``expand(s)`` returns the polynomial at ``s`` and, per position and
    direction, the successor state.  Nodes are numbered in discovery order.
    """
    index = {start: 0}
    states = [start]
    polys: list[Poly] = []
    succ: list[tuple[tuple[int, ...], ...]] = []
    k = 0
    while k < len(states):
        poly, rows = expand(states[k])
        out_rows = []
        for row in rows:
            out = []
            for s in row:
                if s not in index:
                    index[s] = len(states)
                    states.append(s)
                    check_budget("tree nodes", len(states), max_nodes)
                out.append(index[s])
            out_rows.append(tuple(out))
        polys.append(poly)
        succ.append(tuple(out_rows))
        k += 1
    keys = tuple(key(s) if key else s for s in states)
    return FiniteTree(Graph(tuple(polys), tuple(succ), keys), 0)


def to_finite(t: Tree, max_nodes: int | None = None) -> FiniteTree:
    """Materialise a tree with finitely many distinct subtrees (seeds must be hashable)."""
    if isinstance(t, FiniteTree):
        return t.canonical()
    return explore(
        t,
        lambda s: (s.root(), [[s.child(i, d) for d in range(n)] for i, n in enumerate(s.root().shape)]),
        key=lambda s: getattr(s, "seed", None),
        max_nodes=max_nodes,
    )


def structurally_equal(t1: FiniteTree, t2: FiniteTree) -> bool:
    a, b = t1.canonical(), t2.canonical()
    return a.graph == b.graph


# ---------------------------------------------------------------------------
# lazy presentation


@dataclass(frozen=True)
class LazyTree(Tree):
    """``step(seed)`` gives the root polynomial and a function ``(i, d) -> seed``."""

    seed: Hashable
    step: Callable[[Any], tuple[Poly, Callable[[int, int], Any]]] = field(compare=True)

    @cached_property
    def _expanded(self) -> tuple[Poly, Callable[[int, int], Any]]:
        return self.step(self.seed)

    def root(self) -> Poly:
        return self._expanded[0]

    def child(self, i: int, d: int) -> LazyTree:
        self._check_dir(i, d)
        return LazyTree(self._expanded[1](i, d), self.step)


def lazy_tree(seed: Hashable, step: Callable[[Any], tuple[Poly, Callable[[int, int], Any]]]) -> LazyTree:
    return LazyTree(seed, step)


def _delegate(t: Tree) -> tuple[Poly, Callable[[int, int], Any]]:
    return t.root(), lambda i, d: ("tree", t.child(i, d))


# ---------------------------------------------------------------------------
# constructors


def constant_tree(p: Poly) -> FiniteTree:
    return finite_tree([p], [[[0] * n for n in p.shape]])


def sum_tree(t1: Tree, t2: Tree) -> Tree:
    """Coproduct: root is the sum of roots; children are inherited unchanged."""
    if isinstance(t1, FiniteTree) and isinstance(t2, FiniteTree):
        g1, g2 = t1.graph, t2.graph

        def expand(s):
            if s == ("+",):
                p1, p2 = g1.polys[t1.node], g2.polys[t2.node]
                rows = [[("L", w) for w in row] for row in g1.succ[t1.node]]
                rows += [[("R", w) for w in row] for row in g2.succ[t2.node]]
                return sum_poly([p1, p2]), rows
            side, v = s
            g = g1 if side == "L" else g2
            return g.polys[v], [[(side, w) for w in row] for row in g.succ[v]]

        return explore(("+",), expand)

    def step(seed):
        if seed[0] == "tree":
            return _delegate(seed[1])
        _, a, b = seed
        n1 = a.root().npos

        def nxt(i, d):
            return ("tree", a.child(i, d) if i < n1 else b.child(i - n1, d))

        return sum_poly([a.root(), b.root()]), nxt

    return LazyTree(("+", t1, t2), step)


def tensor_tree(*trees: Tree) -> Tree:
    """Dirichlet product, left-nested for more than two factors."""
    if not trees:
        return constant_tree(Y)
    out = trees[0]
    for t in trees[1:]:
        out = _tensor2(out, t)
    return out


def _tensor2(t1: Tree, t2: Tree) -> Tree:
    if isinstance(t1, FiniteTree) and isinstance(t2, FiniteTree):
        g1, g2 = t1.graph, t2.graph

        def expand(s):
            v1, v2 = s
            p1, p2 = g1.polys[v1], g2.polys[v2]
            poly = tensor_poly(p1, p2)
            rows = []
            for i in range(p1.npos):
                for j in range(p2.npos):
                    rows.append(
                        [(g1.succ[v1][i][d], g2.succ[v2][j][e]) for d in range(p1.dirs(i)) for e in range(p2.dirs(j))]
                    )
            return poly, rows

        def key(s):
            v1, v2 = s
            return (g1.keys[v1] if g1.keys else v1, g2.keys[v2] if g2.keys else v2)

        return explore((t1.node, t2.node), expand, key=key)

    def step(seed):
        a, b = seed
        p1, p2 = a.root(), b.root()

        def nxt(idx, dd):
            i, j = divmod(idx, p2.npos)
            d, e = divmod(dd, p2.dirs(j))
            return a.child(i, d), b.child(j, e)

        return tensor_poly(p1, p2), nxt

    return LazyTree((t1, t2), step)


def act_prod(p: Poly, t: Tree) -> Tree:
    """``p × t`` for a static polynomial ``p``: p-directions loop back, t-directions advance t."""
    if isinstance(t, FiniteTree):
        g = t.graph

        def expand(v):
            q = g.polys[v]
            rows = []
            for a in range(p.npos):
                for j in range(q.npos):
                    rows.append([v] * p.dirs(a) + list(g.succ[v][j]))
            return prod_poly([p, q]), rows

        return explore(t.node, expand, key=lambda v: g.keys[v] if g.keys else v)

    return LazyTree(t, lambda s: _act_step(p, s))


def _act_step(p: Poly, s: Tree):
    q = s.root()

    def nxt(idx, d):
        a, j = divmod(idx, q.npos)
        return s if d < p.dirs(a) else s.child(j, d - p.dirs(a))

    return prod_poly([p, q]), nxt


def unrolled_constant(p: Poly, depth: int) -> FiniteTree:
    """A presentation of the constant tree on ``p`` with a fresh node per level up to ``depth``.

    Bisimilar to ``constant_tree(p)`` but lets node-indexed data vary with depth.
    """
    n = depth + 1
    polys = [p] * n
    succ = [[[min(v + 1, depth)] * k for k in p.shape] for v in range(n)]
    return finite_tree(polys, succ, 0, keys=list(range(n)))


# ---------------------------------------------------------------------------
# truncation


@dataclass(frozen=True)
class TruncTree:
    """Depth-``n`` unfolding.  At depth 0 there is no code and no children."""

    depth: int
    code: Poly | None
    children: tuple[TruncTree, ...] = ()

    def child(self, i: int, d: int) -> TruncTree:
        assert self.code is not None
        return self.children[sum(self.code.shape[:i]) + d]

    def restrict(self, m: int) -> TruncTree:
        if m > self.depth:
            raise TreeError(f"cannot restrict depth {self.depth} to {m}")
        if m == 0:
            return TruncTree(0, None)
        return TruncTree(m, self.code, tuple(c.restrict(m - 1) for c in self.children))


def truncation_size(t: Tree, n: int) -> int:
    memo: dict = {}

    def size(s: Tree, k: int) -> int:
        if k == 0:
            return 1
        key = (s, k)
        if key not in memo:
            p = s.root()
            memo[key] = 1 + sum(size(s.child(i, d), k - 1) for i, d in p.pairs())
        return memo[key]

    return size(t, n)


def truncate(t: Tree, n: int, budget: int | None = None) -> TruncTree:
    check_budget("truncation nodes", truncation_size(t, n), budget)
    memo: dict = {}

    def go(s: Tree, k: int) -> TruncTree:
        if k == 0:
            return TruncTree(0, None)
        key = (s, k)
        if key not in memo:
            p = s.root()
            memo[key] = TruncTree(k, p, tuple(go(s.child(i, d), k - 1) for i, d in p.pairs()))
        return memo[key]

    return go(t, n)


def count_positions(tt: TruncTree) -> int:
    """Positions of a truncated tree: a root position plus a position tree for each direction."""
    if tt.depth == 0:
        return 1
    total = 0
    assert tt.code is not None
    for i in range(tt.code.npos):
        base = sum(tt.code.shape[:i])
        prod = 1
        for d in range(tt.code.dirs(i)):
            prod *= count_positions(tt.children[base + d])
        total += prod
    return total


def iter_positions(tt: TruncTree) -> Iterator[tuple]:
    """Positions of ``tt`` as nested ``(i, (child positions...))`` in canonical order."""
    if tt.depth == 0:
        yield ()
        return
    assert tt.code is not None
    for i in range(tt.code.npos):
        base = sum(tt.code.shape[:i])
        subs = [list(iter_positions(tt.children[base + d])) for d in range(tt.code.dirs(i))]
        for combo in itertools.product(*subs):
            yield (i, combo)


# ---------------------------------------------------------------------------
# equality


def bisimilar(t1: Tree, t2: Tree, n: int | None = None) -> bool:
    """Depth-bounded comparison, or exact bisimulation when ``n`` is None."""
    if n is None:
        if not (isinstance(t1, FiniteTree) and isinstance(t2, FiniteTree)):
            raise TreeError("unbounded bisimulation needs finite trees")
        return _bisimilar_exact(t1, t2)
    memo: dict = {}

    def go(a: Tree, b: Tree, k: int) -> bool:
        if k == 0:
            return True
        key = (a, b, k)
        if key not in memo:
            pa, pb = a.root(), b.root()
            memo[key] = pa == pb and all(go(a.child(i, d), b.child(i, d), k - 1) for i, d in pa.pairs())
        return memo[key]

    return go(t1, t2, n)


def _bisimilar_exact(t1: FiniteTree, t2: FiniteTree) -> bool:
    graphs = (t1.graph, t2.graph)
    nodes = [(0, v) for v in t1.reachable()] + [(1, v) for v in t2.reachable()]
    cls = {x: graphs[x[0]].polys[x[1]].shape for x in nodes}
    count = len(set(cls.values()))
    while True:
        sig = {
            x: (cls[x], tuple(cls[(x[0], w)] for row in graphs[x[0]].succ[x[1]] for w in row)) for x in nodes
        }
        ids = {s: k for k, s in enumerate(sorted(set(sig.values()), key=repr))}
        cls = {x: ids[sig[x]] for x in nodes}
        if len(ids) == count:
            break
        count = len(ids)
    return cls[(0, t1.node)] == cls[(1, t2.node)]


# ---------------------------------------------------------------------------
# strategies: maps from and to the constant tree on y


def strategy_from_y(t: FiniteTree) -> dict[int, int] | None:
    """Winning region of ``ȳ -> t`` with a chosen position per node, or None.

    Greatest fixpoint of: some position whose directions all stay in the region.
    """
    g = t.graph
    region = set(t.reachable())
    while True:
        keep = {v for v in region if _choose_from(g, v, region) is not None}
        if keep == region:
            break
        region = keep
    if t.node not in region:
        return None
    return {v: _choose_from(g, v, region) for v in region}


def _choose_from(g: Graph, v: int, region: set[int]) -> int | None:
    for i, row in enumerate(g.succ[v]):
        if all(w in region for w in row):
            return i
    return None


def strategy_to_y(t: FiniteTree) -> dict[int, tuple[int, ...]] | None:
    """Winning region of ``t -> ȳ``: per node, a direction answering each position."""
    g = t.graph
    region = set(t.reachable())
    while True:
        keep = {v for v in region if _answer_all(g, v, region) is not None}
        if keep == region:
            break
        region = keep
    if t.node not in region:
        return None
    return {v: _answer_all(g, v, region) for v in region}


def _answer_all(g: Graph, v: int, region: set[int]) -> tuple[int, ...] | None:
    out = []
    for row in g.succ[v]:
        d = next((d for d, w in enumerate(row) if w in region), None)
        if d is None:
            return None
        out.append(d)
    return tuple(out)


def exists_map_from_y(t: Tree) -> bool:
    if not isinstance(t, FiniteTree):
        raise TreeError("strategy existence needs a finite tree")
    return strategy_from_y(t) is not None


def exists_map_to_y(t: Tree) -> bool:
    if not isinstance(t, FiniteTree):
        raise TreeError("strategy existence needs a finite tree")
    return strategy_to_y(t) is not None

