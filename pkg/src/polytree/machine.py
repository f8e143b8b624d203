"""State machines between polynomial trees.

A machine from ``p`` to ``q`` holds a state and, at every pair of current
tree nodes, an *action* (a polynomial map between the current interfaces)
and an *update* giving the next state for each internal-hom direction
``(i, e)`` of that action.  Unfolding a machine from its start state gives a
tree morphism; machines with a single state and node-dependent actions are
finite presentations of ordinary tree morphisms.

The current node pair is threaded through as an opaque *context*.  Plain
machines use ``(p_node, q_node)``; composites keep the contexts of both
factors, which records the middle node as well.
"""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterator, Mapping, Sequence

from . import poly as P
from .hom import TRIVIAL, Check, TruncMorphism
from .poly import Coalgebra, PolyError, PolyMap
from .tree import FiniteTree, Tree, bisimilar, constant_tree

Act = Callable[[Any, Tree, Tree], PolyMap]
Upd = Callable[[Any, Tree, Tree, int, int], Any]


class MachineError(ValueError):
    pass


class Machine(ABC):
    p: Tree
    q: Tree
    states: tuple | None
    start: Any

    @property
    def finite(self) -> bool:
        return self.states is not None

    @abstractmethod
    def initial(self) -> Any:
        """Context at the roots."""

    @abstractmethod
    def action(self, s: Any, ctx: Any) -> PolyMap: ...

    @abstractmethod
    def advance(self, s: Any, ctx: Any, i: int, e: int) -> tuple[Any, Any]:
        """Next state and context after source position ``i`` and target direction ``e``."""

    @abstractmethod
    def endpoints(self, ctx: Any) -> tuple[Tree, Tree]: ...


@dataclass(frozen=True, eq=False)
class NodeMachine(Machine):
    """Action and update read the current state and the current pair of subtrees."""

    p: Tree
    q: Tree
    states: tuple | None
    start: Any
    act: Act
    upd: Upd
    name: str = field(default="machine")

    def initial(self):
        return (self.p, self.q)

    def action(self, s, ctx):
        return self.act(s, ctx[0], ctx[1])

    def advance(self, s, ctx, i, e):
        a, b = ctx
        m = self.act(s, a, b)
        j, d = m.on_pos[i], m.on_dir[i][e]
        return self.upd(s, a, b, i, e), (a.child(i, d), b.child(j, e))

    def endpoints(self, ctx):
        return ctx


@dataclass(frozen=True, eq=False)
class ComposedMachine(Machine):
    """``first ; second`` with paired states."""

    first: Machine
    second: Machine

    @property
    def p(self) -> Tree:  # type: ignore[override]
        return self.first.p

    @property
    def q(self) -> Tree:  # type: ignore[override]
        return self.second.q

    @property
    def states(self) -> tuple | None:  # type: ignore[override]
        if self.first.states is None or self.second.states is None:
            return None
        return tuple(itertools.product(self.first.states, self.second.states))

    @property
    def start(self):  # type: ignore[override]
        return (self.first.start, self.second.start)

    def initial(self):
        return (self.first.initial(), self.second.initial())

    def action(self, s, ctx):
        return P.compose_poly_maps(self.first.action(s[0], ctx[0]), self.second.action(s[1], ctx[1]))

    def advance(self, s, ctx, i, f):
        (a, b), (ca, cb) = s, ctx
        m1 = self.first.action(a, ca)
        j = m1.on_pos[i]
        e = self.second.action(b, cb).on_dir[j][f]
        a2, ca2 = self.first.advance(a, ca, i, e)
        b2, cb2 = self.second.advance(b, cb, j, f)
        return (a2, b2), (ca2, cb2)

    def endpoints(self, ctx):
        return self.first.endpoints(ctx[0])[0], self.second.endpoints(ctx[1])[1]


@dataclass(frozen=True, eq=False)
class TowerMachine(Machine):
    """Single-state machine that replays a truncated morphism along the path taken."""

    p: Tree
    q: Tree
    morphism: TruncMorphism
    states: tuple = ((),)
    start: Any = ()

    def initial(self):
        return (self.p, self.q, self.morphism)

    def action(self, s, ctx):
        phi = ctx[2]
        if phi.root_map is None:
            raise MachineError("tower machine used beyond the depth of its morphism")
        return phi.root_map

    def advance(self, s, ctx, i, e):
        a, b, phi = ctx
        m = self.action(s, ctx)
        return (), (a.child(i, m.on_dir[i][e]), b.child(m.on_pos[i], e), phi.child(i, e))

    def endpoints(self, ctx):
        return ctx[0], ctx[1]


def machine(p: Tree, q: Tree, states: Sequence | int | None, start: Any, act: Act, upd: Upd, name: str = "machine") -> NodeMachine:
    if isinstance(states, int):
        states = tuple(range(states))
    elif states is not None:
        states = tuple(states)
    return NodeMachine(p, q, states, start, act, upd, name)


def id_machine(t: Tree) -> NodeMachine:
    return machine(t, t, 1, 0, lambda s, a, b: P.identity_poly_map(a.root()), lambda s, a, b, i, e: 0, "id")


def compose_machines(m: Machine, n: Machine) -> ComposedMachine:
    if m.q != n.p:
        raise MachineError("machines do not share the middle tree")
    return ComposedMachine(m, n)


# ---------------------------------------------------------------------------
# validation and unfolding


def _node_name(t: Tree) -> Any:
    return t.node if isinstance(t, FiniteTree) else t


def _check_step(mach: Machine, s: Any, ctx: Any) -> tuple[Check, PolyMap | None]:
    a, b = mach.endpoints(ctx)
    where = (s, _node_name(a), _node_name(b))
    try:
        m = mach.action(s, ctx)
    except (PolyError, MachineError, KeyError, IndexError) as exc:
        return Check(False, where, f"act undefined: {exc}"), None
    if not isinstance(m, PolyMap):
        return Check(False, where, "act is not a polynomial map"), None
    if m.source != a.root():
        return Check(False, where, f"act source code mismatch: {m.source} vs {a.root()}"), None
    if m.target != b.root():
        return Check(False, where, f"act target code mismatch: {m.target} vs {b.root()}"), None
    return Check(True), m


def validate_machine(mach: Machine, depth: int | None = None) -> Check:
    """Check action and update at every triple reachable from the start.

    With ``depth`` the search stops after that many rounds; this is required
    for opaque state spaces or lazily presented trees.
    """
    bounded = depth is not None or not mach.finite or not _all_finite(mach)
    if bounded and depth is None:
        depth = 6
    seen: set = set()
    queue = deque([(mach.start, mach.initial(), 0)])
    while queue:
        s, ctx, k = queue.popleft()
        if bounded and k >= depth:
            continue
        key = _hashable((s, ctx))
        if key is not None:
            if key in seen:
                continue
            seen.add(key)
        res, m = _check_step(mach, s, ctx)
        if not res:
            return res
        assert m is not None
        for i, e in m.directions():
            try:
                s2, ctx2 = mach.advance(s, ctx, i, e)
            except (PolyError, MachineError, KeyError, IndexError) as exc:
                return Check(False, res.path, f"upd undefined at (i={i}, e={e}): {exc}")
            if mach.states is not None and s2 not in mach.states:
                a, b = mach.endpoints(ctx)
                return Check(False, (s, _node_name(a), _node_name(b)), f"upd at (i={i}, e={e}) gives unknown state {s2!r}")
            queue.append((s2, ctx2, k + 1))
    return Check(True)


def _all_finite(mach: Machine) -> bool:
    return isinstance(mach.p, FiniteTree) and isinstance(mach.q, FiniteTree)


def _hashable(x: Any) -> Hashable | None:
    try:
        hash(x)
    except TypeError:
        return None
    return x


def unfold_machine(mach: Machine, n: int, state: Any = None, ctx: Any = None) -> TruncMorphism:
    s = mach.start if state is None else state
    c = mach.initial() if ctx is None else ctx
    memo: dict = {}

    def go(s, c, k):
        if k == 0:
            return TRIVIAL
        key = _hashable((s, c, k))
        if key is not None and key in memo:
            return memo[key]
        m = mach.action(s, c)
        kids = []
        for i, e in m.directions():
            s2, c2 = mach.advance(s, c, i, e)
            kids.append(go(s2, c2, k - 1))
        out = TruncMorphism(k, m, tuple(kids))
        if key is not None:
            memo[key] = out
        return out

    return go(s, c, n)


def reachable_contexts(mach: Machine, from_all_states: bool = True) -> list[Any]:
    """Contexts reachable from the roots, stepping from every state (or only the start)."""
    if mach.states is None:
        raise MachineError("reachability needs a finite state set")
    starts = mach.states if from_all_states else (mach.start,)
    root = mach.initial()
    seen = {root}
    order = [root]
    queue = deque(order)
    while queue:
        ctx = queue.popleft()
        for s in starts:
            m = mach.action(s, ctx)
            for i, e in m.directions():
                _, c2 = mach.advance(s, ctx, i, e)
                if c2 not in seen:
                    seen.add(c2)
                    order.append(c2)
                    queue.append(c2)
    return order


# ---------------------------------------------------------------------------
# maps between machines


def check_machine_map(f: Mapping | Sequence | Callable, m1: Machine, m2: Machine) -> bool:
    """Whether ``f : S -> S'`` preserves actions and commutes with updates everywhere."""
    if m1.states is None or m2.states is None:
        raise MachineError("machine maps need finite state sets")
    if not (_all_finite(m1) and _all_finite(m2)):
        raise MachineError("machine maps need finite trees")
    if m1.p != m2.p or m1.q != m2.q:
        return False
    fn = f if callable(f) else (lambda s: f[s])
    for ctx in reachable_contexts(m1):
        for s in m1.states:
            t = fn(s)
            if t not in m2.states:
                return False
            m = m1.action(s, ctx)
            if m2.action(t, ctx) != m:
                return False
            for i, e in m.directions():
                if fn(m1.advance(s, ctx, i, e)[0]) != m2.advance(t, ctx, i, e)[0]:
                    return False
    return True


def machine_maps(m1: Machine, m2: Machine) -> list[tuple]:
    """All machine maps, by enumerating every function between the state sets."""
    assert m1.states is not None and m2.states is not None
    out = []
    for image in itertools.product(m2.states, repeat=len(m1.states)):
        f = dict(zip(m1.states, image))
        if check_machine_map(f, m1, m2):
            out.append(image)
    return out


# ---------------------------------------------------------------------------
# coalgebras and constant trees


def embed_coalgebra(p: P.Poly, q: P.Poly, beta: Coalgebra) -> NodeMachine:
    """The time-invariant machine between constant trees reading ``beta`` at every node."""
    h = P.ihom_poly(p, q)
    if beta.poly != h:
        raise MachineError(f"coalgebra is over {beta.poly}, expected [{p}, {q}] = {h}")
    maps = {s: P.map_at(p, q, pos) for s, (pos, _) in enumerate(beta.structure)}

    def act(s, a, b):
        return maps[s]

    def upd(s, a, b, i, e):
        return beta.structure[s][1][maps[s].dir_index(i, e)]

    return machine(constant_tree(p), constant_tree(q), beta.nstates, 0, act, upd, "coalgebra")


def compose_coalgebras(beta: Coalgebra, gamma: Coalgebra, p: P.Poly, q: P.Poly, r: P.Poly) -> Coalgebra:
    """Composite ``[p, r]``-coalgebra on ``S × T``: compose actions, pair successors."""
    nt = gamma.nstates
    structure = []
    for s, t in itertools.product(range(beta.nstates), range(nt)):
        m1 = P.map_at(p, q, beta.structure[s][0])
        m2 = P.map_at(q, r, gamma.structure[t][0])
        m = P.compose_poly_maps(m1, m2)
        succ = []
        for i, f in m.directions():
            j = m1.on_pos[i]
            e = m2.on_dir[j][f]
            s2 = beta.structure[s][1][m1.dir_index(i, e)]
            t2 = gamma.structure[t][1][m2.dir_index(j, f)]
            succ.append(s2 * nt + t2)
        structure.append((P.map_index(m), tuple(succ)))
    return Coalgebra(P.ihom_poly(p, r), tuple(structure))


def _is_constant(t: Tree) -> bool:
    return isinstance(t, FiniteTree) and bisimilar(t, constant_tree(t.root()))


def is_time_invariant(mach: Machine) -> bool:
    if not (_is_constant(mach.p) and _is_constant(mach.q)):
        raise MachineError("time invariance is defined over constant trees")
    assert mach.states is not None
    seen: dict = {}
    for ctx in reachable_contexts(mach):
        for s in mach.states:
            m = mach.action(s, ctx)
            data = (m, tuple(mach.advance(s, ctx, i, e)[0] for i, e in m.directions()))
            if seen.setdefault(s, data) != data:
                return False
    return True


def retract_to_coalgebra(mach: Machine) -> Coalgebra:
    """Root-level action and update as a ``[p, q]``-coalgebra."""
    if not (_is_constant(mach.p) and _is_constant(mach.q)):
        raise MachineError("retraction is defined over constant trees")
    assert mach.states is not None
    index = {s: k for k, s in enumerate(mach.states)}
    ctx = mach.initial()
    structure = []
    for s in mach.states:
        m = mach.action(s, ctx)
        succ = tuple(index[mach.advance(s, ctx, i, e)[0]] for i, e in m.directions())
        structure.append((P.map_index(m), succ))
    return Coalgebra(P.ihom_poly(mach.p.root(), mach.q.root()), tuple(structure))


# ---------------------------------------------------------------------------
# single-state machines and tree morphisms


def s1_to_trunc(mach: Machine, n: int) -> TruncMorphism:
    if mach.states is None or len(mach.states) != 1:
        raise MachineError("expected a machine with exactly one state")
    return unfold_machine(mach, n)


def trunc_to_s1(phi: TruncMorphism, p: Tree, q: Tree) -> TowerMachine:
    return TowerMachine(p, q, phi)


def node_machines(p: FiniteTree, q: FiniteTree) -> Iterator[NodeMachine]:
    """Every single-state machine whose action depends only on the node pair.

    Node pairs are those reachable under some choice of actions; each pair
    independently picks any map between its polynomials.
    """
    pairs = _all_node_pairs(p, q)
    options = [P.enumerate_maps(p.at(a).root(), q.at(b).root()) for a, b in pairs]
    for choice in itertools.product(*options):
        table = dict(zip(pairs, choice))
        yield machine(p, q, 1, 0, lambda s, a, b, t=table: t[(a.node, b.node)], lambda s, a, b, i, e: 0)


def _all_node_pairs(p: FiniteTree, q: FiniteTree) -> list[tuple[int, int]]:
    start = (p.node, q.node)
    seen = {start}
    order = [start]
    queue = deque(order)
    while queue:
        a, b = queue.popleft()
        for m in P.enumerate_maps(p.at(a).root(), q.at(b).root()):
            for i, e in m.directions():
                nxt = (p.graph.succ[a][i][m.on_dir[i][e]], q.graph.succ[b][m.on_pos[i]][e])
                if nxt not in seen:
                    seen.add(nxt)
                    order.append(nxt)
                    queue.append(nxt)
    return order


# ---------------------------------------------------------------------------
# strategies


def witness_from_y(t: FiniteTree) -> NodeMachine | None:
    """Single-state machine ``ȳ -> t`` from the winning region, or None."""
    from .tree import strategy_from_y

    choice = strategy_from_y(t)
    if choice is None:
        return None

    def act(s, a, b):
        j = choice[b.node]
        return PolyMap(P.Y, b.root(), (j,), ((0,) * b.root().dirs(j),))

    return machine(constant_tree(P.Y), t, 1, 0, act, lambda s, a, b, i, e: 0, "strategy")


def witness_to_y(t: FiniteTree) -> NodeMachine | None:
    """Single-state machine ``t -> ȳ`` answering every position, or None."""
    from .tree import strategy_to_y

    answer = strategy_to_y(t)
    if answer is None:
        return None

    def act(s, a, b):
        ds = answer[a.node]
        return PolyMap(a.root(), P.Y, (0,) * a.root().npos, tuple((d,) for d in ds))

    return machine(t, constant_tree(P.Y), 1, 0, act, lambda s, a, b, i, e: 0, "counter-strategy")


# ---------------------------------------------------------------------------
# stepping a machine interactively


class Simulation:
    """Mutable run of a machine; the caller supplies positions and directions."""

    def __init__(self, mach: Machine):
        self.machine = mach
        self.state = mach.start
        self.ctx = mach.initial()
        self.steps = 0

    @property
    def nodes(self) -> tuple[Tree, Tree]:
        return self.machine.endpoints(self.ctx)

    def action(self) -> PolyMap:
        return self.machine.action(self.state, self.ctx)

    def step(self, i: int, e: int) -> dict:
        m = self.action()
        j, d = m.on_pos[i], m.on_dir[i][e]
        self.state, self.ctx = self.machine.advance(self.state, self.ctx, i, e)
        self.steps += 1
        return {"step": self.steps, "i": i, "j": j, "e": e, "d": d}
