"""JSON documents for polynomials, trees, morphisms and finite machines.

Every document carries a ``kind`` field.  Maps reference their source and
target by the surrounding context (tree nodes), except inside machine tables
where each action records its own codes so that a table can be checked
against other trees.
"""
from __future__ import annotations

import json
from collections import deque
from typing import Any

from .hom import TRIVIAL, TruncMorphism
from .machine import Machine, NodeMachine, machine
from .poly import Poly, PolyError, PolyMap, Position
from .tree import FiniteTree, Tree, TreeError, constant_tree, finite_tree


class DocError(ValueError):
    """A document that does not decode; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


def load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DocError("document must be a JSON object")
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True)


def _field(doc: dict, name: str, path: str) -> Any:
    if name not in doc:
        raise DocError(f"missing field {name!r}", path)
    return doc[name]


# ---------------------------------------------------------------------------
# polynomials and maps


def poly_to_doc(p: Poly) -> dict:
    out = []
    for pos in p.positions:
        entry: dict[str, Any] = {"dirs": pos.dirs}
        if pos.label is not None:
            entry["label"] = pos.label
        if pos.dir_labels is not None:
            entry["dirLabels"] = list(pos.dir_labels)
        out.append(entry)
    return {"kind": "poly", "positions": out}


def poly_from_doc(doc: dict, path: str = "") -> Poly:
    raw = _field(doc, "positions", path)
    if not isinstance(raw, list):
        raise DocError("positions must be a list", path)
    out = []
    for k, entry in enumerate(raw):
        where = f"{path}/positions/{k}"
        dirs = _field(entry, "dirs", where)
        labels = entry.get("dirLabels")
        try:
            out.append(Position(dirs, entry.get("label"), None if labels is None else tuple(labels)))
        except PolyError as exc:
            raise DocError(str(exc), where) from None
    try:
        return Poly(tuple(out))
    except PolyError as exc:
        raise DocError(str(exc), path) from None


def map_to_doc(m: PolyMap, codes: bool = False) -> dict:
    doc: dict[str, Any] = {"onPos": list(m.on_pos), "onDir": [list(r) for r in m.on_dir]}
    if codes:
        doc["source"] = poly_to_doc(m.source)["positions"]
        doc["target"] = poly_to_doc(m.target)["positions"]
    return doc


def map_from_doc(doc: dict, source: Poly | None, target: Poly | None, path: str = "") -> PolyMap:
    if "source" in doc:
        source = poly_from_doc({"positions": doc["source"]}, path + "/source")
    if "target" in doc:
        target = poly_from_doc({"positions": doc["target"]}, path + "/target")
    if source is None or target is None:
        raise DocError("map needs a source and a target", path)
    try:
        return PolyMap(
            source,
            target,
            tuple(_field(doc, "onPos", path)),
            tuple(tuple(r) for r in _field(doc, "onDir", path)),
        )
    except (PolyError, TypeError) as exc:
        raise DocError(str(exc), path) from None


# ---------------------------------------------------------------------------
# trees


def tree_to_doc(t: FiniteTree) -> dict:
    g = t.graph
    nodes = []
    for v, (p, row) in enumerate(zip(g.polys, g.succ)):
        node: dict[str, Any] = {"poly": poly_to_doc(p)["positions"], "next": [list(r) for r in row]}
        if g.keys is not None and isinstance(g.keys[v], (str, int)):
            node["key"] = g.keys[v]
        nodes.append(node)
    return {"kind": "tree", "nodes": nodes, "root": t.node}


def tree_from_doc(doc: dict, path: str = "") -> FiniteTree:
    if doc.get("kind") == "poly":
        return constant_tree(poly_from_doc(doc, path))
    nodes = _field(doc, "nodes", path)
    if not isinstance(nodes, list) or not nodes:
        raise DocError("nodes must be a nonempty list", path)
    polys, succ, keys = [], [], []
    for v, node in enumerate(nodes):
        where = f"{path}/nodes/{v}"
        poly = _field(node, "poly", where)
        polys.append(poly_from_doc(poly if isinstance(poly, dict) else {"positions": poly}, where + "/poly"))
        succ.append(_field(node, "next", where))
        keys.append(node.get("key", v))
    try:
        return finite_tree(polys, succ, int(doc.get("root", 0)), keys)
    except (TreeError, TypeError) as exc:
        raise DocError(str(exc), path) from None


# ---------------------------------------------------------------------------
# morphisms


def morphism_to_doc(phi: TruncMorphism, top: bool = True) -> dict:
    doc: dict[str, Any] = {}
    if top:
        doc["kind"] = "morphism"
        doc["depth"] = phi.depth
    if phi.depth == 0:
        return doc
    assert phi.root_map is not None
    doc["rootMap"] = map_to_doc(phi.root_map)
    doc["children"] = {
        f"{i},{e}": morphism_to_doc(c, top=False) for (i, e), c in zip(phi.root_map.directions(), phi.children)
    }
    return doc


def morphism_from_doc(doc: dict, p: Tree, q: Tree, depth: int | None = None, path: str = "") -> TruncMorphism:
    n = int(_field(doc, "depth", path)) if depth is None else depth
    if n == 0:
        return TRIVIAL
    m = map_from_doc(_field(doc, "rootMap", path), p.root(), q.root(), path + "/rootMap")
    kids_doc = doc.get("children", {})
    kids = []
    for i, e in m.directions():
        key = f"{i},{e}"
        if key not in kids_doc:
            raise DocError(f"missing child {key}", path)
        j, d = m.on_pos[i], m.on_dir[i][e]
        kids.append(morphism_from_doc(kids_doc[key], p.child(i, d), q.child(j, e), n - 1, f"{path}/children/{key}"))
    return TruncMorphism(n, m, tuple(kids))


# ---------------------------------------------------------------------------
# finite machines


def machine_to_doc(mach: Machine, include_trees: bool = True) -> dict:
    """Sparse action/update tables over the triples reachable from the start."""
    if not isinstance(mach, NodeMachine) or mach.states is None:
        raise DocError("only finite node machines have documents")
    if not isinstance(mach.p, FiniteTree) or not isinstance(mach.q, FiniteTree):
        raise DocError("only machines over finite trees have documents")
    start = (mach.start, mach.initial())
    seen = {start}
    queue = deque([start])
    table = []
    while queue:
        s, ctx = queue.popleft()
        a, b = mach.endpoints(ctx)
        m = mach.action(s, ctx)
        upd = []
        for i, e in m.directions():
            nxt = mach.advance(s, ctx, i, e)
            upd.append(nxt[0])
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
        table.append({"state": s, "pNode": a.node, "qNode": b.node, "act": map_to_doc(m, codes=True), "upd": upd})
    doc: dict[str, Any] = {"kind": "machine", "states": list(mach.states), "start": mach.start, "table": table}
    if include_trees:
        doc["source"] = tree_to_doc(mach.p)
        doc["target"] = tree_to_doc(mach.q)
    return doc


def machine_from_doc(doc: dict, p: FiniteTree | None = None, q: FiniteTree | None = None) -> NodeMachine:
    """A machine reading its tables; unknown triples make the action undefined."""
    if p is None:
        p = tree_from_doc(_field(doc, "source", ""), "/source")
    if q is None:
        q = tree_from_doc(_field(doc, "target", ""), "/target")
    states = [_freeze(s) for s in _field(doc, "states", "")]
    acts: dict = {}
    upds: dict = {}
    for k, row in enumerate(_field(doc, "table", "")):
        where = f"/table/{k}"
        key = (_freeze(_field(row, "state", where)), _field(row, "pNode", where), _field(row, "qNode", where))
        pv, qv = key[1], key[2]
        src = p.at(pv).root() if 0 <= pv < len(p.graph) else None
        tgt = q.at(qv).root() if 0 <= qv < len(q.graph) else None
        acts[key] = map_from_doc(_field(row, "act", where), src, tgt, where + "/act")
        upds[key] = tuple(_freeze(s) for s in _field(row, "upd", where))

    def act(s, a, b):
        try:
            return acts[(s, a.node, b.node)]
        except KeyError:
            raise KeyError(f"no action for state {s!r} at nodes ({a.node}, {b.node})") from None

    def upd(s, a, b, i, e):
        return upds[(s, a.node, b.node)][acts[(s, a.node, b.node)].dir_index(i, e)]

    return machine(p, q, states, _freeze(_field(doc, "start", "")), act, upd, doc.get("name", "machine"))


def _freeze(x: Any) -> Any:
    return tuple(_freeze(v) for v in x) if isinstance(x, list) else x


KINDS = ("poly", "tree", "morphism", "machine")
