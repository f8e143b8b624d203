"""``polytree`` command line.

Exit codes: 0 success, 1 validation or check failure, 2 usage error,
3 budget exceeded.  Machine-readable output is JSON or JSON lines.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import IO, Any, Sequence

from . import docs as D
from . import fixtures as F
from . import hom as H
from . import laws
from . import machine as M
from . import poly as P
from . import tree as T
from .poly import BudgetExceeded, PolyError
from .tree import TreeError

OK, FAIL, USAGE, BUDGET = 0, 1, 2, 3
MAX_LAW_DEPTH = 4


class UsageError(Exception):
    pass


def _emit(out: IO[str], obj: Any) -> None:
    out.write(D.dumps(obj) + "\n")


def _read(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return D.load(text)


def _tree(path: str) -> T.FiniteTree:
    return D.tree_from_doc(_read(path))


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


# ---------------------------------------------------------------------------
# commands


def _kind(doc: dict) -> str | None:
    """The declared kind, or the one implied by the fields present."""
    if "kind" in doc:
        return doc["kind"]
    for field, kind in (("positions", "poly"), ("nodes", "tree"), ("table", "machine"), ("rootMap", "morphism")):
        if field in doc:
            return kind
    return None


def cmd_validate(args, out: IO[str]) -> int:
    doc = _read(args.file)
    kind = _kind(doc)
    try:
        if kind == "poly":
            D.poly_from_doc(doc)
        elif kind == "tree":
            D.tree_from_doc(doc)
        elif kind == "morphism":
            p = D.tree_from_doc(doc["source"], "/source") if "source" in doc else None
            q = D.tree_from_doc(doc["target"], "/target") if "target" in doc else None
            if p is None or q is None:
                raise D.DocError("morphism documents need source and target trees to validate")
            phi = D.morphism_from_doc(doc, p, q)
            res = H.validate_trunc(phi, p, q)
            if not res:
                _emit(out, {"ok": False, "kind": kind, "error": res.message, "path": [list(x) for x in res.path]})
                return FAIL
        elif kind == "machine":
            mach = D.machine_from_doc(doc)
            res = M.validate_machine(mach, depth=args.depth)
            if not res:
                _emit(out, {"ok": False, "kind": kind, "error": res.message, "path": _jsonable(res.path)})
                return FAIL
        else:
            raise D.DocError(f"unknown kind {kind!r}; expected one of {', '.join(D.KINDS)}")
    except D.DocError as exc:
        _emit(out, {"ok": False, "kind": kind, "error": str(exc), "path": exc.path})
        return FAIL
    _emit(out, {"ok": True, "kind": kind})
    return OK


def _jsonable(x: Any) -> Any:
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return repr(x)


def cmd_laws(args, out: IO[str]) -> int:
    if args.depth > MAX_LAW_DEPTH:
        raise UsageError(f"--depth at most {MAX_LAW_DEPTH}")
    names = args.suite or None
    if names:
        unknown = [n for n in names if n not in laws.SUITES]
        if unknown:
            raise UsageError(f"unknown suite(s): {', '.join(unknown)}")
    results = laws.run_suites(args.depth, names)
    if args.format == "table":
        width = max(len(r.name) for r in results)
        for r in results:
            out.write(f"{r.name:<{width}}  {r.status:<4}  {r.cases:>6}  {r.seconds:6.2f}s  {r.detail}\n")
    else:
        for r in results:
            _emit(out, {"suite": r.name, "status": r.status, "cases": r.cases, "detail": r.detail})
    failed = [r.name for r in results if r.status == "fail"]
    if args.format != "table":
        _emit(out, {"summary": {"pass": sum(r.status == "pass" for r in results), "fail": len(failed),
                                "skip": sum(r.status == "skip" for r in results)}})
    return FAIL if failed else OK


def cmd_homs(args, out: IO[str]) -> int:
    p, q = _tree(args.source), _tree(args.target)
    count = H.count_trunc_homs(p, q, args.depth)
    if args.count:
        _emit(out, {"depth": args.depth, "count": count})
        return OK
    for phi in H.enumerate_trunc_homs(p, q, args.depth, args.budget):
        _emit(out, D.morphism_to_doc(phi))
    return OK


def cmd_solve(args, out: IO[str]) -> int:
    t = _tree(args.file)
    wit = M.witness_from_y(t) if args.mode == "from-y" else M.witness_to_y(t)
    result: dict[str, Any] = {"mode": args.mode, "exists": wit is not None}
    if wit is not None:
        doc = D.machine_to_doc(wit)
        if args.out:
            Path(args.out).write_text(D.dumps(doc) + "\n", encoding="utf-8")
            result["witness"] = args.out
        else:
            result["witness"] = doc
    _emit(out, result)
    return OK


def cmd_check_refine(args, out: IO[str]) -> int:
    p, q = _tree(args.source), _tree(args.target)
    doc = _read(args.file)
    try:
        if doc.get("kind") == "morphism":
            phi = D.morphism_from_doc(doc, p, q)
            res = H.validate_trunc(phi, p, q, min(args.depth, phi.depth))
            if res and phi.depth < args.depth:
                res = H.Check(False, (), f"morphism has depth {phi.depth} < {args.depth}")
        elif doc.get("kind") == "machine":
            res = M.validate_machine(D.machine_from_doc(doc, p, q), depth=args.depth)
        else:
            raise D.DocError("expected a machine or morphism document")
    except D.DocError as exc:
        _emit(out, {"ok": False, "error": str(exc), "path": exc.path})
        return FAIL
    _emit(out, {"ok": bool(res), "depth": args.depth, "error": res.message, "path": _jsonable(res.path)})
    return OK if res else FAIL


def cmd_demo(args, out: IO[str]) -> int:
    if args.example != "progressive":
        raise UsageError(f"unknown demo {args.example!r}")
    raw = _read(args.config) if args.config else {}
    raw.pop("kind", None)
    if args.seed is not None:
        raw["seed"] = args.seed
    try:
        cfg = F.ProgressiveConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from None
    out.write(F.dump_log(F.progressive_demo(cfg, args.steps)))
    return OK


def cmd_fixture(args, out: IO[str]) -> int:
    name = args.name
    if name == "login":
        doc = D.tree_to_doc(F.login_tree(args.strings, args.ints))
    elif name == "readonly":
        doc = D.tree_to_doc(F.readonly_tree(args.strings))
    elif name == "refinement":
        doc = D.machine_to_doc(F.readonly_refinement(args.strings, args.ints))
    elif name == "cell":
        doc = D.tree_to_doc(F.cell_tree(args.size))
    elif name == "nim":
        doc = D.tree_to_doc(F.nim_tree(args.heap, tuple(args.takes)))
    elif name == "nim-outcomes":
        doc = D.tree_to_doc(F.nim_with_outcomes(args.heap, tuple(args.takes)))
    else:
        shape = [int(x) for x in args.dirs.split(",")] if args.dirs else []
        doc = D.tree_to_doc(T.constant_tree(P.Poly.of(*shape)))
    _emit(out, doc)
    return OK


# ---------------------------------------------------------------------------
# interactive trace


class Trace:
    """Step through a tree reading choices from ``inp``; a machine may choose positions."""

    def __init__(self, tree: T.FiniteTree, mach: M.Machine | None, inp: IO[str], out: IO[str], err: IO[str]):
        self.tree, self.inp, self.out, self.err = tree, inp, out, err
        self.sim = M.Simulation(mach) if mach is not None else None

    def ask(self, prompt: str, poly, choices: int, label) -> int | None:
        while True:
            self.err.write(prompt)
            self.err.flush()
            line = self.inp.readline()
            if not line:
                raise EOFError
            token = line.strip()
            if token == "quit":
                return None
            k = int(token) if token.isdigit() else label(token)
            if k is not None and 0 <= k < choices:
                return k
            _emit(self.out, {"event": "invalid", "input": token})

    def run(self) -> int:
        node = self.tree
        try:
            while True:
                p = node.root()
                _emit(self.out, {"event": "node", "node": node.node, "key": _jsonable(node.key),
                                 "positions": [{"index": i, "label": p.pos_label(i), "dirs": p.dirs(i)}
                                               for i in range(p.npos)]})
                if p.npos == 0:
                    _emit(self.out, {"event": "end", "reason": "no positions; terminated"})
                    return OK
                if self.sim is not None:
                    i = self.sim.action().on_pos[0]
                    by = "machine"
                else:
                    i = self.ask("position> ", p, p.npos, p.find_pos)
                    by = "user"
                    if i is None:
                        _emit(self.out, {"event": "end", "reason": "quit"})
                        return OK
                _emit(self.out, {"event": "position", "index": i, "label": p.pos_label(i), "by": by})
                if p.dirs(i) == 0:
                    _emit(self.out, {"event": "end", "reason": "no directions; terminated"})
                    return OK
                d = self.ask("direction> ", p, p.dirs(i), lambda tok: p.find_dir(i, tok))
                if d is None:
                    _emit(self.out, {"event": "end", "reason": "quit"})
                    return OK
                _emit(self.out, {"event": "direction", "index": d, "label": p.dir_label(i, d)})
                if self.sim is not None:
                    self.sim.step(0, d)
                    node = self.sim.nodes[1]
                else:
                    node = node.child(i, d)
        except EOFError:
            _emit(self.out, {"event": "end", "reason": "eof"})
            return OK


def cmd_trace(args, out: IO[str], inp: IO[str] | None = None, err: IO[str] | None = None) -> int:
    inp = sys.stdin if inp is None else inp
    err = sys.stderr if err is None else err
    t = _tree(args.file)
    mach = None
    if args.machine:
        mach = D.machine_from_doc(_read(args.machine), q=t)
        if mach.p.root().shape != (1,):
            raise UsageError("trace machines must have the constant tree on y as source")
    return Trace(t, mach, inp, out, err).run()


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=_positive, default=argparse.SUPPRESS,
                        help="size budget (default 10^6 or $POLYTREE_BUDGET)")
    common.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        prog="polytree", description="Polynomial trees, their morphisms and machines.", parents=[common]
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser  # type: ignore[method-assign]

    p = sub.add_parser("validate", help="check a poly, tree, morphism or machine document")
    p.add_argument("file")
    p.add_argument("--depth", type=_nonneg, default=None, help="bound machine checks to this depth")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("laws", help="run the law suites")
    p.add_argument("--depth", type=_nonneg, default=3)
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("homs", help="list or count depth-n morphisms between two trees")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--depth", type=_nonneg, default=3)
    p.add_argument("--count", action="store_true")
    p.set_defaults(func=cmd_homs)

    p = sub.add_parser("solve", help="decide whether a map from or to the constant tree on y exists")
    p.add_argument("file")
    p.add_argument("--mode", choices=("from-y", "to-y"), default="from-y")
    p.add_argument("--out", help="write the witness machine here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("trace", help="step through a tree interactively")
    p.add_argument("file")
    p.add_argument("--machine", help="machine from the constant tree on y that picks positions")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("demo", help="run a demonstration")
    p.add_argument("example", choices=("progressive",))
    p.add_argument("--steps", type=_nonneg, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", help="JSON file with progressive-learner settings")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("fixture", help="print a built-in example as a document")
    p.add_argument("name", choices=("login", "readonly", "refinement", "cell", "nim", "nim-outcomes", "constant"))
    p.add_argument("--strings", type=_positive, default=3, help="login key alphabet size")
    p.add_argument("--ints", type=_positive, default=2, help="login value alphabet size")
    p.add_argument("--size", type=_positive, default=2, help="cell signal alphabet size")
    p.add_argument("--heap", type=_nonneg, default=4)
    p.add_argument("--takes", type=_positive, nargs="+", default=[1, 2])
    p.add_argument("--dirs", default="", help="comma-separated direction counts for a constant tree")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("check-refine", help="check a machine or morphism between two trees")
    p.add_argument("file")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--depth", type=_nonneg, default=3)
    p.set_defaults(func=cmd_check_refine)
    return parser


def main(argv: Sequence[str] | None = None, out: IO[str] | None = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    # shared flags may appear before or after the subcommand; absent means default
    args.budget = getattr(args, "budget", None)
    args.format = getattr(args, "format", "json")
    saved = os.environ.get("POLYTREE_BUDGET")
    if args.budget is not None:
        os.environ["POLYTREE_BUDGET"] = str(args.budget)
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"polytree: {exc}\n")
        return USAGE
    except BudgetExceeded as exc:
        _emit(out, {"ok": False, "error": "budget exceeded", "what": exc.what, "count": str(exc.count),
                    "budget": exc.budget})
        return BUDGET
    except D.DocError as exc:
        _emit(out, {"ok": False, "error": str(exc), "path": exc.path})
        return FAIL
    except (PolyError, TreeError, M.MachineError, ValueError) as exc:
        _emit(out, {"ok": False, "error": str(exc)})
        return FAIL
    finally:
        if saved is None:
            os.environ.pop("POLYTREE_BUDGET", None)
        else:
            os.environ["POLYTREE_BUDGET"] = saved


if __name__ == "__main__":
    sys.exit(main())
