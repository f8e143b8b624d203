"""Small worked examples: a login protocol, differentiating cells, Nim, and a
discretised progressive generator/discriminator pair."""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from . import poly as P
from .machine import ComposedMachine, NodeMachine, Simulation, compose_machines, machine
from .poly import Poly, PolyMap
from .tree import FiniteTree, constant_tree, explore, finite_tree, tensor_tree

# ---------------------------------------------------------------------------
# login protocol


def _strings(n: int) -> list[str]:
    return [f"s{k}" for k in range(n)]


def _ints(n: int) -> list[str]:
    return [f"n{k}" for k in range(n)]


def _login_root() -> Poly:
    return Poly.labelled([("login", ["success", "failure"]), ("quit", 0)])


def _authenticated(str_n: int, int_n: int | None) -> Poly:
    entries: list[tuple[str, Any]] = [(f"query:{s}", _strings(str_n)) for s in _strings(str_n)]
    if int_n is not None:
        entries += [(f"set:{s}", _ints(int_n)) for s in _strings(str_n)]
    entries.append(("logout", 0))
    return Poly.labelled(entries)


def _protocol(str_n: int, int_n: int | None) -> FiniteTree:
    if str_n < 1 or (int_n is not None and int_n < 1):
        raise ValueError("alphabet sizes must be at least 1")
    root, auth = _login_root(), _authenticated(str_n, int_n)
    succ = [
        [[1, 0], []],
        [[1] * n for n in auth.shape],
    ]
    return finite_tree([root, auth], succ, 0, keys=["start", "authenticated"])


def login_tree(str_n: int = 3, int_n: int = 2) -> FiniteTree:
    """Log in (success or failure) or quit; once in, query or set keys, or log out."""
    return _protocol(str_n, int_n)


def readonly_tree(str_n: int = 3) -> FiniteTree:
    """The login protocol without ``set`` operations."""
    return _protocol(str_n, None)


def readonly_refinement(str_n: int = 3, int_n: int = 2) -> NodeMachine:
    """Single-state machine embedding the read-only protocol into the full one."""
    p, q = readonly_tree(str_n), login_tree(str_n, int_n)

    def act(s, a: FiniteTree, b: FiniteTree) -> PolyMap:
        src, tgt = a.root(), b.root()
        if a.key == "start":
            return P.identity_poly_map(src)
        on_pos = tuple(range(str_n)) + (2 * str_n,)
        on_dir = tuple(tuple(range(tgt.dirs(j))) for j in on_pos)
        return PolyMap(src, tgt, on_pos, on_dir)

    return machine(p, q, 1, 0, act, lambda s, a, b, i, e: 0, "readonly-refinement")


# ---------------------------------------------------------------------------
# cells and an organ


def cell_directions(L: int) -> list[tuple[int, int, int]]:
    """Receptor signals ``(l1, l2, l3)`` in direction-index order."""
    return list(itertools.product(range(L), repeat=3))


def cell_fate(signal: tuple[int, int, int], L: int) -> str:
    """Apoptosis beats differentiation beats growth when several receptors are high."""
    high = L - 1
    l1, _l2, l3 = signal
    if l3 == high:
        return "dead"
    if l1 == high:
        return "neuron"
    return "stem"


def cell_tree(L: int = 2) -> FiniteTree:
    """A stem cell ``L y^{L^3}`` that divides, differentiates into ``L y^L`` or dies."""
    if L < 2:
        raise ValueError("L must be at least 2")
    stem, neuron = Poly.of(*([L**3] * L)), Poly.of(*([L] * L))
    index = {"stem": 0, "neuron": 1, "dead": 2}
    fates = [index[cell_fate(sig, L)] for sig in cell_directions(L)]
    succ = [[fates] * L, [[1] * L] * L, []]
    return finite_tree([stem, neuron, P.ZERO], succ, 0, keys=["stem", "neuron", "dead"])


def _flatten(key: Any) -> tuple:
    if isinstance(key, tuple):
        return sum((_flatten(k) for k in key), ())
    return (key,)


def organ_machine(L: int = 2) -> NodeMachine:
    """Three cells presenting the fixed interface ``L y^L``.

    The organ outputs the largest cell output and broadcasts the incoming
    signal to every receptor of every cell.
    """
    cell = cell_tree(L)
    tissue = tensor_tree(cell, cell, cell)
    out = constant_tree(Poly.of(*([L] * L)))

    def receptor_dir(kind: str, e: int) -> int:
        return e * L * L + e * L + e if kind == "stem" else e

    def act(s, a: FiniteTree, b: FiniteTree) -> PolyMap:
        kinds = _flatten(a.key)
        src = a.root()
        if "dead" in kinds:
            return PolyMap(src, b.root(), (), ())
        ndirs = [L**3 if k == "stem" else L for k in kinds]
        on_pos, on_dir = [], []
        for outs in itertools.product(range(L), repeat=3):
            on_pos.append(max(outs))
            row = []
            for e in range(L):
                d1, d2, d3 = (receptor_dir(k, e) for k in kinds)
                row.append((d1 * ndirs[1] + d2) * ndirs[2] + d3)
            on_dir.append(tuple(row))
        return PolyMap(src, b.root(), tuple(on_pos), tuple(on_dir))

    return machine(tissue, out, 1, 0, act, lambda s, a, b, i, e: 0, "organ")


# ---------------------------------------------------------------------------
# Nim


@dataclass(frozen=True)
class NimRule:
    heap: int
    takes: tuple[int, ...] = (1, 2)

    def __post_init__(self):
        if self.heap < 0:
            raise ValueError("heap must be nonnegative")
        if not self.takes or any(t < 1 for t in self.takes):
            raise ValueError("takes must be a nonempty set of positive integers")
        object.__setattr__(self, "takes", tuple(sorted(set(self.takes))))

    def legal(self, heap: int) -> list[int]:
        return [t for t in self.takes if t <= heap]


def _nim(rule: NimRule, outcomes: bool) -> FiniteTree:
    """White to move at heap ``h``; heap 0 means Black took the last stone."""

    def expand(h: int):
        extra = [("WhiteLose", 0)] if outcomes else []
        if h == 0:
            return Poly.labelled(extra), [[] for _ in extra]
        entries, rows = [], []
        for t in rule.legal(h):
            rest = h - t
            replies = rule.legal(rest) if rest else []
            entries.append((f"take{t}", [f"take{u}" for u in replies]))
            rows.append([rest - u for u in replies])
        return Poly.labelled(entries + extra), rows + [[] for _ in extra]

    return explore(rule.heap, expand)


def nim_tree(rule: NimRule | int, takes: tuple[int, ...] = (1, 2)) -> FiniteTree:
    """White's view of Nim: positions are White's takes, directions Black's replies.

    Taking the last stone leaves no replies (White wins); a node where Black
    took the last stone has no positions.
    """
    rule = rule if isinstance(rule, NimRule) else NimRule(rule, takes)
    return _nim(rule, False)


def nim_with_outcomes(rule: NimRule | int, takes: tuple[int, ...] = (1, 2)) -> FiniteTree:
    """Nim where White may also concede with a terminal ``WhiteLose`` position."""
    rule = rule if isinstance(rule, NimRule) else NimRule(rule, takes)
    return _nim(rule, True)


# ---------------------------------------------------------------------------
# progressive generator / discriminator


@dataclass(frozen=True)
class ProgressiveConfig:
    latent_dim: int = 2
    resolutions: tuple[int, ...] = (1, 2)
    levels: int = 3
    threshold: float = 0.5
    learning_rate: float = 0.1
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "resolutions", tuple(self.resolutions))
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be positive")
        if not self.resolutions or any(a >= b for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise ValueError("resolutions must be nonempty and strictly increasing")
        if self.resolutions[0] < 1:
            raise ValueError("resolutions must be positive")
        if self.levels < 2:
            raise ValueError("need at least two quantisation levels")
        if not np.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.levels)

    @classmethod
    def from_dict(cls, d: dict) -> ProgressiveConfig:
        return cls(**d)


class Grid:
    """Encode real vectors as indices into ``Q^n`` (most significant coordinate first)."""

    def __init__(self, values: np.ndarray):
        self.values = values
        self.size = len(values)

    def quantize(self, x: np.ndarray) -> np.ndarray:
        """Indices of the nearest grid values (lowest on ties)."""
        x = np.asarray(x, dtype=float)
        return np.argmin(np.abs(x[..., None] - self.values), axis=-1)

    def encode(self, idx: np.ndarray) -> int:
        out = 0
        for k in np.asarray(idx).ravel():
            out = out * self.size + int(k)
        return out

    def decode(self, code: int, n: int) -> np.ndarray:
        idx = []
        for _ in range(n):
            code, r = divmod(code, self.size)
            idx.append(r)
        return self.values[np.array(idx[::-1], dtype=int)] if n else np.zeros(0)

    def snap(self, x: np.ndarray) -> int:
        return self.encode(self.quantize(x))


def _square(n: int) -> Poly:
    return Poly.of(*([n] * n))


def latent_tree(cfg: ProgressiveConfig) -> FiniteTree:
    """``(Q y^Q)^{⊗k}``, which is the constant tree on ``Q^k y^{Q^k}``."""
    return constant_tree(_square(cfg.levels**cfg.latent_dim))


def progressive_tree(cfg: ProgressiveConfig) -> FiniteTree:
    """One node per resolution: images and cotangents in ``Q^{N_l}``.

    A cotangent with sup-norm at most the threshold moves to the next
    resolution; the last resolution is constant.
    """
    grid = Grid(cfg.grid)
    last = len(cfg.resolutions) - 1
    polys, succ = [], []
    for level, n in enumerate(cfg.resolutions):
        size = cfg.levels**n
        row = []
        for code in range(size):
            grow = level < last and np.max(np.abs(grid.decode(code, n)), initial=0.0) <= cfg.threshold
            row.append(level + 1 if grow else level)
        polys.append(_square(size))
        succ.append([row] * size)
    return finite_tree(polys, succ, 0, keys=list(range(len(cfg.resolutions))))


def score_tree(cfg: ProgressiveConfig) -> FiniteTree:
    return constant_tree(_square(cfg.levels))


def _table_map(src: Poly, tgt: Poly, fwd: Callable[[int], int], back: Callable[[int, int], int]) -> PolyMap:
    on_pos = tuple(fwd(i) for i in range(src.npos))
    on_dir = tuple(tuple(back(i, e) for e in range(tgt.dirs(j))) for i, j in enumerate(on_pos))
    return PolyMap(src, tgt, on_pos, on_dir)


def generator_machine(cfg: ProgressiveConfig, weights: tuple[np.ndarray, ...]) -> NodeMachine:
    """Linear generator ``z ↦ W_l z`` per resolution; ascent ``W += η v zᵀ``."""
    grid, k = Grid(cfg.grid), cfg.latent_dim

    def act(w, a, b):
        level = b.key
        n = cfg.resolutions[level]
        W = w[level]
        return _table_map(
            a.root(),
            b.root(),
            lambda i: grid.snap(W @ grid.decode(i, k)),
            lambda i, e: grid.snap(W.T @ grid.decode(e, n)),
        )

    def upd(w, a, b, i, e):
        level = b.key
        z = grid.decode(i, k)
        v = grid.decode(e, cfg.resolutions[level])
        out = list(w)
        out[level] = w[level] + cfg.learning_rate * np.outer(v, z)
        return tuple(out)

    return machine(latent_tree(cfg), progressive_tree(cfg), None, weights, act, upd, "generator")


def discriminator_machine(cfg: ProgressiveConfig, weights: tuple[np.ndarray, ...]) -> NodeMachine:
    """Linear score ``x ↦ u_l · x``; descent ``u -= η f x``."""
    grid = Grid(cfg.grid)

    def act(u, a, b):
        level = a.key
        n = cfg.resolutions[level]
        vec = u[level]
        return _table_map(
            a.root(),
            b.root(),
            lambda i: grid.snap(vec @ grid.decode(i, n)),
            lambda i, f: grid.snap(grid.decode(f, 1)[0] * vec),
        )

    def upd(u, a, b, i, f):
        level = a.key
        x = grid.decode(i, cfg.resolutions[level])
        out = list(u)
        out[level] = u[level] - cfg.learning_rate * grid.decode(f, 1)[0] * x
        return tuple(out)

    return machine(progressive_tree(cfg), score_tree(cfg), None, weights, act, upd, "discriminator")


def initial_weights(cfg: ProgressiveConfig) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    rng = np.random.default_rng(cfg.seed)
    wg = tuple(rng.normal(0.0, 0.5, size=(n, cfg.latent_dim)) for n in cfg.resolutions)
    wd = tuple(rng.normal(0.0, 0.5, size=n) for n in cfg.resolutions)
    return wg, wd


def progressive_machine(cfg: ProgressiveConfig) -> ComposedMachine:
    wg, wd = initial_weights(cfg)
    return compose_machines(generator_machine(cfg, wg), discriminator_machine(cfg, wd))


def _weights_json(w: tuple[np.ndarray, ...]) -> list:
    return [x.tolist() for x in w]


def progressive_demo(cfg: ProgressiveConfig, steps: int) -> list[dict]:
    """Run the composite for ``steps`` rounds against a random target score.

    The run draws from ``numpy.random.default_rng(seed + 1)`` (PCG64): one
    latent index and one target level per step.  The cotangent sent back
    into the discriminator is the quantised ``target - score``.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    grid, k = Grid(cfg.grid), cfg.latent_dim
    sim = Simulation(progressive_machine(cfg))
    rng = np.random.default_rng(cfg.seed + 1)
    log = []
    for t in range(steps):
        cg, cd = sim.ctx
        level = cg[1].key
        n = cfg.resolutions[level]
        i = int(rng.integers(cfg.levels**k))
        target = float(grid.values[int(rng.integers(cfg.levels))])
        gen_act = sim.machine.first.action(sim.state[0], cg)
        x = gen_act.on_pos[i]
        dis_act = sim.machine.second.action(sim.state[1], cd)
        score = float(grid.values[dis_act.on_pos[x]])
        f = grid.snap(np.array([target - score]))
        v = dis_act.on_dir[x][f]
        dz = gen_act.on_dir[i][v]
        cot = grid.decode(v, n)
        grow = level < len(cfg.resolutions) - 1 and float(np.max(np.abs(cot))) <= cfg.threshold
        sim.step(i, f)
        log.append(
            {
                "step": t,
                "level": level,
                "position": {
                    "latent": grid.decode(i, k).tolist(),
                    "image": grid.decode(x, n).tolist(),
                    "score": score,
                },
                "direction": {
                    "target": target,
                    "env": float(grid.values[f]),
                    "cotangent": cot.tolist(),
                    "latentCotangent": grid.decode(dz, k).tolist(),
                },
                "branch": "grow" if grow else "stay",
                "wG": _weights_json(sim.state[0]),
                "wD": _weights_json(sim.state[1]),
            }
        )
    return log


def dump_log(log: list[dict]) -> str:
    return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in log)


def fd_vjp(fn: Callable[[np.ndarray], np.ndarray], w: np.ndarray, v: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference ``(Dfn)ᵀ v`` with respect to every entry of ``w``."""
    out = np.zeros_like(w, dtype=float)
    for idx in np.ndindex(w.shape):
        up, down = w.astype(float).copy(), w.astype(float).copy()
        up[idx] += h
        down[idx] -= h
        out[idx] = float(np.dot(v, (fn(up) - fn(down)) / (2 * h)))
    return out


def replay_separately(cfg: ProgressiveConfig, log: list[dict]) -> tuple[tuple, tuple]:
    """Drive the generator and the discriminator on their own with the logged signals."""
    grid = Grid(cfg.grid)
    wg, wd = initial_weights(cfg)
    gen = Simulation(generator_machine(cfg, wg))
    dis = Simulation(discriminator_machine(cfg, wd))
    for rec in log:
        n = len(rec["position"]["image"])
        i = grid.snap(np.array(rec["position"]["latent"]))
        x = grid.snap(np.array(rec["position"]["image"]))
        v = grid.snap(np.array(rec["direction"]["cotangent"]))
        f = grid.snap(np.array([rec["direction"]["env"]]))
        assert n == cfg.resolutions[gen.ctx[1].key]
        gen.step(i, v)
        dis.step(x, f)
    return gen.state, dis.state


def config_dict(cfg: ProgressiveConfig) -> dict:
    d = asdict(cfg)
    d["resolutions"] = list(cfg.resolutions)
    return d
