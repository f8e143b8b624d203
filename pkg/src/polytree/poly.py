"""Finite polynomial functors, their maps, and the monoidal structure on them.

A polynomial is an ordered list of positions, each with a finite number of
directions.  Positions and directions are addressed by index; labels are
carried along for display only and never affect equality.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

DEFAULT_BUDGET = 10**6


class PolyError(ValueError):
    """A malformed polynomial, map or coalgebra."""


class BudgetExceeded(RuntimeError):
    """Raised instead of materialising something too large.

    ``count`` is the exact size that would have been produced.
    """

    def __init__(self, what: str, count: int, budget: int):
        super().__init__(f"{what}: {count} exceeds budget {budget}")
        self.what = what
        self.count = count
        self.budget = budget


def default_budget() -> int:
    raw = os.environ.get("POLYTREE_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


def check_budget(what: str, count: int, budget: int | None = None) -> None:
    limit = default_budget() if budget is None else budget
    if count > limit:
        raise BudgetExceeded(what, count, limit)


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Position:
    dirs: int
    label: str | None = field(default=None, compare=False)
    dir_labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.dirs, int) or self.dirs < 0:
            raise PolyError(f"negative or non-integer dir_count {self.dirs!r}")
        if self.dir_labels is not None:
            if len(self.dir_labels) != self.dirs:
                raise PolyError(
                    f"dir_labels length {len(self.dir_labels)} != dir_count {self.dirs}"
                )
            if len(set(self.dir_labels)) != self.dirs:
                raise PolyError(f"duplicate direction label in {self.dir_labels}")


@dataclass(frozen=True, eq=False)
class Poly:
    """A finite polynomial ``sum_i y^{dirs_i}``.

    Equality and hashing see only direction counts, so a polynomial equals any
    other presentation with the same shape (including :class:`IhomPoly`).
    """

    positions: tuple[Position, ...] = ()

    def __post_init__(self):
        labels = [p.label for p in self.positions if p.label is not None]
        if len(set(labels)) != len(labels):
            dup = next(l for l in labels if labels.count(l) > 1)
            raise PolyError(f"duplicate position label {dup!r}")
        object.__setattr__(self, "_shape", tuple(p.dirs for p in self.positions))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        if self is other:
            return True
        if type(self) is Poly and type(other) is Poly:
            return self._shape == other._shape
        return _same_shape(self, other)

    def __hash__(self) -> int:
        n = self.npos
        return hash((n, self.dirs(0), self.dirs(n - 1)) if n else 0)

    @classmethod
    def of(cls, *dirs: int) -> Poly:
        return cls(tuple(Position(d) for d in dirs))

    @classmethod
    def labelled(cls, entries: Sequence[tuple[str, Sequence[str] | int]]) -> Poly:
        """Build from ``(label, dir_labels_or_count)`` pairs."""
        out = []
        for label, dirs in entries:
            if isinstance(dirs, int):
                out.append(Position(dirs, label))
            else:
                out.append(Position(len(dirs), label, tuple(dirs)))
        return cls(tuple(out))

    @property
    def shape(self) -> tuple[int, ...]:
        return self._shape

    @property
    def npos(self) -> int:
        return len(self.positions)

    def dirs(self, i: int) -> int:
        return self.positions[i].dirs

    def pairs(self) -> Iterator[tuple[int, int]]:
        """All position-direction pairs ``(i, d)`` in canonical order."""
        for i, pos in enumerate(self.positions):
            for d in range(pos.dirs):
                yield i, d

    def total_dirs(self) -> int:
        return sum(self.shape)

    def pos_label(self, i: int) -> str:
        label = self.positions[i].label
        return label if label is not None else str(i)

    def dir_label(self, i: int, d: int) -> str:
        labels = self.positions[i].dir_labels
        return labels[d] if labels is not None else str(d)

    def find_pos(self, token: str) -> int | None:
        for i, pos in enumerate(self.positions):
            if pos.label == token:
                return i
        if token.isdigit() and int(token) < self.npos:
            return int(token)
        return None

    def find_dir(self, i: int, token: str) -> int | None:
        labels = self.positions[i].dir_labels
        if labels is not None and token in labels:
            return labels.index(token)
        if token.isdigit() and int(token) < self.dirs(i):
            return int(token)
        return None

    def strip(self) -> Poly:
        return Poly.of(*self.shape)

    def __add__(self, other: Poly) -> Poly:
        return sum_poly([self, other])

    def __mul__(self, other: Poly) -> Poly:
        return prod_poly([self, other])

    def __str__(self) -> str:
        if not self.positions:
            return "0"
        counts: dict[int, int] = {}
        for d in self.shape:
            counts[d] = counts.get(d, 0) + 1
        terms = []
        for d in sorted(counts, reverse=True):
            m = counts[d]
            mono = "1" if d == 0 else ("y" if d == 1 else f"y^{d}")
            if m == 1:
                terms.append(mono)
            elif d == 0:
                terms.append(str(m))
            else:
                terms.append(f"{m}{mono}")
        return " + ".join(terms)


def _same_shape(p: Poly, q: Poly) -> bool:
    kp, kq = getattr(p, "key", None), getattr(q, "key", None)
    if kp is not None and kp == kq:
        return True
    if p.npos != q.npos:
        return False
    check_budget("polynomial comparison", p.npos)
    return all(p.dirs(i) == q.dirs(i) for i in range(p.npos))


class IhomPoly(Poly):
    """``[p, q]`` addressed by map rank, for internal homs too large to list.

    Position ``k`` is ``map_at(p, q, k)``; only the requested positions are
    ever decoded.  Whole-shape access is subject to the size budget.
    """

    def __init__(self, p: Poly, q: Poly):
        object.__setattr__(self, "positions", ())
        object.__setattr__(self, "key", (p.strip(), q.strip()))
        object.__setattr__(self, "_npos", map_count(p, q))

    def __repr__(self) -> str:
        return f"IhomPoly({self.key[0]}, {self.key[1]})"

    def __str__(self) -> str:
        return f"[{self.key[0]}, {self.key[1]}]"

    @property
    def shape(self) -> tuple[int, ...]:
        check_budget(f"{self} positions", self._npos)
        return tuple(self.dirs(k) for k in range(self._npos))

    @property
    def npos(self) -> int:
        return self._npos

    def dirs(self, i: int) -> int:
        p, q = self.key
        return sum(q.dirs(j) for j in map_at(p, q, i).on_pos)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i in range(self._npos):
            for d in range(self.dirs(i)):
                yield i, d

    def pos_label(self, i: int) -> str:
        return str(i)

    def dir_label(self, i: int, d: int) -> str:
        return str(d)

    def find_pos(self, token: str) -> int | None:
        return int(token) if token.isdigit() and int(token) < self._npos else None

    def find_dir(self, i: int, token: str) -> int | None:
        return int(token) if token.isdigit() and int(token) < self.dirs(i) else None

    def strip(self) -> Poly:
        return self


ZERO = Poly()
ONE = Poly.of(0)
Y = Poly.of(1)


def monomial(coeff: int, exponent: int) -> Poly:
    return Poly.of(*([exponent] * coeff))


def const(n: int) -> Poly:
    return monomial(n, 0)


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True)
class PolyMap:
    """A map ``source -> target``: forward on positions, backward on directions.

    ``on_dir[i][e]`` is the source direction at ``i`` answering target
    direction ``e`` at ``on_pos[i]``.
    """

    source: Poly
    target: Poly
    on_pos: tuple[int, ...]
    on_dir: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        p, q = self.source, self.target
        if len(self.on_pos) != p.npos or len(self.on_dir) != p.npos:
            raise PolyError(
                f"map has {len(self.on_pos)} position images for {p.npos} source positions"
            )
        for i, j in enumerate(self.on_pos):
            if not 0 <= j < q.npos:
                raise PolyError(f"on_pos[{i}] = {j} is not a target position")
            back = self.on_dir[i]
            if len(back) != q.dirs(j):
                raise PolyError(
                    f"on_dir[{i}] has {len(back)} entries, target position {j} has {q.dirs(j)}"
                )
            for e, d in enumerate(back):
                if not 0 <= d < p.dirs(i):
                    raise PolyError(f"on_dir[{i}][{e}] = {d} is not a direction of position {i}")

    def directions(self) -> list[tuple[int, int]]:
        """Directions ``(i, e)`` of the internal hom at this map, in order."""
        return [(i, e) for i, j in enumerate(self.on_pos) for e in range(self.target.dirs(j))]

    def dir_index(self, i: int, e: int) -> int:
        return sum(self.target.dirs(j) for j in self.on_pos[:i]) + e

    def then(self, other: PolyMap) -> PolyMap:
        return compose_poly_maps(self, other)


def identity_poly_map(p: Poly) -> PolyMap:
    return PolyMap(p, p, tuple(range(p.npos)), tuple(tuple(range(n)) for n in p.shape))


def compose_poly_maps(phi: PolyMap, psi: PolyMap) -> PolyMap:
    """Diagrammatic composite ``phi ; psi``."""
    if phi.target != psi.source:
        raise PolyError(f"cannot compose: target {phi.target} != source {psi.source}")
    on_pos = tuple(psi.on_pos[j] for j in phi.on_pos)
    on_dir = tuple(
        tuple(phi.on_dir[i][psi.on_dir[j][f]] for f in range(len(psi.on_dir[j])))
        for i, j in enumerate(phi.on_pos)
    )
    return PolyMap(phi.source, psi.target, on_pos, on_dir)


def is_cartesian(phi: PolyMap) -> bool:
    for i, back in enumerate(phi.on_dir):
        if len(back) != phi.source.dirs(i) or len(set(back)) != len(back):
            return False
    return True


def is_iso(phi: PolyMap) -> bool:
    return sorted(phi.on_pos) == list(range(phi.target.npos)) and is_cartesian(phi)


def invert(phi: PolyMap) -> PolyMap:
    if not is_iso(phi):
        raise PolyError("map is not an isomorphism")
    on_pos = [0] * phi.target.npos
    on_dir: list[tuple[int, ...]] = [()] * phi.target.npos
    for i, j in enumerate(phi.on_pos):
        on_pos[j] = i
        fwd = [0] * phi.source.dirs(i)
        for e, d in enumerate(phi.on_dir[i]):
            fwd[d] = e
        on_dir[j] = tuple(fwd)
    return PolyMap(phi.target, phi.source, tuple(on_pos), tuple(on_dir))


def map_count(p: Poly, q: Poly) -> int:
    """``prod_i sum_j |p[i]|^{|q[j]|}``."""
    return math.prod(sum(a**b for b in q.shape) for a in p.shape)


def enumerate_maps(p: Poly, q: Poly, budget: int | None = None) -> list[PolyMap]:
    """All maps ``p -> q`` in lexicographic order of ``(on_pos, on_dir)``."""
    check_budget(f"Poly({p}, {q})", map_count(p, q), budget)
    return list(_iter_maps(p, q))


def _iter_maps(p: Poly, q: Poly) -> Iterator[PolyMap]:
    for on_pos in itertools.product(range(q.npos), repeat=p.npos):
        choices = [
            itertools.product(range(p.dirs(i)), repeat=q.dirs(j)) for i, j in enumerate(on_pos)
        ]
        for on_dir in itertools.product(*choices):
            yield PolyMap(p, q, on_pos, tuple(on_dir))


def map_index(phi: PolyMap) -> int:
    """Rank of ``phi`` within :func:`enumerate_maps` without enumerating."""
    p, q = phi.source, phi.target
    weights = [[a**b for b in q.shape] for a in p.shape]
    suffix = _suffix_products([sum(w) for w in weights])
    rank, prefix = 0, 1
    for t, j in enumerate(phi.on_pos):
        rank += prefix * sum(weights[t][:j]) * suffix[t + 1]
        prefix *= weights[t][j]
    inner = 0
    for i, back in enumerate(phi.on_dir):
        for d in back:
            inner = inner * p.dirs(i) + d
    return rank + inner


def map_at(p: Poly, q: Poly, k: int) -> PolyMap:
    """Inverse of :func:`map_index`."""
    if not 0 <= k < map_count(p, q):
        raise IndexError(f"map index {k} out of range for Poly({p}, {q})")
    weights = [[a**b for b in q.shape] for a in p.shape]
    suffix = _suffix_products([sum(w) for w in weights])
    on_pos, prefix = [], 1
    for t in range(p.npos):
        for j in range(q.npos):
            block = prefix * weights[t][j] * suffix[t + 1]
            if k < block:
                on_pos.append(j)
                prefix *= weights[t][j]
                break
            k -= block
    digits = [(i, p.dirs(i)) for i, j in enumerate(on_pos) for _ in range(q.dirs(j))]
    values = [0] * len(digits)
    for n in range(len(digits) - 1, -1, -1):
        k, values[n] = divmod(k, digits[n][1])
    on_dir, pos = [], 0
    for j in on_pos:
        on_dir.append(tuple(values[pos : pos + q.dirs(j)]))
        pos += q.dirs(j)
    return PolyMap(p, q, tuple(on_pos), tuple(on_dir))


def _suffix_products(xs: list[int]) -> list[int]:
    out = [1] * (len(xs) + 1)
    for t in range(len(xs) - 1, -1, -1):
        out[t] = out[t + 1] * xs[t]
    return out


# ---------------------------------------------------------------------------
# sums, products, tensor, substitution, internal hom


def sum_poly(ps: Sequence[Poly]) -> Poly:
    positions = [pos for p in ps for pos in p.positions]
    labels = [pos.label for pos in positions if pos.label is not None]
    if len(set(labels)) != len(labels):
        positions = [
            Position(pos.dirs, None if pos.label is None else f"{k}.{pos.label}", pos.dir_labels)
            for k, p in enumerate(ps)
            for pos in p.positions
        ]
    return Poly(tuple(positions))


def prod_poly(ps: Sequence[Poly], budget: int | None = None) -> Poly:
    """Positions are tuples; directions are ordered by component, then index."""
    check_budget("product positions", math.prod(p.npos for p in ps), budget)
    return Poly(
        tuple(
            Position(sum(p.dirs(i) for p, i in zip(ps, idx)))
            for idx in itertools.product(*(range(p.npos) for p in ps))
        )
    )


def tensor_poly(p: Poly, q: Poly, budget: int | None = None) -> Poly:
    """Dirichlet product; position ``(i, j)`` is index ``i * |q(1)| + j``."""
    check_budget("tensor positions", p.npos * q.npos, budget)
    check_budget("tensor directions", max((a * b for a in p.shape for b in q.shape), default=0), budget)
    return Poly(tuple(Position(a * b) for a in p.shape for b in q.shape))


def tensor_all(ps: Sequence[Poly]) -> Poly:
    out = Y
    for k, p in enumerate(ps):
        out = p if k == 0 else tensor_poly(out, p)
    return out


def subst_poly(p: Poly, q: Poly, budget: int | None = None) -> Poly:
    """``p ◁ q``: position ``(i, j)`` with ``j`` choosing a q-position per direction at ``i``."""
    check_budget("substitution positions", sum(q.npos**a for a in p.shape), budget)
    out = []
    for a in p.shape:
        for js in itertools.product(range(q.npos), repeat=a):
            out.append(Position(sum(q.dirs(j) for j in js)))
    return Poly(tuple(out))


@lru_cache(maxsize=4096)
def _ihom(p: Poly, q: Poly) -> Poly:
    return Poly(tuple(Position(sum(q.dirs(j) for j in phi.on_pos)) for phi in _iter_maps(p, q)))


def ihom_poly(p: Poly, q: Poly, budget: int | None = None) -> Poly:
    """Internal hom ``[p, q]``; position ``k`` is ``map_at(p, q, k)``."""
    check_budget(f"[{p}, {q}] positions", map_count(p, q), budget)
    return _ihom(p.strip(), q.strip())


def ihom_indexed(p: Poly, q: Poly) -> Poly:
    """Internal hom listed when within budget, otherwise an :class:`IhomPoly`."""
    try:
        return ihom_poly(p, q)
    except BudgetExceeded:
        return IhomPoly(p, q)


# ---------------------------------------------------------------------------
# maps built from the monoidal structure


def tensor_maps(phi: PolyMap, psi: PolyMap) -> PolyMap:
    p, p2, q, q2 = phi.source, psi.source, phi.target, psi.target
    on_pos, on_dir = [], []
    for i in range(p.npos):
        for i2 in range(p2.npos):
            j, j2 = phi.on_pos[i], psi.on_pos[i2]
            on_pos.append(j * q2.npos + j2)
            on_dir.append(
                tuple(
                    phi.on_dir[i][e] * p2.dirs(i2) + psi.on_dir[i2][e2]
                    for e in range(q.dirs(j))
                    for e2 in range(q2.dirs(j2))
                )
            )
    return PolyMap(tensor_poly(p, p2), tensor_poly(q, q2), tuple(on_pos), tuple(on_dir))


def injection(ps: Sequence[Poly], k: int) -> PolyMap:
    total = sum_poly(ps)
    offset = sum(p.npos for p in ps[:k])
    p = ps[k]
    return PolyMap(
        p, total, tuple(offset + i for i in range(p.npos)), tuple(tuple(range(n)) for n in p.shape)
    )


def copair_maps(phi: PolyMap, psi: PolyMap) -> PolyMap:
    if phi.target != psi.target:
        raise PolyError("copairing needs a common target")
    return PolyMap(
        sum_poly([phi.source, psi.source]), phi.target, phi.on_pos + psi.on_pos, phi.on_dir + psi.on_dir
    )


def sum_maps(phi: PolyMap, psi: PolyMap) -> PolyMap:
    shift = phi.target.npos
    return PolyMap(
        sum_poly([phi.source, psi.source]),
        sum_poly([phi.target, psi.target]),
        phi.on_pos + tuple(shift + j for j in psi.on_pos),
        phi.on_dir + psi.on_dir,
    )


def braid_map(p: Poly, q: Poly) -> PolyMap:
    """``p ⊗ q -> q ⊗ p``."""
    on_pos, on_dir = [], []
    for i in range(p.npos):
        for j in range(q.npos):
            on_pos.append(j * p.npos + i)
            on_dir.append(
                tuple(d * q.dirs(j) + e for e in range(q.dirs(j)) for d in range(p.dirs(i)))
            )
    return PolyMap(tensor_poly(p, q), tensor_poly(q, p), tuple(on_pos), tuple(on_dir))


def assoc_map(p: Poly, q: Poly, r: Poly) -> PolyMap:
    """``(p ⊗ q) ⊗ r -> p ⊗ (q ⊗ r)``."""
    nq, nr = q.npos, r.npos
    on_pos, on_dir = [], []
    for i in range(p.npos):
        for j in range(nq):
            for k in range(nr):
                on_pos.append(i * nq * nr + j * nr + k)
                a, b, c = p.dirs(i), q.dirs(j), r.dirs(k)
                # target direction (d, (e, f)) = d*b*c + e*c + f; source ((d, e), f) is the same number
                on_dir.append(tuple(range(a * b * c)))
    return PolyMap(
        tensor_poly(tensor_poly(p, q), r), tensor_poly(p, tensor_poly(q, r)), tuple(on_pos), tuple(on_dir)
    )


def left_unitor_map(p: Poly) -> PolyMap:
    """``y ⊗ p -> p``."""
    return PolyMap(tensor_poly(Y, p), p, tuple(range(p.npos)), tuple(tuple(range(n)) for n in p.shape))


def right_unitor_map(p: Poly) -> PolyMap:
    """``p ⊗ y -> p``."""
    return PolyMap(tensor_poly(p, Y), p, tuple(range(p.npos)), tuple(tuple(range(n)) for n in p.shape))


def distrib_map(p: Poly, q: Poly, r: Poly) -> PolyMap:
    """``p ⊗ (q + r) -> (p ⊗ q) + (p ⊗ r)``."""
    nq, nr = q.npos, r.npos
    on_pos, on_dir = [], []
    for i in range(p.npos):
        for j in range(nq + nr):
            if j < nq:
                on_pos.append(i * nq + j)
            else:
                on_pos.append(p.npos * nq + i * nr + (j - nq))
            width = (q.dirs(j) if j < nq else r.dirs(j - nq)) * p.dirs(i)
            on_dir.append(tuple(range(width)))
    source = tensor_poly(p, sum_poly([q, r]))
    target = sum_poly([tensor_poly(p, q), tensor_poly(p, r)])
    return PolyMap(source, target, tuple(on_pos), tuple(on_dir))


# ---------------------------------------------------------------------------
# codes


Code = tuple[int, tuple[int, ...]]


def code_of(p: Poly) -> Code:
    return p.npos, p.shape


def realize(code: Code) -> Poly:
    count, dirs = code
    if len(dirs) != count:
        raise PolyError(f"code lists {len(dirs)} direction counts for {count} positions")
    return Poly.of(*dirs)


# ---------------------------------------------------------------------------
# cofree tower and coalgebras


def cofree_count(p: Poly, n: int) -> int:
    """``|p<n>(1)|`` from ``p<0> = y`` and ``p<n+1> = y × (p ◁ p<n>)``."""
    count = 1
    for _ in range(n):
        count = sum(count**a for a in p.shape)
    return count


def cofree_poly(p: Poly, n: int, budget: int | None = None) -> Poly:
    """The polynomial ``p<n>`` itself (small cases only)."""
    out = Y
    for _ in range(n):
        out = prod_poly([Y, subst_poly(p, out, budget)], budget)
    return out


@dataclass(frozen=True)
class Coalgebra:
    """A finite coalgebra ``S -> poly(S)`` with states ``0..len(structure)-1``.

    ``structure[s] = (position, successors)``, one successor per direction.
    """

    poly: Poly
    structure: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        n = len(self.structure)
        for s, (i, succ) in enumerate(self.structure):
            if not 0 <= i < self.poly.npos:
                raise PolyError(f"state {s}: position {i} out of range")
            if len(succ) != self.poly.dirs(i):
                raise PolyError(f"state {s}: {len(succ)} successors for {self.poly.dirs(i)} directions")
            if any(not 0 <= t < n for t in succ):
                raise PolyError(f"state {s}: successor out of range")

    @property
    def nstates(self) -> int:
        return len(self.structure)


@dataclass(frozen=True)
class Behavior:
    """Depth-bounded behavior tree: a root position and one child per direction."""

    position: int
    children: tuple[Behavior | None, ...]


def unfold_behavior(c: Coalgebra, s: int, n: int) -> Behavior | None:
    if not 0 <= s < c.nstates:
        raise PolyError(f"invalid state {s}")
    if n == 0:
        return None
    i, succ = c.structure[s]
    return Behavior(i, tuple(unfold_behavior(c, t, n - 1) for t in succ))


def is_coalgebra_morphism(f: Sequence[int], c: Coalgebra, c2: Coalgebra) -> bool:
    if c.poly != c2.poly:
        return False
    for s, (i, succ) in enumerate(c.structure):
        i2, succ2 = c2.structure[f[s]]
        if i != i2 or tuple(f[t] for t in succ) != succ2:
            return False
    return True


def coalgebra_morphisms(c: Coalgebra, c2: Coalgebra) -> list[tuple[int, ...]]:
    """All coalgebra morphisms, by brute force over functions ``S -> S'``."""
    return [
        f
        for f in itertools.product(range(c2.nstates), repeat=c.nstates)
        if is_coalgebra_morphism(f, c, c2)
    ]


def all_coalgebras(p: Poly, nstates: int) -> Iterator[Coalgebra]:
    per_state = [
        (i, succ) for i in range(p.npos) for succ in itertools.product(range(nstates), repeat=p.dirs(i))
    ]
    for structure in itertools.product(per_state, repeat=nstates):
        yield Coalgebra(p, structure)
