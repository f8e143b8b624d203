import itertools

from hypothesis import strategies as st

from polytree.poly import Poly, PolyMap

# small polynomials keep map sets enumerable
polys = st.lists(st.integers(0, 2), max_size=3).map(lambda ds: Poly.of(*ds))


def brute_force_maps(p: Poly, q: Poly) -> list[PolyMap]:
    """Every (on_pos, on_dir) assignment, filtered by validity; independent of the library's enumerator."""
    out = []
    for on_pos in itertools.product(range(q.npos), repeat=p.npos):
        per_pos = [list(itertools.product(range(p.dirs(i)), repeat=q.dirs(j))) for i, j in enumerate(on_pos)]
        for on_dir in itertools.product(*per_pos):
            out.append(PolyMap(p, q, tuple(on_pos), tuple(on_dir)))
    return out
