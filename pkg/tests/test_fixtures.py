import json

import numpy as np
import pytest

from polytree import fixtures as F
from polytree import machine as M
from polytree import tree as T
from polytree.poly import ZERO, Poly
from polytree.tree import constant_tree


def test_login_shape():
    login = F.login_tree()
    assert login.root() == Poly.of(2, 0)
    auth = login.child(0, 0)
    assert auth.root().npos == 7
    assert auth.root().shape == (3, 3, 3, 2, 2, 2, 0)
    assert login.child(0, 1) == login
    assert all(auth.child(i, d) == auth for i, d in auth.root().pairs())
    assert login.root().pos_label(0) == "login"


def test_readonly_has_no_set():
    ro = F.readonly_tree()
    labels = [ro.child(0, 0).root().pos_label(j) for j in range(ro.child(0, 0).root().npos)]
    assert labels == ["query:s0", "query:s1", "query:s2", "logout"]


def test_refinement_avoids_set_positions():
    ref = F.readonly_refinement()
    assert M.validate_machine(ref, depth=6)
    for ctx in M.reachable_contexts(ref):
        m = ref.action(0, ctx)
        assert not any(m.target.pos_label(j).startswith("set:") for j in m.on_pos)


@pytest.mark.parametrize("bad", [(0, 1), (1, 0)])
def test_login_rejects_empty_alphabets(bad):
    with pytest.raises(ValueError):
        F.login_tree(*bad)


def test_cell_tree():
    c = F.cell_tree(2)
    assert c.root() == Poly.of(8, 8)
    dirs = F.cell_directions(2)
    high3 = dirs.index((0, 0, 1))
    assert T.bisimilar(c.child(0, high3), constant_tree(ZERO))
    neuron = c.child(0, dirs.index((1, 0, 0)))
    assert T.bisimilar(neuron, constant_tree(Poly.of(2, 2)))
    grow = c.child(0, dirs.index((0, 1, 0)))
    assert T.bisimilar(grow, c)
    assert F.cell_fate((1, 1, 1), 2) == "dead"
    assert F.cell_fate((1, 1, 0), 2) == "neuron"
    assert F.cell_fate((0, 0, 0), 2) == "stem"
    with pytest.raises(ValueError):
        F.cell_tree(1)


def test_cell_tree_three_levels():
    c = F.cell_tree(3)
    assert c.root() == Poly.of(27, 27, 27)
    assert T.bisimilar(c.child(1, F.cell_directions(3).index((2, 1, 2))), constant_tree(ZERO))


def test_organ_after_differentiation():
    org = F.organ_machine(2)
    # broadcasting the low signal keeps all stems; the high signal kills them
    kept = M.unfold_machine(org, 2).child(0, 0)
    assert kept.root_map.source == org.p.root()
    dead = M.unfold_machine(org, 2).child(0, 1)
    assert dead.root_map.source.npos == 0


def test_nim_shapes():
    one = F.nim_tree(1)
    assert one.root().npos == 1 and one.root().dirs(0) == 0
    assert one.root().pos_label(0) == "take1"
    three = F.nim_tree(3)
    assert [three.root().pos_label(j) for j in range(2)] == ["take1", "take2"]
    # Black taking the last stone leaves White with nothing to do
    assert three.child(1, 0).root() == ZERO
    for h in range(1, 6):
        legal = len(F.NimRule(h).legal(h))
        assert F.nim_with_outcomes(h).root().npos == legal + 1
    with pytest.raises(ValueError):
        F.NimRule(-1)
    with pytest.raises(ValueError):
        F.NimRule(3, (0,))


def test_progressive_tree_partition():
    cfg = F.ProgressiveConfig()
    t = F.progressive_tree(cfg)
    grid = F.Grid(cfg.grid)
    assert t.root() == Poly.of(3, 3, 3)
    for e in range(3):
        grows = abs(grid.decode(e, 1)[0]) <= cfg.threshold
        assert (t.child(0, e).key == 1) == grows
    top = t.child(0, 1)
    assert top.root().npos == 9 and all(top.child(i, d) == top for i, d in top.root().pairs())


def test_grid_codes():
    grid = F.Grid(np.linspace(-1, 1, 3))
    for code in range(27):
        assert grid.snap(grid.decode(code, 3)) == code
    assert grid.quantize(np.array([0.5]))[0] == 1  # ties go to the lower index


def test_demo_deterministic_and_logged():
    cfg = F.ProgressiveConfig()
    a, b = F.progressive_demo(cfg, 30), F.progressive_demo(cfg, 30)
    assert F.dump_log(a) == F.dump_log(b)
    rec = json.loads(F.dump_log(a).splitlines()[0])
    assert set(rec) == {"step", "level", "position", "direction", "branch", "wG", "wD"}
    assert F.progressive_demo(F.ProgressiveConfig(seed=7), 30) != a


def test_demo_threshold_extremes():
    never = F.progressive_demo(F.ProgressiveConfig(threshold=-1.0), 40)
    assert {r["level"] for r in never} == {0}
    always = F.progressive_demo(F.ProgressiveConfig(threshold=10.0), 5)
    assert [r["level"] for r in always] == [0, 1, 1, 1, 1]
    zero = F.progressive_demo(F.ProgressiveConfig(threshold=0.0), 60)
    for prev, nxt in zip(zero, zero[1:]):
        if prev["level"] == 0:
            assert (nxt["level"] == 1) == (prev["direction"]["cotangent"] == [0.0])


def test_demo_replay_matches():
    cfg = F.ProgressiveConfig()
    log = F.progressive_demo(cfg, 50)
    wg, wd = F.replay_separately(cfg, log)
    assert [w.tolist() for w in wg] == log[-1]["wG"]
    assert [w.tolist() for w in wd] == log[-1]["wD"]


def test_config_validation():
    with pytest.raises(ValueError):
        F.ProgressiveConfig(resolutions=(2, 1))
    with pytest.raises(ValueError):
        F.ProgressiveConfig(threshold=float("inf"))
    cfg = F.ProgressiveConfig(seed=3)
    assert F.ProgressiveConfig.from_dict(F.config_dict(cfg)) == cfg


def test_fd_vjp_linear():
    rng = np.random.default_rng(0)
    W, z, v = rng.normal(size=(2, 3)), rng.normal(size=3), rng.normal(size=2)
    assert np.allclose(F.fd_vjp(lambda w: w @ z, W, v), np.outer(v, z), atol=1e-6)
