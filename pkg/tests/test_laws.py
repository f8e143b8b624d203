import pytest

from polytree import laws
from polytree import poly as P


@pytest.mark.parametrize("name", list(laws.SUITES))
def test_suite_passes_at_depth_three(name):
    res = laws.run_suite(name, 3)
    assert res.status == "pass", res.detail
    assert res.cases > 0


def test_depth_zero():
    assert all(r.status == "pass" for r in laws.run_suites(0))


def _mutant_braid(p, q):
    """Swaps positions but forgets to swap directions."""
    good = _original_braid(p, q)
    rows = tuple(tuple(range(len(r))) for r in good.on_dir)
    return P.PolyMap(good.source, good.target, good.on_pos, rows)


_original_braid = P.braid_map


def test_hexagon_catches_a_broken_braid(monkeypatch):
    monkeypatch.setattr(P, "braid_map", _mutant_braid)
    res = laws.run_suite("hexagon", 2)
    assert res.status == "fail"


def test_budget_is_reported_as_skip(monkeypatch):
    monkeypatch.setenv("POLYTREE_BUDGET", "1")
    assert laws.run_suite("poly-counts", 1).status == "skip"


def test_minimax_oracle():
    assert [laws.minimax_first_player_wins(h, (1, 2)) for h in range(7)] == [
        False, True, True, False, True, True, False,
    ]
