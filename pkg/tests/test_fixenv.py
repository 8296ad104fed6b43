import random

import numpy as np
import pytest

from cellgen.drc import check_drc
from cellgen.fixenv import (DrcFixEnv, action_mask, default_fix_budget,
                            greedy_fix, greedy_fix_grid)
from cellgen.ga import evolve
from cellgen.placement import initial_rep, realize_placement
from cellgen.tech import default_tech
from tests.conftest import grid_from_m1, merge_rows, random_m1_grid, seg


def aligned_gap_fixture(window=1):
    """Three stacked tracks, each [A A . . B B]; with an exclusive adjacency
    window of 1 the inferred cuts collide pairwise (2 markers) and a single
    extension on the middle track resolves both."""
    tech = default_tech().with_rules(min_cut_spacing=3, cut_adjacency_window=window)
    rows = merge_rows(
        seg(0, 0, 1, 1), seg(0, 4, 5, 2),
        seg(1, 0, 1, 3), seg(1, 4, 5, 4),
        seg(2, 0, 1, 5), seg(2, 4, 5, 6))
    g = grid_from_m1(rows, height=4, width=6, nets=6)
    return g, tech


def test_mask_empty_grid(tech):
    g = grid_from_m1({}, height=4, width=6)
    assert not action_mask(g).any()


def test_mask_extends_single_segment(tech):
    g = grid_from_m1(seg(2, 1, 2, 1), height=4, width=6)
    mask = action_mask(g)
    expected = np.zeros((4, 6), dtype=bool)
    expected[2, 0] = expected[2, 3] = True
    assert (mask == expected).all()


def test_mask_blocks_two_net_gap(tech):
    g = grid_from_m1(merge_rows(seg(0, 0, 1, 1), seg(0, 3, 4, 2)), height=4, width=5)
    mask = action_mask(g)
    assert not mask[0, 2]  # single gap cell between different nets


def test_reset_planes(tech):
    g, t = aligned_gap_fixture()
    env = DrcFixEnv(g, t)
    obs = env.reset()
    assert obs.shape == (3, 4, 6)
    assert set(np.unique(obs)) <= {0.0, 1.0}
    assert obs[0].sum() == 12  # twelve occupied cells
    assert obs[2].any()        # markers present
    assert env.drc_count == 2


def test_reset_two_markers_two_ones():
    g, t = aligned_gap_fixture()
    env = DrcFixEnv(g, t)
    obs = env.reset()
    assert env.drc_count == 2
    assert obs[2].sum() == 2.0  # exactly one cell per marker


def test_reset_clean_grid_has_empty_drc_plane(tech):
    g = grid_from_m1(seg(1, 0, 3, 1), height=4, width=6)
    env = DrcFixEnv(g, tech)
    obs = env.reset()
    assert obs[2].sum() == 0 and not env.done


def test_reset_empty_routing_plane0(tech):
    g = grid_from_m1({}, height=4, width=6)
    obs = DrcFixEnv(g, tech).reset()
    assert obs[0].sum() == 0


def test_step_reward_two_markers_fixed():
    g, tech = aligned_gap_fixture()
    env = DrcFixEnv(g, tech)
    env.reset()
    assert env.drc_count == 2
    # extend net 3 on the middle track into column 2
    res = env.step(1 * g.width + 2)
    assert res.info["drc_count"] == 0 and res.done
    assert res.reward == pytest.approx(-0.1 + 1.0 * 2)


def test_step_legal_noop_reward(tech):
    g = grid_from_m1(seg(1, 0, 3, 1), height=4, width=8)
    env = DrcFixEnv(g, tech)
    env.reset()
    before = env.drc_count
    assert before == 0
    res = env.step(1 * g.width + 4)  # legal extension, nothing to fix
    assert res.reward == pytest.approx(-0.1)
    assert res.done  # drc stayed at zero
    assert res.info["drc_count"] == 0


def test_step_illegal_terminates(tech):
    g, t = aligned_gap_fixture()
    env = DrcFixEnv(g, t)
    env.reset()
    res = env.step(3 * g.width + 0)  # empty row: no adjacent net
    assert res.done and res.info["illegal"]
    assert res.reward == pytest.approx(-0.1)
    with pytest.raises(RuntimeError):
        env.step(0)


def test_step_reward_decomposition_fuzz(tech):
    rng = random.Random(31)
    steps = 0
    while steps < 800:
        g = random_m1_grid(rng)
        env = DrcFixEnv(g, tech)
        obs = env.reset()
        while not env.done and steps < 800:
            prev = env.drc_count
            if rng.random() < 0.15:
                action = rng.randrange(g.height * g.width)
            else:
                legal = np.flatnonzero(obs[1].reshape(-1))
                if len(legal) == 0:
                    break
                action = int(legal[rng.randrange(len(legal))])
            res = env.step(action)
            steps += 1
            delta = (res.reward - tech.reward_step) / tech.reward_drc_coeff
            assert delta == int(delta)
            if res.info["illegal"]:
                assert res.reward == pytest.approx(tech.reward_step)
                assert res.done
            else:
                assert int(delta) == prev - res.info["drc_count"]
                assert res.done == (res.info["drc_count"] == 0)
            obs = res.obs


def test_env_deterministic(tech):
    g, t = aligned_gap_fixture(window=2)
    actions = []
    envs = [DrcFixEnv(g, t), DrcFixEnv(g, t)]
    rng = random.Random(5)
    obs = [e.reset() for e in envs]
    assert (obs[0] == obs[1]).all()
    for _ in range(6):
        legal = np.flatnonzero(obs[0][1].reshape(-1))
        if not len(legal) or envs[0].done:
            break
        a = int(legal[rng.randrange(len(legal))])
        r0, r1 = envs[0].step(a), envs[1].step(a)
        assert (r0.obs == r1.obs).all() and r0.reward == r1.reward
        assert r0.done == r1.done
        obs = [r0.obs, r1.obs]


def test_greedy_fixes_aligned_gaps():
    g, tech = aligned_gap_fixture()
    additions, remaining = greedy_fix_grid(g, tech, default_fix_budget(g))
    assert remaining == 0
    assert len(additions) <= 3


def test_greedy_clean_input_untouched(tech):
    g = grid_from_m1(seg(1, 0, 3, 1), height=4, width=6)
    additions, remaining = greedy_fix_grid(g, tech, 16)
    assert additions == [] and remaining == 0


def test_greedy_unfixable_short_terminates():
    tech = default_tech().with_rules(min_segment_len=1)
    g = grid_from_m1(merge_rows(seg(0, 0, 1, 1), seg(0, 2, 3, 2)), height=4, width=4)
    additions, remaining = greedy_fix_grid(g, tech, 64)
    assert remaining >= 1


def test_greedy_never_increases_drc(tech):
    rng = random.Random(17)
    for _ in range(20):
        g = random_m1_grid(rng, height=6, width=12)
        start = len(check_drc(g.copy(), tech))
        additions, remaining = greedy_fix_grid(g, tech, 40)
        assert remaining <= start
        # replay: count is non-increasing after every addition
        work = g.copy()
        prev = start
        for net, t, c in additions:
            work.layers["M1"][t, c] = net
            now = len(check_drc(work, tech))
            assert now <= prev
            prev = now


def test_greedy_fix_solution_wrapper(tech):
    from cellgen.library import load_hand_cell
    nl = load_hand_cell("nand2")
    realized = realize_placement(initial_rep(nl), nl, tech)
    result = evolve(nl, realized, 3, 4, "fix-wrap", tech, fixer="none")
    sol, remaining = greedy_fix(result.best, tech)
    assert remaining == len(check_drc(sol.overlay(), tech))


def test_observation_planes_stay_binary(tech):
    g, t = aligned_gap_fixture(window=2)
    env = DrcFixEnv(g, t)
    obs = env.reset()
    rng = random.Random(2)
    for _ in range(10):
        if env.done:
            break
        legal = np.flatnonzero(obs[1].reshape(-1))
        if not len(legal):
            break
        obs = env.step(int(legal[0])).obs
        assert obs.shape == (3, g.height, g.width)
        assert set(np.unique(obs)) <= {0.0, 1.0}
