import dataclasses
import json
import math

import numpy as np
import pytest

from conftest import OPP_SPOTS, TEAM_SPOTS, make_state, random_state
from tactic2d.config import DEFAULT_CONFIG
from tactic2d.decisioning import (
    NoPossession,
    SelfOwner,
    build_root,
    decide_unmark,
    grow_tree,
    select_passer,
)
from tactic2d.motion import intercept_free_ball
from tactic2d.predictor import HeuristicPredictor, TabulatedPredictor
from tactic2d.world import BallState, GameState, Side, Vec2

CFG = DEFAULT_CONFIG


# --- independent exhaustive best-first oracle ---------------------------------
#
# Re-derives the tree from a probability table alone: plain-list candidate
# bookkeeping, max() scans instead of a heap, top-2 selection recomputed from
# scratch. Node identity is (owner, parent, edge, path); outcome states are
# not part of the contract checked here.


def oracle_grow(table, root_owner, budget):
    nodes = [{"id": 0, "owner": root_owner, "parent": None, "edge": 1.0, "path": 1.0}]
    ignored = {root_owner}
    candidates = []  # (priority, insertion, receiver, edge_value, parent_id), live only
    insertion = 0
    current = nodes[0]
    while len(nodes) < budget:
        probs = table[current["owner"]]
        eligible = [u for u in range(1, 12) if u not in ignored]
        eligible.sort(key=lambda u: (-probs[u - 1], u))
        for receiver in eligible[:2]:
            candidates.append((current["path"] * probs[receiver - 1], insertion,
                               receiver, probs[receiver - 1], current["id"]))
            insertion += 1
        live = [c for c in candidates if c[2] not in ignored]
        if not live:
            break
        best = max(live, key=lambda c: (c[0], -c[1], -c[2]))
        candidates.remove(best)
        parent = nodes[best[4]]
        node = {"id": len(nodes), "owner": best[2], "parent": best[4],
                "edge": best[3], "path": parent["path"] * best[3]}
        nodes.append(node)
        ignored.add(best[2])
        current = node
    return nodes


def tree_signature(tree):
    return [(n.ball_owner, n.parent, n.edge_value, n.path_value) for n in tree.nodes]


def oracle_signature(nodes):
    return [(n["owner"], n["parent"], n["edge"], n["path"]) for n in nodes]


def random_table(rng, participants=None):
    table = {}
    for owner in range(1, 12):
        probs = rng.random(11)
        probs[owner - 1] = 0.0
        if participants is not None:
            mask = np.zeros(11)
            for u in participants:
                mask[u - 1] = 1.0
            probs = probs * mask
        total = probs.sum()
        if total > 0:
            probs = probs / total * rng.uniform(0.4, 1.0)
        table[owner] = probs
    return table


def rooted_state():
    spots = list(TEAM_SPOTS)
    spots[8] = (0.0, 0.0)  # unum 9 on the ball
    return make_state(ball=(0.0, 0.0), team_spots=spots, owner=9)


# --- build_root ----------------------------------------------------------------


def test_root_from_kickable_owner():
    state = rooted_state()
    root = build_root(state, unmarker=10)
    assert root.ball_owner == 9
    assert root.state == state
    assert root.parent is None and root.path_value == 1.0


def test_root_reassigns_owner_to_kickable_teammate():
    spots = list(TEAM_SPOTS)
    spots[6] = (0.0, 0.0)  # unum 7 can kick, but recorded owner is 2
    state = make_state(ball=(0.0, 0.0), team_spots=spots, owner=2)
    root = build_root(state, unmarker=10)
    assert root.ball_owner == 7


def test_root_fast_forwards_rolling_ball():
    spots = [(-40.0, 25.0 - 5 * i) for i in range(11)]
    spots[6] = (10.0, 0.0)  # unum 7 in the ball path
    opp = [(45.0, 25.0 - 5 * i) for i in range(11)]
    state = make_state(ball=(0.0, 0.0), ball_vel=(2.0, 0.0),
                       team_spots=spots, opp_spots=opp, owner=None)
    prediction = intercept_free_ball(state)
    root = build_root(state, unmarker=10)
    assert prediction.intercepted and prediction.side is Side.TEAMMATE
    assert root.ball_owner == prediction.unum == 7
    assert root.state.cycle == state.cycle + prediction.cycle
    assert root.state.ball.pos == prediction.point


def test_root_opponent_interception_raises():
    spots = [(-40.0, 25.0 - 5 * i) for i in range(11)]
    opp = [(45.0, 25.0 - 5 * i) for i in range(11)]
    opp[3] = (10.0, 0.0)  # opponent 4 in the path
    state = make_state(ball=(0.0, 0.0), ball_vel=(2.0, 0.0),
                       team_spots=spots, opp_spots=opp, owner=None)
    with pytest.raises(NoPossession):
        build_root(state, unmarker=10)


# --- grow_tree -----------------------------------------------------------------


def test_empty_predictor_leaves_root_only():
    state = rooted_state()
    root = build_root(state, 10)
    tree, leftovers = grow_tree(root, TabulatedPredictor({u: np.zeros(11) for u in range(1, 12)}),
                                10, node_budget=1)
    assert len(tree.nodes) == 1 and leftovers == []


def test_toy_tree_matches_hand_best_first():
    # P(9->7)=0.6, P(9->11)=0.4, P(7->11)=0.9, P(7->5)=0.1; budget 3.
    table = {u: np.zeros(11) for u in range(1, 12)}
    table[9][7 - 1] = 0.6
    table[9][11 - 1] = 0.4
    table[7][11 - 1] = 0.9
    table[7][5 - 1] = 0.1
    state = rooted_state()
    root = build_root(state, 10)
    tree, _ = grow_tree(root, TabulatedPredictor(table), 10, node_budget=3)
    assert tree_signature(tree) == oracle_signature(oracle_grow(table, 9, 3))
    owners = [n.ball_owner for n in tree.nodes]
    # best-first: 9 expands to 7 (0.6); then 7->11 has priority 0.54 > 0.4
    assert owners == [9, 7, 11]
    assert tree.nodes[2].parent == 1


def test_budget_and_uniqueness_random_full(rng):
    pred = HeuristicPredictor()
    for _ in range(60):
        state = random_state(rng, kickable_owner=True)
        root = build_root(state, 10)
        tree, leftovers = grow_tree(root, pred, 10, node_budget=10)
        owners = [n.ball_owner for n in tree.nodes]
        assert len(tree.nodes) <= 10
        assert len(set(owners)) == len(owners)
        if leftovers:
            assert len(tree.nodes) == 10
        for node in tree.nodes[1:]:
            parent = tree.nodes[node.parent]
            assert node.path_value == parent.path_value * node.edge_value


def test_oracle_equivalence_small_instances(rng):
    state = rooted_state()
    for _ in range(200):
        participants = [9] + sorted(
            int(u) for u in rng.choice([u for u in range(1, 12) if u != 9],
                                       size=4, replace=False))
        table = random_table(rng, participants)
        budget = int(rng.integers(2, 11))
        root = build_root(state, 10)
        tree, _ = grow_tree(root, TabulatedPredictor(table), 10, node_budget=budget)
        expected = oracle_grow(table, 9, budget)
        assert tree_signature(tree) == oracle_signature(expected)
        assert list(tree.expansion_order) == [n["id"] for n in expected]


def test_popped_priorities_monotone(rng):
    # with edge values <= 1 the expanded path values never increase
    state = rooted_state()
    for _ in range(50):
        table = random_table(rng)
        root = build_root(state, 10)
        tree, _ = grow_tree(root, TabulatedPredictor(table), 10, node_budget=10)
        popped = [n.path_value for n in tree.nodes[1:]]
        assert all(a >= b - 1e-15 for a, b in zip(popped, popped[1:]))


def test_probability_scaling_preserves_expansion_order(rng):
    state = rooted_state()
    for _ in range(30):
        table = random_table(rng)
        lam = float(rng.uniform(0.1, 1.0))
        scaled = {k: v * lam for k, v in table.items()}
        root = build_root(state, 10)
        t1, _ = grow_tree(root, TabulatedPredictor(table), 10, node_budget=10)
        t2, _ = grow_tree(root, TabulatedPredictor(scaled), 10, node_budget=10)
        assert [n.ball_owner for n in t1.nodes] == [n.ball_owner for n in t2.nodes]
        assert [n.parent for n in t1.nodes] == [n.parent for n in t2.nodes]


def test_ignored_players_equal_owner_set(rng):
    pred = HeuristicPredictor()
    state = random_state(rng, kickable_owner=True)
    root = build_root(state, 10)
    tree, leftovers = grow_tree(root, pred, 10, node_budget=10)
    owners = tree.owners()
    for _, psv, _ in leftovers:
        assert psv.receiver not in owners


# --- select_passer -------------------------------------------------------------


def test_passer_is_parent_owner(rng):
    state = rooted_state()
    table = {u: np.zeros(11) for u in range(1, 12)}
    table[9][5 - 1] = 0.8
    table[5][10 - 1] = 0.9
    root = build_root(state, 10)
    tree, _ = grow_tree(root, TabulatedPredictor(table), 10, node_budget=3)
    decision = select_passer(tree, 10)
    assert decision.found_in_tree
    assert decision.passer == 5
    assert decision.root_state == root.state


def test_absent_unmarker_falls_back_to_hardcoded():
    from tactic2d.strategies import hardcoded_passer

    state = rooted_state()
    root = build_root(state, 10)
    tree, _ = grow_tree(root, TabulatedPredictor({u: np.zeros(11) for u in range(1, 12)}),
                        10, node_budget=1)
    decision = select_passer(tree, 10)
    assert not decision.found_in_tree
    assert decision.passer == hardcoded_passer(root.state, 10)


def test_unmarker_owning_root_raises():
    state = rooted_state()
    root = build_root(state, 9)
    tree, _ = grow_tree(root, HeuristicPredictor(), 9, node_budget=2)
    with pytest.raises(SelfOwner):
        select_passer(tree, 9)


def test_tree_json_dump(rng):
    state = random_state(rng, kickable_owner=True)
    decision, tree = decide_unmark(state, unmarker=next(
        u for u in range(1, 12) if u != state.ball_owner), predictor=HeuristicPredictor())
    doc = json.loads(tree.to_json())
    assert set(doc) == {"nodes", "expansion_order"}
    assert doc["nodes"][0]["parent"] is None
    assert doc["expansion_order"] == [n["id"] for n in doc["nodes"]]
