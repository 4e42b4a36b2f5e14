"""Unmark decisioning: grow a best-first pass tree from the possession state
and pick the unmarker's expected passer.

Each node holds a hypothetical state in which one teammate owns the ball;
edges are predicted passes. A player may own the ball in at most one node
(the Ignored Players rule), and growth stops at the node budget or when the
candidate list runs dry. Candidates are ranked by the product of pass
probabilities along their path from the root.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from typing import Optional

from .config import Config, DEFAULT_CONFIG
from .motion import fast_forward, intercept_free_ball
from .predictor import PassStateValue, predict_targets
from .world import GameState, Side, kickable


class NoPossession(Exception):
    """The ball is not (and will not be) in our control; unmarking is moot."""


class SelfOwner(Exception):
    """The unmarker already owns the ball at the root; it passes, not unmarks."""


@dataclass(frozen=True, slots=True)
class TreeNode:
    id: int
    state: GameState
    ball_owner: int
    parent: Optional[int]
    edge_value: float
    path_value: float


@dataclass(frozen=True)
class DecisionTree:
    nodes: tuple[TreeNode, ...]
    expansion_order: tuple[int, ...]

    def node_by_owner(self, unum: int) -> Optional[TreeNode]:
        for node in self.nodes:
            if node.ball_owner == unum:
                return node
        return None

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def owners(self) -> set[int]:
        return {n.ball_owner for n in self.nodes}

    def to_json(self) -> str:
        doc = {
            "nodes": [
                {
                    "id": n.id,
                    "owner": n.ball_owner,
                    "parent": n.parent,
                    "edge_value": n.edge_value,
                    "path_value": n.path_value,
                }
                for n in self.nodes
            ],
            "expansion_order": list(self.expansion_order),
        }
        return json.dumps(doc, indent=2)


@dataclass(frozen=True, slots=True)
class UnmarkDecision:
    passer: int
    found_in_tree: bool
    root_state: GameState


def build_root(state: GameState, unmarker: int, config: Config = DEFAULT_CONFIG) -> TreeNode:
    """Root of the pass tree: the current state if a teammate can kick now,
    otherwise the predicted reception state of the rolling ball.

    Raises NoPossession when an opponent gets the ball first (or nobody does).
    """
    owner = None
    if state.ball_owner is not None and kickable(state, state.ball_owner, config):
        owner = state.ball_owner
    else:
        for p in state.teammates:
            if kickable(state, p.unum, config):
                owner = p.unum
                break
    if owner is not None:
        root_state = state if state.ball_owner == owner else \
            GameState(state.cycle, state.ball, state.teammates, state.opponents, ball_owner=owner)
        return TreeNode(id=0, state=root_state, ball_owner=owner, parent=None,
                        edge_value=1.0, path_value=1.0)

    res = intercept_free_ball(state, config)
    if not res.intercepted or res.side is not Side.TEAMMATE:
        raise NoPossession("ball is not reachable by any teammate first")
    future = fast_forward(state, res, config)
    return TreeNode(id=0, state=future, ball_owner=res.unum, parent=None,
                    edge_value=1.0, path_value=1.0)


def grow_tree(
    root: TreeNode,
    predictor,
    unmarker: int,
    node_budget: int = 10,
    config: Config = DEFAULT_CONFIG,
) -> tuple[DecisionTree, list[tuple[float, PassStateValue, int]]]:
    """Best-first growth to at most `node_budget` nodes.

    Each materialized node contributes up to two candidate passes; the best
    pending candidate (priority = parent path value x edge probability, ties
    to earlier insertion then lower receiver unum) whose receiver is not yet
    a ball owner becomes the next node. Returns the tree and the leftover
    candidate list as (priority, pass, parent_id) tuples, best first.
    """
    nodes: list[TreeNode] = [root]
    ignored: set[int] = set()
    heap: list[tuple[float, int, int, PassStateValue, int]] = []
    counter = 0
    current = root
    while True:
        ignored.add(current.ball_owner)
        if len(nodes) >= node_budget:
            break
        for psv in predict_targets(predictor, current.state, ignored, config):
            if config.tree_priority == "edge":
                priority = psv.value
            else:
                priority = current.path_value * psv.value
            heapq.heappush(heap, (-priority, counter, psv.receiver, psv, current.id))
            counter += 1
        chosen = None
        while heap:
            neg_priority, _, _, psv, parent_id = heapq.heappop(heap)
            if psv.receiver not in ignored:
                chosen = (psv, parent_id)
                break
        if chosen is None:
            break
        psv, parent_id = chosen
        parent = nodes[parent_id]
        node = TreeNode(
            id=len(nodes),
            state=psv.outcome,
            ball_owner=psv.receiver,
            parent=parent_id,
            edge_value=psv.value,
            path_value=parent.path_value * psv.value,
        )
        nodes.append(node)
        current = node
    leftovers = [(-neg, psv, parent_id) for neg, _, _, psv, parent_id in sorted(heap)
                 if psv.receiver not in ignored]
    tree = DecisionTree(tuple(nodes), tuple(n.id for n in nodes))
    return tree, leftovers


def select_passer(tree: DecisionTree, unmarker: int,
                  config: Config = DEFAULT_CONFIG) -> UnmarkDecision:
    """The unmarker's expected passer: the parent of its node in the tree.

    Falls back to the hard-coded passer rule when the unmarker never made it
    into the tree. Raises SelfOwner when the unmarker owns the root.
    """
    root = tree.node(0)
    if root.ball_owner == unmarker:
        raise SelfOwner(f"unmarker {unmarker} owns the ball at the root")
    node = tree.node_by_owner(unmarker)
    if node is not None:
        parent = tree.node(node.parent)
        return UnmarkDecision(passer=parent.ball_owner, found_in_tree=True,
                              root_state=root.state)
    from .strategies import hardcoded_passer

    passer = hardcoded_passer(root.state, unmarker, config)
    return UnmarkDecision(passer=passer, found_in_tree=False, root_state=root.state)


def decide_unmark(state: GameState, unmarker: int, predictor,
                  config: Config = DEFAULT_CONFIG) -> tuple[UnmarkDecision, DecisionTree]:
    """Full decisioning pipeline: root, growth, passer selection."""
    root = build_root(state, unmarker, config)
    tree, _ = grow_tree(root, predictor, unmarker, config.node_budget, config)
    return select_passer(tree, unmarker, config), tree
