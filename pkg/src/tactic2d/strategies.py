"""The three unmarking strategies behind one interface, plus chain composition.

Pass-prediction unmarking runs the decision tree and ring positioning;
hard-coded unmarking picks the ball owner (when close) or the teammate
nearest the owner-unmarker line; Voronoi unmarking heads for open-space
vertices of the opponents' Voronoi diagram. Chains try strategies in fixed
order and return the first hit, matching versions V1..V6.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .config import Config, DEFAULT_CONFIG
from .decisioning import NoPossession, SelfOwner, decide_unmark
from .extractor import point_segment_distance
from .positioning import choose_position, validate_candidate
from .world import GameState, Vec2, in_field


class UnmarkStrategyKind(Enum):
    PASS_PREDICTION = "pass_prediction"
    HARD_CODED = "hard_coded"
    VORONOI = "voronoi"


# Table-1 version names -> enabled strategies, in fixed chain order
VERSION_CHAINS: dict[str, tuple[UnmarkStrategyKind, ...]] = {
    "V1": (UnmarkStrategyKind.PASS_PREDICTION,),
    "V2": (UnmarkStrategyKind.PASS_PREDICTION, UnmarkStrategyKind.VORONOI),
    "V3": (UnmarkStrategyKind.HARD_CODED, UnmarkStrategyKind.VORONOI),
    "V4": (UnmarkStrategyKind.HARD_CODED,),
    "V5": (UnmarkStrategyKind.VORONOI,),
    "V6": (),
}


def chain_for(version: str) -> tuple[UnmarkStrategyKind, ...]:
    try:
        return VERSION_CHAINS[version.upper()]
    except KeyError:
        raise ValueError(f"unknown strategy version {version!r}; expected V1..V6") from None


@dataclass(frozen=True)
class UnmarkResult:
    passer: int
    point: Vec2


@dataclass(frozen=True, slots=True)
class VoronoiDiagram:
    sites: tuple[Vec2, ...]
    vertices: tuple[Vec2, ...]


def unmark_pass_prediction(state: GameState, unmarker: int, predictor,
                           config: Config = DEFAULT_CONFIG) -> Optional[UnmarkResult]:
    """Decision tree for the passer, ring search for the point."""
    try:
        decision, _ = decide_unmark(state, unmarker, predictor, config)
    except (NoPossession, SelfOwner):
        return None
    point = choose_position(decision.root_state, decision.passer, unmarker, config)
    if point is None:
        return None
    return UnmarkResult(decision.passer, point)


def hardcoded_passer(state: GameState, unmarker: int, config: Config = DEFAULT_CONFIG) -> int:
    """Ball owner when within 20 m of the unmarker; otherwise the teammate
    closest to the owner-unmarker segment. Ties go to the lower unum."""
    if state.ball_owner is None:
        raise ValueError("state has no ball owner")
    owner = state.teammate(state.ball_owner)
    me = state.teammate(unmarker)
    if owner.unum == unmarker:
        raise ValueError("unmarker already owns the ball")
    if owner.pos.dist(me.pos) < 20.0:
        return owner.unum
    best_unum = -1
    best_dist = math.inf
    for p in state.teammates:
        if p.unum == unmarker or p.unum == owner.unum:
            continue
        d = point_segment_distance(p.pos, owner.pos, me.pos)
        if d < best_dist:
            best_dist = d
            best_unum = p.unum
    return best_unum


def unmark_hardcoded(state: GameState, unmarker: int,
                     config: Config = DEFAULT_CONFIG) -> Optional[UnmarkResult]:
    if state.ball_owner is None or state.ball_owner == unmarker:
        return None
    passer = hardcoded_passer(state, unmarker, config)
    point = choose_position(state, passer, unmarker, config)
    if point is None:
        return None
    return UnmarkResult(passer, point)


def voronoi_diagram(sites: list[Vec2], config: Config = DEFAULT_CONFIG) -> VoronoiDiagram:
    """Voronoi vertices by brute force over site triples.

    A triple's circumcenter is kept when no other site lies strictly inside
    its circumcircle (1e-9 slack) and it falls inside the field. Vertices
    within 1e-6 of one another collapse to the first; output is sorted by
    (x, y). Fewer than 3 non-collinear sites give no vertices.
    """
    kept: list[Vec2] = []
    n = len(sites)
    for i in range(n):
        a = sites[i]
        for j in range(i + 1, n):
            b = sites[j]
            for k in range(j + 1, n):
                c = sites[k]
                d = 2.0 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
                if abs(d) < 1e-9:
                    continue
                a2 = a.x * a.x + a.y * a.y
                b2 = b.x * b.x + b.y * b.y
                c2 = c.x * c.x + c.y * c.y
                ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d
                uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d
                center = Vec2(ux, uy)
                if not in_field(center, config):
                    continue
                radius = center.dist(a)
                empty = True
                for m in range(n):
                    if m in (i, j, k):
                        continue
                    if center.dist(sites[m]) < radius - 1e-9:
                        empty = False
                        break
                if not empty:
                    continue
                if all(center.dist(v) > 1e-6 for v in kept):
                    kept.append(center)
    kept.sort(key=lambda v: (v.x, v.y))
    return VoronoiDiagram(tuple(sites), tuple(kept))


def unmark_voronoi(state: GameState, unmarker: int,
                   config: Config = DEFAULT_CONFIG) -> Optional[UnmarkResult]:
    """Head for the most open nearby Voronoi vertex that a pass can reach.

    Passer is the ball owner; candidates are vertices within voronoi_radius
    of the unmarker; the valid vertex with the largest nearest-opponent
    distance wins (ties: closer to the opponent goal, then lexicographic).
    """
    if state.ball_owner is None or state.ball_owner == unmarker:
        return None
    passer = state.ball_owner
    me = state.teammate(unmarker)
    diagram = voronoi_diagram([o.pos for o in state.opponents], config)
    goal = Vec2(*config.opp_goal)
    best: Optional[tuple[float, float, float, float, Vec2]] = None
    for vertex in diagram.vertices:
        if vertex.dist(me.pos) > config.voronoi_radius:
            continue
        if not validate_candidate(state, passer, unmarker, vertex, config):
            continue
        clearance = min(vertex.dist(o.pos) for o in state.opponents)
        key = (-clearance, vertex.dist(goal), vertex.x, vertex.y, vertex)
        if best is None or key[:4] < best[:4]:
            best = key
    if best is None:
        return None
    return UnmarkResult(passer, best[4])


StrategyChain = tuple[UnmarkStrategyKind, ...]


def compose(
    chain: StrategyChain,
    state: GameState,
    unmarker: int,
    predictor=None,
    config: Config = DEFAULT_CONFIG,
    on_invoke: Optional[Callable[[UnmarkStrategyKind], None]] = None,
) -> Optional[UnmarkResult]:
    """Run strategies in chain order, returning the first hit.

    `on_invoke` fires before each strategy actually runs, for tests and
    instrumentation. An empty chain (version V6) always returns None.
    """
    for kind in chain:
        if on_invoke is not None:
            on_invoke(kind)
        if kind is UnmarkStrategyKind.PASS_PREDICTION:
            if predictor is None:
                raise ValueError("pass-prediction strategy needs a predictor")
            result = unmark_pass_prediction(state, unmarker, predictor, config)
        elif kind is UnmarkStrategyKind.HARD_CODED:
            result = unmark_hardcoded(state, unmarker, config)
        else:
            result = unmark_voronoi(state, unmarker, config)
        if result is not None:
            return result
    return None
