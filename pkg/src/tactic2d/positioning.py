"""Unmark positioning: ring candidates around the unmarker, validated by pass
simulation from the passer, best point by distance to the opponent goal.

Candidates sit on three rings of radius 2, 4 and 8 meters, eight points per
ring at 45-degree steps from the +x axis. A candidate is valid when the
unmarker, relocated there, would be the first to a pass aimed at it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .config import Config, DEFAULT_CONFIG
from .motion import (
    PackedState,
    PassSpec,
    cycles_to_reach,
    pack_state,
    packed_index,
    simulate_pass,
)
from .world import GameState, Side, Vec2, in_field

# cos/sin of k*45 degrees; axis entries are exact so axis points land exactly
_DIAG = math.sqrt(0.5)
_UNIT = [
    (1.0, 0.0), (_DIAG, _DIAG), (0.0, 1.0), (-_DIAG, _DIAG),
    (-1.0, 0.0), (-_DIAG, -_DIAG), (0.0, -1.0), (_DIAG, -_DIAG),
]


@dataclass(frozen=True, slots=True)
class CandidatePoint:
    point: Vec2
    ring_radius: float
    angle_index: int
    valid: bool
    score: float


def generate_candidates(unmarker_pos: Vec2, config: Config = DEFAULT_CONFIG) -> list[CandidatePoint]:
    """24 ring points around the position; out-of-field points are invalid.

    The score is the distance to the opponent goal center (lower is better).
    """
    goal = Vec2(*config.opp_goal)
    out: list[CandidatePoint] = []
    for radius in config.ring_radii:
        for k in range(config.ring_points):
            ux, uy = _UNIT[k % 8] if config.ring_points == 8 else (
                math.cos(2.0 * math.pi * k / config.ring_points),
                math.sin(2.0 * math.pi * k / config.ring_points),
            )
            point = Vec2(unmarker_pos.x + radius * ux, unmarker_pos.y + radius * uy)
            out.append(CandidatePoint(
                point=point,
                ring_radius=radius,
                angle_index=k,
                valid=in_field(point, config),
                score=point.dist(goal),
            ))
    return out


def validate_candidate(
    state: GameState,
    passer: int,
    unmarker: int,
    point: Vec2,
    config: Config = DEFAULT_CONFIG,
    packed: Optional[PackedState] = None,
) -> bool:
    """True iff the relocated unmarker is first to a pass from the passer to `point`."""
    if passer == unmarker:
        raise ValueError("passer and unmarker must differ")
    if not in_field(point, config):
        return False
    start = state.teammate(passer).pos
    if start.dist(point) <= 1e-9:
        return False
    if packed is None:
        packed = pack_state(state)
    idx = packed_index(Side.TEAMMATE, unmarker)
    old = packed.move(idx, point)
    try:
        hypothetical = GameState(
            cycle=state.cycle,
            ball=state.ball,
            teammates=state.teammates,
            opponents=state.opponents,
            ball_owner=passer,
        )
        res = simulate_pass(hypothetical, PassSpec(start, point, config.pass_speed),
                            receiver_hint=unmarker, config=config, packed=packed)
    finally:
        packed.restore(idx, old)
    if not (res.intercepted and res.side is Side.TEAMMATE and res.unum == unmarker):
        return False
    # "before the opponents" is strict: an opponent tying at the reception
    # point (e.g. standing on it) kills the candidate
    return all(cycles_to_reach(o, res.point, config) > res.cycle
               for o in state.opponents)


def evaluate_candidates(
    state: GameState,
    passer: int,
    unmarker: int,
    config: Config = DEFAULT_CONFIG,
) -> list[CandidatePoint]:
    """The 24 candidates with validity refined by pass simulation."""
    packed = pack_state(state)
    unmarker_pos = state.teammate(unmarker).pos
    refined = []
    for cand in generate_candidates(unmarker_pos, config):
        valid = cand.valid and validate_candidate(
            state, passer, unmarker, cand.point, config, packed)
        score = cand.score
        if config.position_objective == "opponent":
            score = min(cand.point.dist(o.pos) for o in state.opponents)
        refined.append(CandidatePoint(cand.point, cand.ring_radius, cand.angle_index,
                                      valid, score))
    return refined


def choose_position(
    state: GameState,
    passer: int,
    unmarker: int,
    config: Config = DEFAULT_CONFIG,
) -> Optional[Vec2]:
    """Best valid candidate: minimal score, ties to the smaller ring then
    lower angle index; None when nothing validates (the caller holds position)."""
    best: Optional[CandidatePoint] = None
    for cand in evaluate_candidates(state, passer, unmarker, config):
        if not cand.valid:
            continue
        if best is None or (cand.score, cand.ring_radius, cand.angle_index) < \
                (best.score, best.ring_radius, best.angle_index):
            best = cand
    return best.point if best is not None else None
