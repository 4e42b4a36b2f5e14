"""Kinematic pass simulation: ball travel, player interception, state transport.

The ball follows a straight line with geometric speed decay; a pass is
considered at rest once it has covered the start-to-target distance, and a
resting ball waits to be picked up. Players are point agents that run at
max speed toward a point after a fixed reaction delay and control the ball
within the kickable margin.
"""
from __future__ import annotations

import dataclasses
import math
from array import array
from dataclasses import dataclass
from typing import Optional

from ..config import Config, DEFAULT_CONFIG
from ..world import BallState, GameState, Side, Vec2
from ._dispatch import kernel


@dataclass(frozen=True, slots=True)
class PassSpec:
    start: Vec2
    target: Vec2
    speed: float = 2.5


@dataclass(frozen=True, slots=True)
class InterceptResult:
    intercepted: bool
    side: Optional[Side]
    unum: Optional[int]
    cycle: int
    point: Optional[Vec2]


class PackedState:
    """Player coordinates flattened for the kernel.

    Teammates occupy indices 0..10 (unum order) and opponents 11..21, so a
    linear scan implements the teammate-beats-opponent, lower-unum-first
    tie-break.
    """

    __slots__ = ("px", "py", "pmax", "n")

    def __init__(self, px: array, py: array, pmax: array):
        self.px = px
        self.py = py
        self.pmax = pmax
        self.n = len(px)

    def move(self, index: int, point: Vec2) -> tuple[float, float]:
        """Relocate one player, returning the previous coordinates."""
        old = (self.px[index], self.py[index])
        self.px[index] = point.x
        self.py[index] = point.y
        return old

    def restore(self, index: int, old: tuple[float, float]) -> None:
        self.px[index], self.py[index] = old


def packed_index(side: Side, unum: int) -> int:
    return unum - 1 if side is Side.TEAMMATE else 11 + unum - 1


def pack_state(state: GameState) -> PackedState:
    px = array("d", bytes(8 * 22))
    py = array("d", bytes(8 * 22))
    pmax = array("d", bytes(8 * 22))
    for p in state.players():
        i = packed_index(p.side, p.unum)
        px[i] = p.pos.x
        py[i] = p.pos.y
        pmax[i] = p.max_speed
    return PackedState(px, py, pmax)


def _check_spec(spec: PassSpec, config: Config) -> None:
    if not (spec.start.is_finite() and spec.target.is_finite() and math.isfinite(spec.speed)):
        raise ValueError("pass spec must be finite")
    if not 0.0 < spec.speed <= config.ball_max_speed:
        raise ValueError(f"pass speed must be in (0, {config.ball_max_speed}], got {spec.speed}")
    if spec.start == spec.target:
        raise ValueError("pass start and target must differ")


def ball_trajectory(spec: PassSpec, horizon: int, config: Config = DEFAULT_CONFIG) -> list[Vec2]:
    """Ball positions after 1..k cycles; the position after 0 cycles is the start.

    Displacement after k cycles is speed * (1 - decay^k) / (1 - decay) along
    the start->target direction. The list ends with the first point at or
    past the target; a point that leaves the field is not included.
    """
    _check_spec(spec, config)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    dist = spec.start.dist(spec.target)
    dx = (spec.target.x - spec.start.x) / dist
    dy = (spec.target.y - spec.start.y) / dist
    points: list[Vec2] = []
    dk = 1.0
    one_minus = 1.0 - config.ball_decay
    for _ in range(horizon):
        dk *= config.ball_decay
        disp = spec.speed * (1.0 - dk) / one_minus
        p = Vec2(spec.start.x + dx * disp, spec.start.y + dy * disp)
        if not (abs(p.x) <= config.half_length and abs(p.y) <= config.half_width):
            break
        points.append(p)
        if disp >= dist:
            break
    return points


def cycles_to_reach(player, point: Vec2, config: Config = DEFAULT_CONFIG) -> int:
    """Cycles for a player to control the ball at `point`.

    ceil(max(0, distance - kickable_margin) / max_speed) + reaction_delay.
    """
    ddx = player.pos.x - point.x
    ddy = player.pos.y - point.y
    reach = math.sqrt(ddx * ddx + ddy * ddy) - config.kickable_margin
    if reach <= 0.0:
        return config.reaction_delay
    return int(math.ceil(reach / player.max_speed)) + config.reaction_delay


def _result_from_kernel(raw) -> InterceptResult:
    status, idx, cycle, bx, by = raw
    if status == 0:
        return InterceptResult(False, None, None, cycle, None)
    if idx < 11:
        side, unum = Side.TEAMMATE, idx + 1
    else:
        side, unum = Side.OPPONENT, idx - 11 + 1
    return InterceptResult(True, side, unum, cycle, Vec2(bx, by))


def simulate_pass(
    state: GameState,
    spec: PassSpec,
    receiver_hint: Optional[int] = None,
    config: Config = DEFAULT_CONFIG,
    packed: Optional[PackedState] = None,
) -> InterceptResult:
    """Who controls a kicked pass first. The kicker (ball owner) never intercepts.

    Ties at the same cycle go to teammates over opponents, then lower unum.
    Not intercepted when the ball leaves the field or the horizon expires.
    `receiver_hint` names the intended receiver; it does not bias the outcome.
    """
    _check_spec(spec, config)
    if packed is None:
        packed = pack_state(state)
    exclude = -1 if state.ball_owner is None else state.ball_owner - 1
    dist = spec.start.dist(spec.target)
    dx = (spec.target.x - spec.start.x) / dist
    dy = (spec.target.y - spec.start.y) / dist
    raw = kernel.intercept_first(
        spec.start.x, spec.start.y, dx, dy, spec.speed,
        config.ball_decay, dist, config.half_length, config.half_width,
        config.horizon, packed.px, packed.py, packed.pmax, packed.n,
        exclude, config.kickable_margin, config.reaction_delay,
    )
    return _result_from_kernel(raw)


def intercept_free_ball(state: GameState, config: Config = DEFAULT_CONFIG,
                        packed: Optional[PackedState] = None) -> InterceptResult:
    """First player to reach a rolling (or resting) ball; nobody is excluded."""
    if packed is None:
        packed = pack_state(state)
    speed = state.ball.vel.norm()
    if speed > 0.0:
        dx = state.ball.vel.x / speed
        dy = state.ball.vel.y / speed
    else:
        dx, dy = 1.0, 0.0
    raw = kernel.intercept_first(
        state.ball.pos.x, state.ball.pos.y, dx, dy, speed,
        config.ball_decay, math.inf, config.half_length, config.half_width,
        config.horizon, packed.px, packed.py, packed.pmax, packed.n,
        -1, config.kickable_margin, config.reaction_delay,
    )
    return _result_from_kernel(raw)


def receiver_interception(
    state: GameState,
    spec: PassSpec,
    receiver: int,
    config: Config = DEFAULT_CONFIG,
) -> InterceptResult:
    """Where/when the named teammate alone would collect the pass.

    Used to build hypothetical successor states where the intended receiver
    is assumed to get the ball regardless of opposition. Falls back to the
    trajectory end point (the receiver jogging to the dead ball) when the
    horizon is too short.
    """
    _check_spec(spec, config)
    player = state.teammate(receiver)
    px = array("d", (player.pos.x,))
    py = array("d", (player.pos.y,))
    pmax = array("d", (player.max_speed,))
    dist = spec.start.dist(spec.target)
    dx = (spec.target.x - spec.start.x) / dist
    dy = (spec.target.y - spec.start.y) / dist
    raw = kernel.intercept_first(
        spec.start.x, spec.start.y, dx, dy, spec.speed,
        config.ball_decay, dist, config.half_length, config.half_width,
        config.horizon, px, py, pmax, 1,
        -1, config.kickable_margin, config.reaction_delay,
    )
    status, _, cycle, bx, by = raw
    if status == 1:
        return InterceptResult(True, Side.TEAMMATE, receiver, cycle, Vec2(bx, by))
    # ball left the field or the receiver is too far: meet it where it stopped
    point = Vec2(bx, by)
    if not (abs(bx) <= config.half_length and abs(by) <= config.half_width):
        traj = ball_trajectory(spec, config.horizon, config)
        point = traj[-1] if traj else spec.start
    cycle = max(cycle, cycles_to_reach(player, point, config))
    return InterceptResult(True, Side.TEAMMATE, receiver, cycle, point)


def fast_forward(state: GameState, result: InterceptResult,
                 config: Config = DEFAULT_CONFIG) -> GameState:
    """Advance the state to the moment of interception.

    The ball rests at the interception point, the receiver stands there with
    zero velocity, everyone else is unchanged; the receiver becomes ball
    owner when they are a teammate.
    """
    if not result.intercepted:
        raise ValueError("cannot fast-forward an unintercepted ball")
    assert result.point is not None and result.unum is not None

    def transport(p):
        return dataclasses.replace(p, pos=result.point, vel=Vec2(0.0, 0.0))

    teammates = state.teammates
    opponents = state.opponents
    owner = None
    if result.side is Side.TEAMMATE:
        teammates = tuple(transport(p) if p.unum == result.unum else p for p in teammates)
        owner = result.unum
    else:
        opponents = tuple(transport(p) if p.unum == result.unum else p for p in opponents)
    return GameState(
        cycle=state.cycle + result.cycle,
        ball=BallState(result.point, Vec2(0.0, 0.0)),
        teammates=teammates,
        opponents=opponents,
        ball_owner=owner,
    )
