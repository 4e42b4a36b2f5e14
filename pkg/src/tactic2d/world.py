"""Domain model of the 2D soccer world: field, players, ball, game states.

All types are immutable values; transformations return new objects. The
canonical frame has our team attacking toward +x, so the opponent goal is
at (+field_length/2, 0).
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional

from .config import Config, DEFAULT_CONFIG


class Side(Enum):
    TEAMMATE = "teammate"
    OPPONENT = "opponent"


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def mirrored(self) -> "Vec2":
        return Vec2(self.x, -self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True, slots=True)
class FieldSpec:
    length: float = 105.0
    width: float = 68.0

    @property
    def our_goal(self) -> Vec2:
        return Vec2(-self.length / 2.0, 0.0)

    @property
    def opp_goal(self) -> Vec2:
        return Vec2(self.length / 2.0, 0.0)

    @classmethod
    def from_config(cls, config: Config) -> "FieldSpec":
        return cls(config.field_length, config.field_width)


@dataclass(frozen=True, slots=True)
class PlayerState:
    side: Side
    unum: int
    pos: Vec2
    vel: Vec2
    max_speed: float = 1.05


@dataclass(frozen=True, slots=True)
class BallState:
    pos: Vec2
    vel: Vec2


@dataclass(frozen=True, slots=True)
class GameState:
    cycle: int
    ball: BallState
    teammates: tuple[PlayerState, ...]
    opponents: tuple[PlayerState, ...]
    ball_owner: Optional[int] = None

    def __post_init__(self):
        # normalize storage order to ascending unum so equality and
        # serialization are representation independent
        object.__setattr__(self, "teammates", tuple(sorted(self.teammates, key=lambda p: p.unum)))
        object.__setattr__(self, "opponents", tuple(sorted(self.opponents, key=lambda p: p.unum)))

    def teammate(self, unum: int) -> PlayerState:
        for p in self.teammates:
            if p.unum == unum:
                return p
        raise KeyError(f"no teammate with unum {unum}")

    def opponent(self, unum: int) -> PlayerState:
        for p in self.opponents:
            if p.unum == unum:
                return p
        raise KeyError(f"no opponent with unum {unum}")

    def players(self) -> Iterator[PlayerState]:
        yield from self.teammates
        yield from self.opponents

    def owner(self) -> PlayerState:
        if self.ball_owner is None:
            raise ValueError("state has no ball owner")
        return self.teammate(self.ball_owner)


ValidationReport = list


def validate(state: GameState, config: Config = DEFAULT_CONFIG) -> list[str]:
    """Return the list of violated invariants; empty iff the state is valid."""
    problems: list[str] = []
    if not isinstance(state.cycle, int) or state.cycle < 0:
        problems.append(f"cycle must be a non-negative integer, got {state.cycle!r}")

    if not (state.ball.pos.is_finite() and state.ball.vel.is_finite()):
        problems.append("non-finite ball position or velocity")
    elif state.ball.vel.norm() > config.ball_max_speed:
        problems.append(f"ball speed {state.ball.vel.norm():.3f} exceeds {config.ball_max_speed}")

    margin = 5.0
    for side, group in ((Side.TEAMMATE, state.teammates), (Side.OPPONENT, state.opponents)):
        label = side.value
        if len(group) != 11:
            problems.append(f"expected 11 {label}s, got {len(group)}")
        seen: set[int] = set()
        for p in group:
            if p.side is not side:
                problems.append(f"{label} {p.unum} has wrong side {p.side.value}")
            if not 1 <= p.unum <= 11:
                problems.append(f"{label} unum {p.unum} outside 1..11")
            if p.unum in seen:
                problems.append(f"duplicate unum {p.unum} among {label}s")
            seen.add(p.unum)
            if not (p.pos.is_finite() and p.vel.is_finite()):
                problems.append(f"non-finite {label} {p.unum} position or velocity")
                continue
            if p.vel.norm() > p.max_speed + 1e-9:
                problems.append(f"{label} {p.unum} speed {p.vel.norm():.3f} exceeds max {p.max_speed}")
            if abs(p.pos.x) > config.half_length + margin or abs(p.pos.y) > config.half_width + margin:
                problems.append(f"{label} {p.unum} outside field bounds + {margin}m margin")

    if state.ball_owner is not None:
        if not any(p.unum == state.ball_owner for p in state.teammates):
            problems.append(f"ball_owner {state.ball_owner} names no teammate")
    return problems


def kickable(state: GameState, unum: int, config: Config = DEFAULT_CONFIG) -> bool:
    """True iff teammate `unum` is within kickable margin of the ball (inclusive)."""
    player = state.teammate(unum)
    return player.pos.dist(state.ball.pos) <= config.kickable_margin


def mirror(state: GameState) -> GameState:
    """Reflect the state across the x axis (negate every y coordinate)."""

    def flip(p: PlayerState) -> PlayerState:
        return dataclasses.replace(p, pos=p.pos.mirrored(), vel=p.vel.mirrored())

    return GameState(
        cycle=state.cycle,
        ball=BallState(state.ball.pos.mirrored(), state.ball.vel.mirrored()),
        teammates=tuple(flip(p) for p in state.teammates),
        opponents=tuple(flip(p) for p in state.opponents),
        ball_owner=state.ball_owner,
    )


def in_field(point: Vec2, config: Config = DEFAULT_CONFIG) -> bool:
    return abs(point.x) <= config.half_length and abs(point.y) <= config.half_width


# --- JSON wire format ------------------------------------------------------
#
# One document per state:
#   {cycle, ball:{px,py,vx,vy}, teammates:[{unum,px,py,vx,vy} x11],
#    opponents:[... x11], ball_owner}
# .jsonl files hold one state per line. Player max_speed is not part of the
# wire format; it is restored from config on load.


def _player_to_dict(p: PlayerState) -> dict:
    return {"unum": p.unum, "px": p.pos.x, "py": p.pos.y, "vx": p.vel.x, "vy": p.vel.y}


def _player_from_dict(d: dict, side: Side, config: Config) -> PlayerState:
    return PlayerState(
        side=side,
        unum=int(d["unum"]),
        pos=Vec2(float(d["px"]), float(d["py"])),
        vel=Vec2(float(d["vx"]), float(d["vy"])),
        max_speed=config.player_max_speed,
    )


def state_to_dict(state: GameState) -> dict:
    return {
        "cycle": state.cycle,
        "ball": {
            "px": state.ball.pos.x,
            "py": state.ball.pos.y,
            "vx": state.ball.vel.x,
            "vy": state.ball.vel.y,
        },
        "teammates": [_player_to_dict(p) for p in state.teammates],
        "opponents": [_player_to_dict(p) for p in state.opponents],
        "ball_owner": state.ball_owner,
    }


def state_from_dict(d: dict, config: Config = DEFAULT_CONFIG) -> GameState:
    ball = d["ball"]
    owner = d.get("ball_owner")
    return GameState(
        cycle=int(d["cycle"]),
        ball=BallState(
            Vec2(float(ball["px"]), float(ball["py"])),
            Vec2(float(ball["vx"]), float(ball["vy"])),
        ),
        teammates=tuple(_player_from_dict(p, Side.TEAMMATE, config) for p in d["teammates"]),
        opponents=tuple(_player_from_dict(p, Side.OPPONENT, config) for p in d["opponents"]),
        ball_owner=None if owner is None else int(owner),
    )


def dump_state(state: GameState) -> str:
    return json.dumps(state_to_dict(state), separators=(",", ":"))


def load_state(text: str, config: Config = DEFAULT_CONFIG) -> GameState:
    return state_from_dict(json.loads(text), config)


def save_states_jsonl(states: Iterable[GameState], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for state in states:
            fh.write(dump_state(state))
            fh.write("\n")
            count += 1
    return count


def load_states_jsonl(path: str, config: Config = DEFAULT_CONFIG) -> Iterator[GameState]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield load_state(line, config)
