import math

import numpy as np
import pytest

from tactic2d.config import DEFAULT_CONFIG
from tactic2d.world import BallState, GameState, PlayerState, Side, Vec2

# two spread formations, far apart, used when a test only needs "some" state
TEAM_SPOTS = [(-45.0, 0.0), (-30.0, -15.0), (-30.0, 15.0), (-20.0, -5.0), (-20.0, 5.0),
              (-10.0, -20.0), (-10.0, 0.0), (-10.0, 20.0), (0.0, -10.0), (0.0, 10.0), (5.0, 0.0)]
OPP_SPOTS = [(45.0, 0.0), (30.0, -15.0), (30.0, 15.0), (20.0, -5.0), (20.0, 5.0),
             (10.0, -20.0), (10.0, 0.0), (10.0, 20.0), (15.0, -10.0), (15.0, 10.0), (25.0, 0.0)]


def make_players(side, spots, vels=None, max_speed=None):
    max_speed = DEFAULT_CONFIG.player_max_speed if max_speed is None else max_speed
    players = []
    for i, (x, y) in enumerate(spots):
        vel = Vec2(*vels[i]) if vels else Vec2(0.0, 0.0)
        players.append(PlayerState(side, i + 1, Vec2(x, y), vel, max_speed))
    return tuple(players)


def make_state(ball=(0.0, 0.0), ball_vel=(0.0, 0.0), team_spots=None, opp_spots=None,
               owner=None, cycle=0):
    return GameState(
        cycle=cycle,
        ball=BallState(Vec2(*ball), Vec2(*ball_vel)),
        teammates=make_players(Side.TEAMMATE, team_spots or TEAM_SPOTS),
        opponents=make_players(Side.OPPONENT, opp_spots or OPP_SPOTS),
        ball_owner=owner,
    )


def random_state(rng: np.random.Generator, owner_near_ball=True, kickable_owner=False):
    """A valid random 11v11 state with the ball owner nearest the ball.

    With kickable_owner the ball is moved within the owner's kickable margin.
    """
    def spots():
        xs = rng.uniform(-50.0, 50.0, 11)
        ys = rng.uniform(-32.0, 32.0, 11)
        return list(zip(xs, ys))

    team = spots()
    opp = spots()
    bx = rng.uniform(-45.0, 45.0)
    by = rng.uniform(-30.0, 30.0)
    state = GameState(
        cycle=int(rng.integers(0, 1000)),
        ball=BallState(Vec2(bx, by), Vec2(0.0, 0.0)),
        teammates=make_players(Side.TEAMMATE, team),
        opponents=make_players(Side.OPPONENT, opp),
        ball_owner=None,
    )
    if owner_near_ball or kickable_owner:
        owner = min(state.teammates, key=lambda p: (p.pos.dist(state.ball.pos), p.unum)).unum
        ball = state.ball
        if kickable_owner:
            pos = state.teammate(owner).pos
            ball = BallState(Vec2(pos.x + 0.3, pos.y), Vec2(0.0, 0.0))
        state = GameState(state.cycle, ball, state.teammates, state.opponents, owner)
    return state


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
