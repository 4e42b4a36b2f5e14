"""Turns game states into sorted feature vectors and labeled training samples.

Feature layout (180 values):
  [0:4]     ball pos x, pos y, vel x, vel y
  [4:92]    11 teammates in unum order, 8 features each
  [92:180]  11 opponents sorted by position x (ties by unum), 8 features each
Per-player features: pos x, pos y, vel x, vel y, distance to ball, angle to
ball in (-pi, pi], distance to opponent goal, is-ball-owner flag.

The label is the uniform number of the best pass target, produced by a
deterministic geometric scorer in place of a full action planner: candidates
are ranked by pass-lane openness, forward progress, and simulated pass
feasibility.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import Config, DEFAULT_CONFIG
from .motion import PackedState, PassSpec, pack_state, simulate_pass
from .world import GameState, Side, Vec2, validate

log = logging.getLogger(__name__)

FEATURE_DIM = 180
PLAYER_FEATURES = 8
SCHEMA_VERSION = "v1"

# openness / forward progress / feasibility weights of the labeling score
LABEL_WEIGHTS = (1.0, 0.5, 1.0)


@dataclass(frozen=True, slots=True)
class SortOrder:
    teammate_order: tuple[int, ...]
    opponent_order: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class LabeledSample:
    features: np.ndarray
    label: int

    def __eq__(self, other):
        if not isinstance(other, LabeledSample):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.features, other.features)


def sort_players(state: GameState) -> SortOrder:
    """Teammates stay in unum order; opponents sort by x, ties by lower unum."""
    teammate_order = tuple(p.unum for p in state.teammates)
    opponent_order = tuple(p.unum for p in sorted(state.opponents, key=lambda p: (p.pos.x, p.unum)))
    return SortOrder(teammate_order, opponent_order)


def _angle_to(src: Vec2, dst: Vec2) -> float:
    """Angle of the src->dst direction, normalized to (-pi, pi]."""
    a = math.atan2(dst.y - src.y, dst.x - src.x)
    if a <= -math.pi:
        a = math.pi
    return a


def extract_features(state: GameState, config: Config = DEFAULT_CONFIG) -> np.ndarray:
    """180-dim feature vector for a valid state with a ball owner."""
    if state.ball_owner is None:
        raise ValueError("cannot extract features without a ball owner")
    order = sort_players(state)
    ball = state.ball
    goal = Vec2(*config.opp_goal)
    out = np.empty(FEATURE_DIM, dtype=np.float64)
    out[0] = ball.pos.x
    out[1] = ball.pos.y
    out[2] = ball.vel.x
    out[3] = ball.vel.y
    i = 4
    for unum in order.teammate_order:
        p = state.teammate(unum)
        out[i] = p.pos.x
        out[i + 1] = p.pos.y
        out[i + 2] = p.vel.x
        out[i + 3] = p.vel.y
        out[i + 4] = p.pos.dist(ball.pos)
        out[i + 5] = _angle_to(p.pos, ball.pos)
        out[i + 6] = p.pos.dist(goal)
        out[i + 7] = 1.0 if unum == state.ball_owner else 0.0
        i += PLAYER_FEATURES
    for unum in order.opponent_order:
        p = state.opponent(unum)
        out[i] = p.pos.x
        out[i + 1] = p.pos.y
        out[i + 2] = p.vel.x
        out[i + 3] = p.vel.y
        out[i + 4] = p.pos.dist(ball.pos)
        out[i + 5] = _angle_to(p.pos, ball.pos)
        out[i + 6] = p.pos.dist(goal)
        out[i + 7] = 0.0
        i += PLAYER_FEATURES
    return out


def point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    """Distance from p to the segment a-b."""
    abx = b.x - a.x
    aby = b.y - a.y
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return p.dist(a)
    t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / denom
    t = min(1.0, max(0.0, t))
    return p.dist(Vec2(a.x + t * abx, a.y + t * aby))


def _candidate_score(state: GameState, unum: int, config: Config,
                     packed: PackedState) -> float:
    target = state.teammate(unum).pos
    ball = state.ball.pos
    open_lane = min(point_segment_distance(o.pos, ball, target) for o in state.opponents)
    open_lane = min(10.0, max(0.0, open_lane))
    progress = min(10.0, max(-10.0, target.x - ball.x))
    feasible = 0.0
    if ball.dist(target) > 1e-9:
        res = simulate_pass(state, PassSpec(ball, target, config.pass_speed),
                            receiver_hint=unum, config=config, packed=packed)
        if res.intercepted and res.side is Side.TEAMMATE and res.unum == unum:
            feasible = 10.0
    w_open, w_progress, w_feasible = LABEL_WEIGHTS
    return w_open * open_lane + w_progress * progress + w_feasible * feasible


def heuristic_label(state: GameState, config: Config = DEFAULT_CONFIG) -> int:
    """Best pass target by the geometric scorer; ties go to the lowest unum."""
    if state.ball_owner is None:
        raise ValueError("cannot label a state without a ball owner")
    packed = pack_state(state)
    best_unum = -1
    best_score = -math.inf
    for p in state.teammates:
        if p.unum == state.ball_owner:
            continue
        score = _candidate_score(state, p.unum, config, packed)
        if score > best_score:
            best_score = score
            best_unum = p.unum
    return best_unum


def mirror_sample(sample: LabeledSample) -> LabeledSample:
    """The sample of the y-mirrored state, computed in feature space.

    Mirroring negates y positions, y velocities and ball angles while leaving
    distances, flags, the label, and the opponent x-sort order unchanged.
    """
    f = sample.features.copy()
    f[1] = -f[1]
    f[3] = -f[3]
    for base in range(4, FEATURE_DIM, PLAYER_FEATURES):
        f[base + 1] = -f[base + 1]
        f[base + 3] = -f[base + 3]
        a = -f[base + 5]
        if a == -math.pi:
            a = math.pi
        f[base + 5] = a
    return LabeledSample(features=f, label=sample.label)


def quantize_features(features: np.ndarray) -> np.ndarray:
    """Canonical dataset precision: 9 significant decimal digits.

    Values already at this precision are fixed points, which is what makes
    the CSV round-trip bit-exact.
    """
    return np.array([float(f"{v:.9g}") for v in features], dtype=np.float64)


def make_sample(state: GameState, config: Config = DEFAULT_CONFIG) -> LabeledSample:
    return LabeledSample(
        features=quantize_features(extract_features(state, config)),
        label=heuristic_label(state, config),
    )


def build_dataset(states: Iterable[GameState], augment_mirror: bool = False,
                  config: Config = DEFAULT_CONFIG) -> list[LabeledSample]:
    """One labeled sample per valid state, two with mirror augmentation.

    Invalid states are skipped; the skip count is logged as a warning.
    """
    from .world import mirror

    samples: list[LabeledSample] = []
    skipped = 0
    for state in states:
        if validate(state, config):
            skipped += 1
            continue
        samples.append(make_sample(state, config))
        if augment_mirror:
            samples.append(make_sample(mirror(state), config))
    if skipped:
        log.warning("build_dataset skipped %d invalid state(s)", skipped)
    return samples


def split_dataset(samples: Sequence[LabeledSample], train_fraction: float = 0.8,
                  seed: int = 0) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded shuffle, then split with |train| = round(train_fraction * N)."""
    n = len(samples)
    if n < 2:
        raise ValueError(f"need at least 2 samples to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_fraction * n))
    train = [samples[i] for i in perm[:n_train]]
    test = [samples[i] for i in perm[n_train:]]
    return train, test


# --- CSV dataset format ------------------------------------------------------
#
# Header row: schema=v1,label,f000,...,f179. The schema cell is a version
# marker; data rows leave that column empty and carry label plus features
# printed with 9 significant digits.


def _header() -> list[str]:
    return [f"schema={SCHEMA_VERSION}", "label"] + [f"f{i:03d}" for i in range(FEATURE_DIM)]


def write_samples_csv(samples: Iterable[LabeledSample], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_header())
        for s in samples:
            writer.writerow(["", str(s.label)] + [f"{v:.9g}" for v in s.features])
            count += 1
    return count


def read_samples_csv(path: str) -> list[LabeledSample]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or not header[0].startswith("schema="):
            raise ValueError(f"{path}: missing schema header")
        if header != _header():
            raise ValueError(f"{path}: unsupported dataset schema {header[0]!r} "
                             f"or wrong column layout")
        samples = []
        for row in reader:
            if len(row) != FEATURE_DIM + 2:
                raise ValueError(f"{path}: row with {len(row)} fields, expected {FEATURE_DIM + 2}")
            samples.append(LabeledSample(
                features=np.array([float(v) for v in row[2:]], dtype=np.float64),
                label=int(row[1]),
            ))
    return samples
