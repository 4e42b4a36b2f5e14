"""Headless desk-scale experimentation: scenario generation, possession
episodes with pluggable unmarking chains, and paired benchmarking.

An episode plays one offensive possession: opponents man-mark greedily,
off-ball teammates chase their unmark targets, and the owner passes when the
simulated pass succeeds, dribbling upfield otherwise. Episodes terminate on
opponent interception, the ball leaving the field, the ball entering shot
range, or a cycle cap. The same seeded initial states are replayed for every
strategy version so comparisons are paired.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .config import Config, DEFAULT_CONFIG
from .decisioning import NoPossession, SelfOwner, build_root, grow_tree, select_passer
from .motion import PassSpec, simulate_pass
from .positioning import choose_position
from .strategies import (
    StrategyChain,
    UnmarkResult,
    UnmarkStrategyKind,
    chain_for,
    unmark_hardcoded,
    unmark_voronoi,
)
from .world import BallState, GameState, PlayerState, Side, Vec2, validate

# formation anchors, unum 1..11, our team attacking +x
_TEAM_ANCHORS = [
    (-48.0, 0.0),
    (-33.0, -18.0), (-33.0, -6.0), (-33.0, 6.0), (-33.0, 18.0),
    (-12.0, -12.0), (-12.0, 0.0), (-12.0, 12.0),
    (8.0, -16.0), (8.0, 0.0), (8.0, 16.0),
]
# opponents defend the +x goal: goal-side of their marks, plus a goalkeeper
_OPP_ANCHORS = [(48.0, 0.0)] + [(x + 6.0, y) for x, y in _TEAM_ANCHORS[1:]]


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    n_states: int = 100
    teammate_spread: float = 6.0
    opponent_spread: float = 6.0
    ball_x: tuple[float, float] = (-25.0, 20.0)
    ball_y: tuple[float, float] = (-25.0, 25.0)
    max_player_speed_frac: float = 0.35  # initial |vel| as fraction of max speed
    # reject states whose two best labeling scores are closer than this margin;
    # >0 makes the pass-target learning task decisively labeled
    min_label_margin: float = 0.0


class Termination(Enum):
    INTERCEPTION = "interception"
    OUT_OF_FIELD = "out_of_field"
    SHOT = "shot"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class EpisodeResult:
    passes_attempted: int
    passes_completed: int
    possession_cycles: int
    shot_opportunities: int
    termination: Termination


@dataclass(frozen=True)
class VersionAggregate:
    version: str
    episodes: int
    mean_passes: float
    pass_accuracy: float
    mean_possession_cycles: float
    mean_shot_opportunities: float


@dataclass(frozen=True)
class BenchReport:
    seed: int
    episodes: int
    rows: tuple[VersionAggregate, ...]


def generate_states(scenario: ScenarioConfig, config: Config = DEFAULT_CONFIG) -> list[GameState]:
    """Seeded, deterministic scenario states; the ball owner is the nearest
    teammate to the ball. Spread 0 puts every player on its formation anchor."""
    rng = np.random.default_rng(scenario.seed)
    states = []
    clamp_x = config.half_length - 0.5
    clamp_y = config.half_width - 0.5

    def jitter(anchors, spread, max_speed):
        players = []
        for x, y in anchors:
            px = x + rng.uniform(-spread, spread)
            py = y + rng.uniform(-spread, spread)
            px = min(clamp_x, max(-clamp_x, px))
            py = min(clamp_y, max(-clamp_y, py))
            ang = rng.uniform(-math.pi, math.pi)
            mag = rng.uniform(0.0, scenario.max_player_speed_frac * max_speed)
            players.append((px, py, mag * math.cos(ang), mag * math.sin(ang)))
        return players

    while len(states) < scenario.n_states:
        team = jitter(_TEAM_ANCHORS, scenario.teammate_spread, config.player_max_speed)
        opps = jitter(_OPP_ANCHORS, scenario.opponent_spread, config.player_max_speed)
        bx = rng.uniform(*scenario.ball_x)
        by = rng.uniform(*scenario.ball_y)
        owner = min(range(11), key=lambda j: (math.hypot(team[j][0] - bx, team[j][1] - by), j)) + 1
        state = GameState(
            cycle=0,
            ball=BallState(Vec2(bx, by), Vec2(0.0, 0.0)),
            teammates=tuple(
                PlayerState(Side.TEAMMATE, j + 1, Vec2(p[0], p[1]), Vec2(p[2], p[3]),
                            config.player_max_speed)
                for j, p in enumerate(team)
            ),
            opponents=tuple(
                PlayerState(Side.OPPONENT, j + 1, Vec2(p[0], p[1]), Vec2(p[2], p[3]),
                            config.player_max_speed)
                for j, p in enumerate(opps)
            ),
            ball_owner=owner,
        )
        if scenario.min_label_margin > 0.0 and \
                _label_margin(state, config) < scenario.min_label_margin:
            continue
        states.append(state)
    return states


def _label_margin(state: GameState, config: Config) -> float:
    """Gap between the two best labeling scores; small means ambiguous label."""
    from .extractor import _candidate_score
    from .motion import pack_state

    packed = pack_state(state)
    scores = sorted(
        (_candidate_score(state, p.unum, config, packed)
         for p in state.teammates if p.unum != state.ball_owner),
        reverse=True,
    )
    return scores[0] - scores[1]


class _Episode:
    """Mutable episode engine over flat position arrays."""

    def __init__(self, initial: GameState, chain: StrategyChain, predictor,
                 config: Config, max_cycles: Optional[int]):
        problems = validate(initial, config)
        if problems:
            raise ValueError(f"invalid initial state: {problems[0]}")
        self.config = config
        self.chain = chain
        self.predictor = predictor
        self.max_cycles = config.max_cycles if max_cycles is None else max_cycles

        self.tx = np.array([p.pos.x for p in initial.teammates])
        self.ty = np.array([p.pos.y for p in initial.teammates])
        self.ox = np.array([p.pos.x for p in initial.opponents])
        self.oy = np.array([p.pos.y for p in initial.opponents])
        self.tvx = np.zeros(11)
        self.tvy = np.zeros(11)
        self.ovx = np.zeros(11)
        self.ovy = np.zeros(11)
        self.max_speed = config.player_max_speed

        self.bx = initial.ball.pos.x
        self.by = initial.ball.pos.y
        owner = initial.ball_owner
        d = math.hypot(self.tx[owner - 1] - self.bx, self.ty[owner - 1] - self.by)
        if d <= config.kickable_margin:
            self.mode = "carried"
            self.owner: Optional[int] = owner
        else:
            self.mode = "loose"
            self.owner = None
        self.flight_dir = (0.0, 0.0)
        self.flight_step = 0.0
        self.flight_traveled = 0.0
        self.flight_total = 0.0
        self.flight_age = 0
        self.receiver: Optional[int] = None
        self.receive_point: Optional[tuple[float, float]] = None

        self.unmark_targets: dict[int, tuple[float, float]] = {}
        self.attempted = 0
        self.completed = 0
        self.shots = 0
        self.needs_decision = True

    # -- snapshots -----------------------------------------------------------

    def snapshot(self, cycle: int) -> GameState:
        cfg = self.config

        def mk(side, xs, ys, vxs, vys):
            return tuple(
                PlayerState(side, i + 1, Vec2(float(xs[i]), float(ys[i])),
                            Vec2(float(vxs[i]), float(vys[i])), cfg.player_max_speed)
                for i in range(11)
            )

        return GameState(
            cycle=cycle,
            ball=BallState(Vec2(self.bx, self.by), Vec2(0.0, 0.0)),
            teammates=mk(Side.TEAMMATE, self.tx, self.ty, self.tvx, self.tvy),
            opponents=mk(Side.OPPONENT, self.ox, self.oy, self.ovx, self.ovy),
            ball_owner=self.owner,
        )

    # -- decisions -----------------------------------------------------------

    def _refresh_unmark_targets(self, snapshot: GameState) -> None:
        """Chain decisions for every off-ball teammate, sharing the pass tree
        and the Voronoi validation work across agents within the round."""
        cfg = self.config
        self.unmark_targets = {}
        if not self.chain:
            return
        tree = None
        if UnmarkStrategyKind.PASS_PREDICTION in self.chain:
            try:
                root = build_root(snapshot, self.owner or 0, cfg)
                tree, _ = grow_tree(root, self.predictor, self.owner or 0,
                                    cfg.node_budget, cfg)
            except NoPossession:
                tree = None
        for unum in range(1, 12):
            if unum == self.owner:
                continue
            result = self._chain_decision(snapshot, unum, tree)
            if result is not None:
                self.unmark_targets[unum] = (result.point.x, result.point.y)

    def _chain_decision(self, snapshot: GameState, unmarker: int, tree) -> Optional[UnmarkResult]:
        cfg = self.config
        for kind in self.chain:
            if kind is UnmarkStrategyKind.PASS_PREDICTION:
                if tree is None:
                    continue
                try:
                    decision = select_passer(tree, unmarker, cfg)
                except SelfOwner:
                    continue
                point = choose_position(decision.root_state, decision.passer, unmarker, cfg)
                if point is not None:
                    return UnmarkResult(decision.passer, point)
            elif kind is UnmarkStrategyKind.HARD_CODED:
                result = unmark_hardcoded(snapshot, unmarker, cfg)
                if result is not None:
                    return result
            else:
                result = unmark_voronoi(snapshot, unmarker, cfg)
                if result is not None:
                    return result
        return None

    def _gate(self, snapshot: GameState, start: Vec2, target: Vec2, receiver: int,
              require_receiver: bool):
        """Simulate the kick; it is playable when a teammate (the intended
        receiver, for lead passes) collects it with the safety cushion."""
        cfg = self.config
        if start.dist(target) <= 1e-9:
            return None
        res = simulate_pass(snapshot, PassSpec(start, target, cfg.pass_speed),
                            receiver_hint=receiver, config=cfg)
        if not (res.intercepted and res.side is Side.TEAMMATE):
            return None
        if require_receiver and res.unum != receiver:
            return None
        if not self._safe_reception(res):
            return None
        return res

    def _try_pass(self, snapshot: GameState) -> bool:
        """Kick the predictor's best playable pass: receivers are scanned in
        descending predicted probability and the first whose simulated pass
        succeeds gets the ball. Passes lead a moving receiver: they aim at
        its unmark target when one is set, else at its current spot."""
        cfg = self.config
        probs = np.asarray(self.predictor.pass_probabilities(snapshot))
        order = sorted(range(1, 12), key=lambda u: (-probs[u - 1], u))
        start = Vec2(self.bx, self.by)
        res = None
        target = None
        receiver = None
        for candidate in order:
            if candidate == self.owner:
                continue
            if candidate in self.unmark_targets:
                lead = Vec2(*self.unmark_targets[candidate])
                res = self._gate(snapshot, start, lead, candidate, require_receiver=True)
                if res is not None:
                    target = lead
                    receiver = candidate
                    break
            current = Vec2(float(self.tx[candidate - 1]), float(self.ty[candidate - 1]))
            res = self._gate(snapshot, start, current, candidate, require_receiver=False)
            if res is not None:
                target = current
                receiver = candidate
                break
        if res is None:
            return False
        dist = start.dist(target)
        self.flight_dir = ((target.x - start.x) / dist, (target.y - start.y) / dist)
        self.flight_step = cfg.pass_speed
        self.flight_traveled = 0.0
        self.flight_total = dist
        self.flight_age = 0
        self.mode = "flight"
        self.owner = None
        self.receiver = res.unum
        self.receive_point = (res.point.x, res.point.y)
        self.attempted += 1
        self.needs_decision = True
        return True

    # -- movement ------------------------------------------------------------

    def _move_point(self, xs, ys, vxs, vys, i: int, gx: float, gy: float,
                    standoff: float = 0.0) -> None:
        dx = gx - xs[i]
        dy = gy - ys[i]
        d = math.sqrt(dx * dx + dy * dy)
        step = min(self.max_speed, d - standoff)
        if d <= 1e-12 or step <= 0.0:
            vxs[i] = 0.0
            vys[i] = 0.0
            return
        mx = dx / d * step
        my = dy / d * step
        cfg = self.config
        xs[i] = min(cfg.half_length, max(-cfg.half_length, xs[i] + mx))
        ys[i] = min(cfg.half_width, max(-cfg.half_width, ys[i] + my))
        vxs[i] = mx
        vys[i] = my

    def _move_players(self) -> None:
        cfg = self.config
        # opponents: greedy man-marking, closest pairs first; each marker aims
        # for the ball-side shoulder of its mark so it blocks the passing lane
        d2 = (self.ox[:, None] - self.tx[None, :]) ** 2 + (self.oy[:, None] - self.ty[None, :]) ** 2
        remaining = d2.copy()
        assign = {}
        for _ in range(11):
            flat = int(np.argmin(remaining))
            oi, tj = divmod(flat, 11)
            assign[oi] = tj
            remaining[oi, :] = np.inf
            remaining[:, tj] = np.inf
        targets = {}
        chasing_ball = self.mode in ("flight", "loose")
        for oi, tj in assign.items():
            if chasing_ball and math.hypot(self.ox[oi] - self.bx,
                                           self.oy[oi] - self.by) <= cfg.ball_chase_radius:
                targets[oi] = (self.bx, self.by)
                continue
            tjx = float(self.tx[tj])
            tjy = float(self.ty[tj])
            dbx = self.bx - tjx
            dby = self.by - tjy
            d = math.sqrt(dbx * dbx + dby * dby)
            if d > 1.0:
                bias = min(cfg.mark_bias, d)
                targets[oi] = (tjx + dbx / d * bias, tjy + dby / d * bias)
            else:
                targets[oi] = (tjx, tjy)

        # teammates: owner dribbles +x, receiver meets the pass, chaser hunts
        # the loose ball, everyone else follows its unmark target
        chaser = None
        if self.mode == "loose":
            best = None
            for i in range(11):
                d = math.hypot(self.tx[i] - self.bx, self.ty[i] - self.by)
                if best is None or d < best[0]:
                    best = (d, i)
            chaser = best[1]
        for i in range(11):
            unum = i + 1
            if self.mode == "carried" and unum == self.owner:
                if self._dribble_open(i):
                    self._move_point(self.tx, self.ty, self.tvx, self.tvy, i,
                                     self.tx[i] + self.max_speed, self.ty[i])
                else:
                    self.tvx[i] = 0.0
                    self.tvy[i] = 0.0
            elif self.mode == "flight" and unum == self.receiver:
                gx, gy = self.receive_point
                self._move_point(self.tx, self.ty, self.tvx, self.tvy, i, gx, gy)
            elif self.mode == "loose" and i == chaser:
                self._move_point(self.tx, self.ty, self.tvx, self.tvy, i, self.bx, self.by)
            elif unum in self.unmark_targets:
                gx, gy = self.unmark_targets[unum]
                self._move_point(self.tx, self.ty, self.tvx, self.tvy, i, gx, gy)
            else:
                self.tvx[i] = 0.0
                self.tvy[i] = 0.0
        if self.mode == "flight" and self.flight_age < cfg.reaction_delay:
            # defenders notice the kick one reaction delay late, matching the
            # interception model the kick gate relies on
            for oi in range(11):
                self.ovx[oi] = 0.0
                self.ovy[oi] = 0.0
        else:
            for oi in range(11):
                gx, gy = targets[oi]
                self._move_point(self.ox, self.oy, self.ovx, self.ovy, oi, gx, gy)

    # -- ball and possession ---------------------------------------------------

    def _update_ball(self) -> Optional[Termination]:
        cfg = self.config
        if self.mode == "carried":
            i = self.owner - 1
            self.bx = float(self.tx[i])
            self.by = float(self.ty[i])
            return None
        if self.mode == "flight":
            self.bx += self.flight_dir[0] * self.flight_step
            self.by += self.flight_dir[1] * self.flight_step
            self.flight_traveled += self.flight_step
            self.flight_step *= cfg.ball_decay
            self.flight_age += 1
            if abs(self.bx) > cfg.half_length or abs(self.by) > cfg.half_width:
                return Termination.OUT_OF_FIELD
            if self.flight_traveled >= self.flight_total or self.flight_step < 0.01:
                self.mode = "loose"
        return None

    def _safe_reception(self, res) -> bool:
        """Every opponent must trail the reception by the safety cushion."""
        cfg = self.config
        need = res.cycle + 1 + cfg.pass_safety_cycles
        px, py = res.point.x, res.point.y
        for oi in range(11):
            d = math.hypot(self.ox[oi] - px, self.oy[oi] - py) - cfg.kickable_margin
            c = cfg.reaction_delay if d <= 0.0 else \
                int(math.ceil(d / self.max_speed)) + cfg.reaction_delay
            if c < need:
                return False
        return True

    def _dribble_open(self, i: int) -> bool:
        """A carrier holds instead of dribbling into a defender's reach."""
        cfg = self.config
        nx = min(cfg.half_length, self.tx[i] + self.max_speed)
        ny = self.ty[i]
        guard = cfg.kickable_margin + 0.4
        for oi in range(11):
            if math.hypot(self.ox[oi] - nx, self.oy[oi] - ny) <= guard:
                return False
        return True

    def _resolve_possession(self) -> Optional[Termination]:
        cfg = self.config
        margin = cfg.kickable_margin
        if self.mode == "carried":
            return None
        for i in range(11):
            if math.hypot(self.tx[i] - self.bx, self.ty[i] - self.by) <= margin:
                if self.receiver is not None:
                    self.completed += 1
                self.receiver = None
                self.receive_point = None
                self.mode = "carried"
                self.owner = i + 1
                self.needs_decision = True
                return None
        for oi in range(11):
            if math.hypot(self.ox[oi] - self.bx, self.oy[oi] - self.by) <= margin:
                return Termination.INTERCEPTION
        return None

    # -- main loop -------------------------------------------------------------

    def run(self) -> EpisodeResult:
        cfg = self.config
        goal_x, goal_y = cfg.opp_goal
        termination = Termination.TIMEOUT
        cycles = 0
        for cycle in range(self.max_cycles):
            if self.mode == "carried":
                snapshot = self.snapshot(cycle)
                if self.needs_decision or cycle % cfg.decision_interval == 0:
                    self._refresh_unmark_targets(snapshot)
                    self.needs_decision = False
                self._try_pass(snapshot)
            self._move_players()
            term = self._update_ball()
            if term is not None:
                cycles = cycle + 1
                termination = term
                break
            term = self._resolve_possession()
            if term is not None:
                cycles = cycle + 1
                termination = term
                break
            if self.mode == "carried" and \
                    math.hypot(self.bx - goal_x, self.by - goal_y) <= cfg.shot_range:
                # a shot opportunity needs control, not just a ball rolling near goal
                cycles = cycle + 1
                termination = Termination.SHOT
                self.shots = 1
                break
            cycles = cycle + 1
        if termination is Termination.TIMEOUT and self.receiver is not None \
                and self.mode in ("flight", "loose"):
            # a pass still in the air when the clock runs out is censored,
            # not failed
            self.attempted -= 1
        return EpisodeResult(
            passes_attempted=self.attempted,
            passes_completed=self.completed,
            possession_cycles=cycles,
            shot_opportunities=self.shots,
            termination=termination,
        )


def run_episode(initial: GameState, chain: StrategyChain, predictor,
                max_cycles: Optional[int] = None,
                config: Config = DEFAULT_CONFIG) -> EpisodeResult:
    """Play one possession episode; fully deterministic in its inputs."""
    return _Episode(initial, chain, predictor, config, max_cycles).run()


# --- benchmarking -------------------------------------------------------------

_POOL_STATE: dict = {}


def _pool_init(states, versions, predictor, config, max_cycles):
    _POOL_STATE["states"] = states
    _POOL_STATE["versions"] = versions
    _POOL_STATE["predictor"] = predictor
    _POOL_STATE["config"] = config
    _POOL_STATE["max_cycles"] = max_cycles


def _pool_task(task: tuple[int, int]) -> EpisodeResult:
    vi, ei = task
    chain = chain_for(_POOL_STATE["versions"][vi])
    return run_episode(_POOL_STATE["states"][ei], chain, _POOL_STATE["predictor"],
                       _POOL_STATE["max_cycles"], _POOL_STATE["config"])


def bench(
    versions: Sequence[str],
    n_episodes: int,
    seed: int,
    predictor,
    config: Config = DEFAULT_CONFIG,
    scenario: Optional[ScenarioConfig] = None,
    workers: int = 1,
    max_cycles: Optional[int] = None,
) -> BenchReport:
    """Paired benchmark: identical seeded initial states for every version.

    Results are merged in (version, episode) order, so the worker count never
    changes the report.
    """
    if n_episodes < 1:
        raise ValueError(f"n_episodes must be >= 1, got {n_episodes}")
    for v in versions:
        chain_for(v)
    if scenario is None:
        scenario = ScenarioConfig(seed=seed, n_states=n_episodes)
    else:
        scenario = ScenarioConfig(**{**scenario.__dict__, "seed": seed, "n_states": n_episodes})
    states = generate_states(scenario, config)

    tasks = [(vi, ei) for vi in range(len(versions)) for ei in range(n_episodes)]
    if workers <= 1:
        _pool_init(states, list(versions), predictor, config, max_cycles)
        results = [_pool_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_pool_init,
            initargs=(states, list(versions), predictor, config, max_cycles),
        ) as pool:
            chunk = max(1, len(tasks) // (workers * 8))
            results = list(pool.map(_pool_task, tasks, chunksize=chunk))

    rows = []
    for vi, version in enumerate(versions):
        eps = results[vi * n_episodes:(vi + 1) * n_episodes]
        attempted = sum(e.passes_attempted for e in eps)
        completed = sum(e.passes_completed for e in eps)
        rows.append(VersionAggregate(
            version=version,
            episodes=n_episodes,
            mean_passes=attempted / n_episodes,
            pass_accuracy=(completed / attempted) if attempted else 0.0,
            mean_possession_cycles=sum(e.possession_cycles for e in eps) / n_episodes,
            mean_shot_opportunities=sum(e.shot_opportunities for e in eps) / n_episodes,
        ))
    return BenchReport(seed=seed, episodes=n_episodes, rows=tuple(rows))


def report_to_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["version", "episodes", "seed", "mean_passes", "pass_accuracy",
                     "mean_possession_cycles", "mean_shot_opportunities"])
    for row in report.rows:
        writer.writerow([
            row.version, row.episodes, report.seed,
            f"{row.mean_passes:.6g}", f"{row.pass_accuracy:.6g}",
            f"{row.mean_possession_cycles:.6g}", f"{row.mean_shot_opportunities:.6g}",
        ])
    return buf.getvalue()


def report_to_table(report: BenchReport) -> str:
    headers = ["version", "passes", "accuracy", "possession", "shots"]
    lines = [f"seed={report.seed} episodes={report.episodes}"]
    rows = [
        [r.version, f"{r.mean_passes:.2f}", f"{r.pass_accuracy:.3f}",
         f"{r.mean_possession_cycles:.1f}", f"{r.mean_shot_opportunities:.2f}"]
        for r in report.rows
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines)
