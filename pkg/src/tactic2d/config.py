"""Physics and algorithm defaults, overridable via key=value config files.

Field geometry and motion constants follow the usual simulated-soccer server
defaults (105x68 pitch, 0.94 ball decay, 1.085 kickable margin). Everything
here can be overridden from the CLI with ``--config file.cfg``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    # field geometry, meters; goals sit at (+-length/2, 0)
    field_length: float = 105.0
    field_width: float = 68.0

    # motion model
    kickable_margin: float = 1.085
    ball_decay: float = 0.94
    ball_max_speed: float = 3.0
    player_max_speed: float = 1.05
    reaction_delay: int = 1
    pass_speed: float = 2.5
    horizon: int = 50

    # decision tree
    node_budget: int = 10
    # "path": rank candidates by path product of probabilities; "edge": raw edge value
    tree_priority: str = "path"

    # unmark positioning
    ring_radii: tuple[float, float, float] = (2.0, 4.0, 8.0)
    ring_points: int = 8
    # "goal": pick valid candidate closest to opponent goal; "opponent": closest to nearest opponent
    position_objective: str = "goal"

    # voronoi unmarking
    voronoi_radius: float = 15.0

    # benchmark episodes
    shot_range: float = 20.0
    max_cycles: int = 150
    decision_interval: int = 5
    mark_bias: float = 1.5
    # extra cycles every opponent must be behind at the reception point before
    # the owner releases a pass; cushions opponent motion during the flight
    pass_safety_cycles: int = 1
    # defenders this close to a moving or loose ball hunt it instead of marking
    ball_chase_radius: float = 12.0

    @property
    def half_length(self) -> float:
        return self.field_length / 2.0

    @property
    def half_width(self) -> float:
        return self.field_width / 2.0

    @property
    def our_goal(self) -> tuple[float, float]:
        return (-self.half_length, 0.0)

    @property
    def opp_goal(self) -> tuple[float, float]:
        return (self.half_length, 0.0)


DEFAULT_CONFIG = Config()

_FIELD_TYPES = {f.name: f for f in dataclasses.fields(Config)}


def _parse_value(name: str, raw: str):
    field = _FIELD_TYPES.get(name)
    if field is None:
        raise KeyError(f"unknown config key: {name!r}")
    raw = raw.strip()
    if field.type in ("float", float):
        return float(raw)
    if field.type in ("int", int):
        return int(raw)
    if field.type in ("str", str):
        return raw
    # tuple of floats, comma separated
    return tuple(float(part) for part in raw.split(","))


def parse_config_text(text: str, base: Config = DEFAULT_CONFIG) -> Config:
    """Parse ``key=value`` lines (``#`` comments, blank lines allowed)."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        try:
            overrides[key] = _parse_value(key, raw)
        except KeyError as exc:
            raise ValueError(f"line {lineno}: {exc.args[0]}") from None
        except ValueError:
            raise ValueError(f"line {lineno}: bad value for {key}: {raw.strip()!r}") from None
    return dataclasses.replace(base, **overrides)


def load_config(path: str, base: Config = DEFAULT_CONFIG) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)


def config_defaults_help() -> str:
    """One line per config key with its default, for --help output."""
    lines = []
    for field in dataclasses.fields(Config):
        default = field.default
        if isinstance(default, tuple):
            default = ",".join(str(v) for v in default)
        lines.append(f"  {field.name} = {default}")
    return "\n".join(lines)
