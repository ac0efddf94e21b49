"""Concrete games and their built-in heuristic policies."""

from __future__ import annotations

from ..core import GameSpec
from .dotsboxes import DotsAndBoxes
from .heuristics import (
    HEURISTICS,
    HeuristicPolicy,
    heuristic_action,
    heuristic_names,
)
from .skirmish import GridSkirmish, salvo_damage
from .tictactoe import TicTacToe

GAME_NAMES = ("tictactoe", "dots-and-boxes", "grid-skirmish")


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ValueError(f"unknown key {key!r} in {where}")


def _parse_units(raw, width, height, side: str) -> list[tuple[str, int, int, int]]:
    units = []
    for i, u in enumerate(raw):
        if not isinstance(u, dict):
            raise ValueError(f"game.units.{side}[{i}] must be an object")
        _require_keys(u, {"type", "pos", "health"}, f"game.units.{side}[{i}]")
        utype = u.get("type", "infantry")
        pos = u.get("pos")
        if not (isinstance(pos, (list, tuple)) and len(pos) == 2):
            raise ValueError(f"game.units.{side}[{i}].pos must be [x, y]")
        from .skirmish import DEFAULT_HEALTH, UNIT_TYPES

        if utype not in UNIT_TYPES:
            raise ValueError(f"game.units.{side}[{i}].type {utype!r} unknown")
        health = u.get("health", DEFAULT_HEALTH[UNIT_TYPES.index(utype)])
        units.append((utype, int(pos[0]), int(pos[1]), int(health)))
    return units


def _default_units(count: int, width: int, height: int, side: str):
    # 1v1 style quick setup: faction 1 down the left edge, faction 2 down the right
    col = 0 if side == "p1" else width - 1
    if count > height:
        raise ValueError(f"cannot auto-place {count} units in a column of {height}")
    return [("infantry", col, y, 2) for y in range(count)]


def make_game(config: dict) -> GameSpec:
    """Build a GameSpec from a structured config section.

    Raises ValueError naming the offending key for anything malformed.
    """
    if not isinstance(config, dict):
        raise ValueError("game section must be an object")
    name = config.get("name")
    if name == "tictactoe":
        _require_keys(config, {"name"}, "game")
        return TicTacToe()
    if name == "dots-and-boxes":
        _require_keys(config, {"name", "rows", "cols"}, "game")
        return DotsAndBoxes(rows=int(config.get("rows", 1)), cols=int(config.get("cols", 1)))
    if name == "grid-skirmish":
        _require_keys(
            config,
            {"name", "width", "height", "duration", "units", "units_per_side", "cities", "rough"},
            "game",
        )
        width = int(config.get("width", 3))
        height = int(config.get("height", 3))
        duration = int(config.get("duration", 2))
        if "units" in config:
            raw = config["units"]
            if not isinstance(raw, dict):
                raise ValueError("game.units must be an object with p1/p2 lists")
            _require_keys(raw, {"p1", "p2"}, "game.units")
            units_p1 = _parse_units(raw.get("p1", []), width, height, "p1")
            units_p2 = _parse_units(raw.get("p2", []), width, height, "p2")
        else:
            per_side = int(config.get("units_per_side", 1))
            if per_side < 1:
                raise ValueError("game.units_per_side must be >= 1")
            units_p1 = _default_units(per_side, width, height, "p1")
            units_p2 = _default_units(per_side, width, height, "p2")
        cities = [tuple(int(v) for v in c) for c in config.get("cities", [])]
        rough = [tuple(int(v) for v in r) for r in config.get("rough", [])]
        return GridSkirmish(
            width=width,
            height=height,
            units_p1=units_p1,
            units_p2=units_p2,
            duration=duration,
            cities=cities,
            rough=rough,
        )
    raise ValueError(f"unknown game name {name!r} (expected one of {GAME_NAMES})")


__all__ = [
    "DotsAndBoxes",
    "GAME_NAMES",
    "GridSkirmish",
    "HEURISTICS",
    "HeuristicPolicy",
    "TicTacToe",
    "heuristic_action",
    "heuristic_names",
    "make_game",
    "salvo_damage",
]
