"""Built-in heuristic policies for the three games.

Every heuristic is a total rule over its game's non-terminal states and
is deterministic given (state, seed): randomness, where used, is drawn
from a keyed hash of the state bytes so the same state always yields the
same action.  Ties always break toward the lowest action id.
"""

from __future__ import annotations

import hashlib
import random

from ..core import ActionId, GameSpec, PlayerId, Policy, StateKey
from .dotsboxes import DotsAndBoxes
from .skirmish import MOVE_DELTAS, PASS, SHOOT_BASE, UNIT_RANGE, GridSkirmish
from .tictactoe import TicTacToe


def _state_rng(state: StateKey, seed: int) -> random.Random:
    digest = hashlib.blake2b(
        state, key=(seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little"), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "little"))


def _random_legal(game: GameSpec, state: StateKey, seed: int) -> ActionId:
    return _state_rng(state, seed).choice(game.legal_actions(state))


# -- tic-tac-toe ------------------------------------------------------------

def _ttt_center_first(game: TicTacToe, state: StateKey, seed: int) -> ActionId:
    legal = game.legal_actions(state)
    if 4 in legal:
        return 4
    for corner in (0, 2, 6, 8):
        if corner in legal:
            return corner
    return legal[0]


def _ttt_win_block(game: TicTacToe, state: StateKey, seed: int) -> ActionId:
    legal = game.legal_actions(state)
    for a in legal:
        if game.step(state, a)[1] > 0:
            return a
    # block: a cell the opponent would win with if it were their move
    me = 1 if game.mover(state) is PlayerId.P1 else 2
    them = 3 - me
    for a in legal:
        board = bytearray(state)
        board[a] = them
        if game._winner(bytes(board)) == them:
            return a
    return legal[0]


# -- dots and boxes ---------------------------------------------------------

def _dab_safe_edge(game: DotsAndBoxes, state: StateKey, seed: int) -> ActionId:
    legal = game.legal_actions(state)
    for a in legal:
        if game.step(state, a)[1] > 0:
            return a
    mask = game._decode(state)[0]
    for a in legal:
        new_mask = mask | 1 << a
        gives_box = any(
            bin(new_mask & bm).count("1") == 3 for bm in game._box_masks
        )
        if not gives_box:
            return a
    return legal[0]


# -- grid skirmish ----------------------------------------------------------

def _sk_context(game: GridSkirmish, state: StateKey):
    turns, active, r1, r2 = game.decode(state)
    own, enemy = (r1, r2) if turns % 2 == 0 else (r2, r1)
    unit = own[active]
    live_enemies = [u for u in enemy if u[0] != 0]
    return unit, live_enemies


def _nearest(pos: tuple[int, int], targets) -> tuple[int, int] | None:
    best, best_d = None, None
    for tx, ty in targets:
        d = abs(tx - pos[0]) + abs(ty - pos[1])
        if best_d is None or d < best_d:
            best, best_d = (tx, ty), d
    return best


def _move_toward(
    game: GridSkirmish, state: StateKey, target: tuple[int, int], away: bool = False
) -> ActionId | None:
    """Lowest-id legal move that strictly improves distance to `target`."""
    legal = game.legal_actions(state)
    unit = _sk_context(game, state)[0]
    here = abs(target[0] - unit[1]) + abs(target[1] - unit[2])
    best_a, best_d = None, here
    for a in legal:
        if not 1 <= a < SHOOT_BASE:
            continue
        dx, dy = MOVE_DELTAS[a - 1]
        d = abs(target[0] - (unit[1] + dx)) + abs(target[1] - (unit[2] + dy))
        if (d > best_d) if away else (d < best_d):
            best_a, best_d = a, d
    return best_a


def _sk_shoot(game: GridSkirmish, state: StateKey) -> ActionId | None:
    for a in game.legal_actions(state):
        if a >= SHOOT_BASE:
            return a
    return None


def _sk_greedy_shoot(game: GridSkirmish, state: StateKey, seed: int) -> ActionId:
    shot = _sk_shoot(game, state)
    if shot is not None:
        return shot
    unit, enemies = _sk_context(game, state)
    if enemies:
        move = _move_toward(game, state, _nearest((unit[1], unit[2]), [(u[1], u[2]) for u in enemies]))
        if move is not None:
            return move
    return PASS


def _sk_city_holder(game: GridSkirmish, state: StateKey, seed: int) -> ActionId:
    shot = _sk_shoot(game, state)
    if shot is not None:
        return shot
    unit = _sk_context(game, state)[0]
    if (unit[1], unit[2]) in game.cities:
        return PASS
    if game.cities:
        move = _move_toward(game, state, _nearest((unit[1], unit[2]), game.cities))
        if move is not None:
            return move
    return PASS


def _sk_coward(game: GridSkirmish, state: StateKey, seed: int) -> ActionId:
    unit, enemies = _sk_context(game, state)
    if enemies:
        move = _move_toward(
            game, state, _nearest((unit[1], unit[2]), [(u[1], u[2]) for u in enemies]), away=True
        )
        if move is not None:
            return move
    return PASS


def _sk_rusher(game: GridSkirmish, state: StateKey, seed: int) -> ActionId:
    unit, enemies = _sk_context(game, state)
    if enemies:
        target = _nearest((unit[1], unit[2]), [(u[1], u[2]) for u in enemies])
        if abs(target[0] - unit[1]) + abs(target[1] - unit[2]) > 1:
            move = _move_toward(game, state, target)
            if move is not None:
                return move
    shot = _sk_shoot(game, state)
    if shot is not None:
        return shot
    return PASS


HEURISTICS = {
    TicTacToe: {
        "random-legal": _random_legal,
        "center-first": _ttt_center_first,
        "win-block": _ttt_win_block,
    },
    DotsAndBoxes: {
        "random-legal": _random_legal,
        "safe-edge": _dab_safe_edge,
    },
    GridSkirmish: {
        "random-legal": _random_legal,
        "greedy-shoot": _sk_greedy_shoot,
        "city-holder": _sk_city_holder,
        "coward": _sk_coward,
        "rusher": _sk_rusher,
    },
}


def heuristic_names(game: GameSpec) -> tuple[str, ...]:
    for cls, table in HEURISTICS.items():
        if isinstance(game, cls):
            return tuple(table)
    return ()


def heuristic_action(game: GameSpec, name: str, state: StateKey, seed: int = 0) -> ActionId:
    """Action chosen by the named built-in heuristic; deterministic in (state, seed)."""
    for cls, table in HEURISTICS.items():
        if isinstance(game, cls):
            if name not in table:
                raise ValueError(f"game {game.name!r} has no heuristic {name!r}")
            return table[name](game, state, seed)
    raise ValueError(f"no heuristics registered for game {game.name!r}")


class HeuristicPolicy(Policy):
    """Policy wrapper around a named built-in heuristic.

    Decisions are pure in the state, so they are memoized per instance.
    """

    deterministic = True

    def __init__(self, game: GameSpec, name: str, seed: int = 0):
        if name not in heuristic_names(game):
            raise ValueError(f"game {game.name!r} has no heuristic {name!r}")
        self.game = game
        self.name = name
        self.seed = seed
        self._cache: dict[StateKey, ActionId] = {}

    def act(self, state: StateKey, rng: random.Random) -> ActionId:
        action = self._cache.get(state)
        if action is None:
            action = heuristic_action(self.game, self.name, state, self.seed)
            self._cache[state] = action
        return action
