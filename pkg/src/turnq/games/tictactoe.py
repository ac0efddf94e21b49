"""3x3 Tic-Tac-Toe with alternating turns.

State key: 9 bytes, one per cell in row-major order, 0=empty, 1=P1 (X),
2=P2 (O).  The mover is implied by the piece counts, so the key alone
fixes whose turn it is.  The mover receives +1 on the move that
completes a line; a full board with no line is worth 0 to both.
"""

from __future__ import annotations

import random

from ..core import ActionId, GameSpec, PlayerId, StateKey

LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)


class TicTacToe(GameSpec):
    name = "tictactoe"

    def __init__(self):
        self._legal_cache: dict[bytes, tuple[int, ...]] = {}

    def initial_state(self) -> StateKey:
        return bytes(9)

    def mover(self, state: StateKey) -> PlayerId:
        x = state.count(1)
        o = state.count(2)
        return PlayerId.P1 if x == o else PlayerId.P2

    def _winner(self, state: StateKey) -> int:
        for a, b, c in LINES:
            v = state[a]
            if v and state[b] == v and state[c] == v:
                return v
        return 0

    def legal_actions(self, state: StateKey) -> tuple[ActionId, ...]:
        acts = self._legal_cache.get(state)
        if acts is None:
            if self._winner(state):
                acts = ()
            else:
                acts = tuple(i for i in range(9) if state[i] == 0)
            self._legal_cache[state] = acts
        return acts

    def is_terminal(self, state: StateKey) -> bool:
        return not self.legal_actions(state)

    def step(
        self, state: StateKey, action: ActionId, rng: random.Random | None = None
    ) -> tuple[StateKey, float]:
        mark = 1 if self.mover(state) is PlayerId.P1 else 2
        board = bytearray(state)
        board[action] = mark
        nxt = bytes(board)
        reward = 1.0 if self._winner(nxt) == mark else 0.0
        return nxt, reward

    def horizon_bound(self) -> int:
        return 9

    def action_space_size(self) -> int:
        return 9

    def progress(self, state: StateKey) -> int:
        return 9 - state.count(0)

    def is_valid_key(self, state: StateKey) -> bool:
        if len(state) != 9 or any(c > 2 for c in state):
            return False
        x, o = state.count(1), state.count(2)
        return x - o in (0, 1)
