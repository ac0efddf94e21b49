"""Independent brute-force oracles used to pin expected values in tests.

These deliberately share no code with turnq.oracle: plain_negamax walks
the raw game tree with no memoization or table, so it can cross-check
the production solver.
"""

from __future__ import annotations

from turnq.core import GameSpec, PlayerId, StateKey


def plain_negamax(game: GameSpec, state: StateKey | None = None) -> float:
    """Game value at `state` from the mover's perspective, by full tree walk."""
    if state is None:
        state = game.initial_state()
    legal = game.legal_actions(state)
    if not legal:
        return 0.0
    best = None
    me = game.mover(state)
    for a in legal:
        nxt, reward = game.step(state, a)
        sub = plain_negamax(game, nxt)
        value = reward + (sub if game.mover(nxt) is me else -sub)
        if best is None or value > best:
            best = value
    return best


def enumerate_states_bruteforce(game: GameSpec) -> set[StateKey]:
    """All states reachable from the initial state under any play."""
    seen: set[StateKey] = set()
    stack = [game.initial_state()]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        for a in game.legal_actions(s):
            nxt, _ = game.step(s, a)
            if nxt not in seen:
                stack.append(nxt)
    return seen


def signed_value_for(game: GameSpec, state: StateKey, player: PlayerId, mover_value: float) -> float:
    return mover_value if game.mover(state) is player else -mover_value
