"""Tabular Q-function for turn games, its update rule, and derived policies.

Q(s, a) is kept in the mover's perspective.  The backup target flips
sign whenever the mover changes between s and s', which is what makes a
single table serve both players:

    target = r + sign * max_a' Q(s', a'),   sign = +1 if mover unchanged else -1

Terminal states are pinned at 0 and never written.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass

from .core import ActionId, GameSpec, Policy, StateKey, TransitionSample

QTABLE_MAGIC = b"TQL1"


class QTableFormatError(ValueError):
    """Raised when a persisted Q-table is corrupt or not in this format."""


class QTable:
    """Map from (state key, action id) to a value, with visit counts.

    Absent pairs read as 0.0.  Iteration order of entries is insertion
    order, which the binary format preserves so that save/load round-trips
    are byte-identical.
    """

    def __init__(self):
        self.entries: dict[tuple[StateKey, ActionId], float] = {}
        self.visits: dict[tuple[StateKey, ActionId], int] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def value(self, state: StateKey, action: ActionId) -> float:
        return self.entries.get((state, action), 0.0)

    def visit_count(self, state: StateKey, action: ActionId) -> int:
        return self.visits.get((state, action), 0)

    def states(self):
        seen = {}
        for s, _ in self.entries:
            seen[s] = None
        return list(seen)

    # -- persistence -------------------------------------------------------

    def to_bytes(self) -> bytes:
        chunks = [QTABLE_MAGIC, struct.pack("<Q", len(self.entries))]
        for (state, action), value in self.entries.items():
            chunks.append(struct.pack("<I", len(state)))
            chunks.append(state)
            chunks.append(struct.pack("<IdQ", action, value, self.visits.get((state, action), 0)))
        return b"".join(chunks)

    @classmethod
    def from_bytes(cls, data: bytes) -> "QTable":
        if data[:4] != QTABLE_MAGIC:
            raise QTableFormatError(
                f"bad magic {data[:4]!r}, expected {QTABLE_MAGIC!r}"
            )
        q = cls()
        try:
            (count,) = struct.unpack_from("<Q", data, 4)
            pos = 12
            for _ in range(count):
                (key_len,) = struct.unpack_from("<I", data, pos)
                pos += 4
                state = data[pos : pos + key_len]
                if len(state) != key_len:
                    raise QTableFormatError("truncated state key")
                pos += key_len
                action, value, visits = struct.unpack_from("<IdQ", data, pos)
                pos += 20
                q.entries[(state, action)] = value
                q.visits[(state, action)] = visits
        except struct.error as exc:
            raise QTableFormatError(f"truncated table: {exc}") from exc
        if pos != len(data):
            raise QTableFormatError(f"{len(data) - pos} trailing bytes after entries")
        return q

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "QTable":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@dataclass(frozen=True)
class LearningRateSchedule:
    """Step size for the update, constant or decaying with visit counts."""

    mode: str = "constant"  # "constant" | "visit-count"
    alpha: float = 1.0
    c: float = 10.0

    def __post_init__(self):
        if self.mode == "constant":
            if not 0.0 < self.alpha <= 1.0:
                raise ValueError("constant alpha must be in (0, 1]")
        elif self.mode == "visit-count":
            if self.c <= 0:
                raise ValueError("visit-count c must be positive")
        else:
            raise ValueError(f"unknown schedule mode {self.mode!r}")

    def rate(self, prior_visits: int) -> float:
        if self.mode == "constant":
            return self.alpha
        return self.c / (self.c + prior_visits)

    @property
    def is_exact(self) -> bool:
        """True for the alpha=1 regime where updates overwrite exactly."""
        return self.mode == "constant" and self.alpha == 1.0


@dataclass(frozen=True)
class BoltzmannParams:
    beta: float = 0.0

    def __post_init__(self):
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError("beta must be finite and >= 0")


def state_value(q: QTable, state: StateKey, game: GameSpec) -> float:
    """max over legal actions of Q(state, .); 0 at terminal states."""
    legal = game.legal_actions(state)
    if not legal:
        return 0.0
    entries = q.entries
    return max(entries.get((state, a), 0.0) for a in legal)


def q_target(sample: TransitionSample, q: QTable, game: GameSpec) -> float:
    """Backup value for one sample against the current table."""
    nxt = sample.next_state
    legal = game.legal_actions(nxt)
    if not legal:
        return sample.reward
    entries = q.entries
    best = max(entries.get((nxt, a), 0.0) for a in legal)
    if game.mover(sample.state) is game.mover(nxt):
        return sample.reward + best
    return sample.reward - best


def q_update(
    q: QTable,
    sample: TransitionSample,
    schedule: LearningRateSchedule,
    game: GameSpec,
) -> float:
    """Apply one update; returns the new value of the (state, action) entry."""
    if game.is_terminal(sample.state):
        raise ValueError("cannot update a terminal state's entry")
    key = (sample.state, sample.action)
    alpha = schedule.rate(q.visits.get(key, 0))
    target = q_target(sample, q, game)
    if alpha == 1.0:
        new = target
    else:
        new = (1.0 - alpha) * q.entries.get(key, 0.0) + alpha * target
    q.entries[key] = new
    q.visits[key] = q.visits.get(key, 0) + 1
    return new


def exploit_action(q: QTable, state: StateKey, game: GameSpec) -> ActionId:
    """Lowest-indexed legal action attaining the maximum Q value."""
    legal = game.legal_actions(state)
    if not legal:
        raise ValueError("no exploit action at a terminal state")
    entries = q.entries
    best_a = legal[0]
    best_v = entries.get((state, best_a), 0.0)
    for a in legal[1:]:
        v = entries.get((state, a), 0.0)
        if v > best_v:
            best_a, best_v = a, v
    return best_a


def boltzmann_probabilities(
    q: QTable, state: StateKey, params: BoltzmannParams, game: GameSpec
) -> list[float]:
    """Probabilities proportional to exp(beta * Q) over legal actions.

    Computed with max subtraction, so the result is invariant under adding
    a constant to Q(state, .) and safe for large beta.
    """
    legal = game.legal_actions(state)
    if not legal:
        raise ValueError("no action distribution at a terminal state")
    values = [q.value(state, a) for a in legal]
    top = max(values)
    weights = [math.exp(params.beta * (v - top)) for v in values]
    total = sum(weights)
    return [w / total for w in weights]


def boltzmann_sample(
    q: QTable,
    state: StateKey,
    params: BoltzmannParams,
    game: GameSpec,
    rng: random.Random,
) -> ActionId:
    """Inverse-CDF draw from the Boltzmann distribution over legal actions."""
    legal = game.legal_actions(state)
    probs = boltzmann_probabilities(q, state, params, game)
    u = rng.random()
    acc = 0.0
    for a, p in zip(legal, probs):
        acc += p
        if u < acc:
            return a
    return legal[-1]


class ExploitPolicy(Policy):
    """Greedy argmax policy over a Q-table (ties to the lowest action id)."""

    deterministic = True

    def __init__(self, game: GameSpec, q: QTable, name: str = "exploit"):
        self.game = game
        self.q = q
        self.name = name

    def act(self, state: StateKey, rng: random.Random) -> ActionId:
        return exploit_action(self.q, state, self.game)


class BoltzmannPolicy(Policy):
    """Stochastic policy sampling actions with weight exp(beta * Q)."""

    deterministic = False

    def __init__(self, game: GameSpec, q: QTable, beta: float):
        self.game = game
        self.q = q
        self.params = BoltzmannParams(beta)
        self.name = f"boltz{beta:g}"

    def act(self, state: StateKey, rng: random.Random) -> ActionId:
        return boltzmann_sample(self.q, state, self.params, self.game, rng)
