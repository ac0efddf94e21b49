"""Turn-based zero-sum game interface and episode rollout machinery.

A game is a controlled Markov chain in which exactly one player (the
"mover") selects the action at each state.  Turns need not alternate:
the same player may move several times in a row.  Rewards are always
expressed from the mover's point of view, so a single scalar reward
stream carries both players' payoffs.
"""

from __future__ import annotations

import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum

StateKey = bytes
ActionId = int


class PlayerId(Enum):
    P1 = 1
    P2 = 2

    @property
    def opponent(self) -> "PlayerId":
        return PlayerId.P2 if self is PlayerId.P1 else PlayerId.P1


class IllegalActionError(ValueError):
    """A policy produced an action that is not legal in its state."""

    def __init__(self, state: StateKey, action: ActionId, policy_name: str = ""):
        self.state = state
        self.action = action
        who = f" from policy {policy_name!r}" if policy_name else ""
        super().__init__(
            f"illegal action {action}{who} in state {state.hex()}"
        )


class GameSpec(ABC):
    """Abstract two-player zero-sum turn game.

    States are opaque canonical byte keys: two states behave identically
    iff their keys are byte-equal, and the key alone determines whose
    turn it is.  Implementations must be immutable after construction so
    that concurrent rollouts can share one instance.
    """

    name: str = "game"

    @abstractmethod
    def initial_state(self) -> StateKey: ...

    @abstractmethod
    def mover(self, state: StateKey) -> PlayerId: ...

    @abstractmethod
    def legal_actions(self, state: StateKey) -> tuple[ActionId, ...]:
        """Ordered legal actions; empty exactly when the state is terminal."""

    @abstractmethod
    def step(
        self, state: StateKey, action: ActionId, rng: random.Random | None = None
    ) -> tuple[StateKey, float]:
        """One transition draw: (next_state, reward to the mover of `state`).

        Deterministic games ignore `rng` and must behave as a pure
        function of (state, action).
        """

    @abstractmethod
    def is_terminal(self, state: StateKey) -> bool: ...

    @abstractmethod
    def horizon_bound(self) -> int:
        """Hard upper bound on the number of moves in any play."""

    @abstractmethod
    def action_space_size(self) -> int:
        """Size of the fixed global action enumeration."""

    @abstractmethod
    def progress(self, state: StateKey) -> int:
        """Monotone move counter embedded in the state.

        Must strictly increase across every transition into a non-terminal
        state, which makes play acyclic and lets solvers process states
        deepest-first.  Values at terminal states are unconstrained.
        """

    def is_deterministic(self) -> bool:
        return True

    def is_valid_key(self, state: StateKey) -> bool:
        """Whether `state` is a structurally valid key for this game."""
        try:
            self.mover(state)
        except Exception:
            return False
        return True

    def sign(self, state: StateKey, player: PlayerId) -> int:
        """+1 if `player` is the mover at `state`, else -1."""
        return 1 if self.mover(state) is player else -1


class Policy(ABC):
    """A named decision rule mapping states to actions.

    `deterministic` marks policies that are pure functions of the state
    (given their construction-time parameters); only such policies are
    usable by the exact evaluation oracles.
    """

    name: str = "policy"
    deterministic: bool = True

    @abstractmethod
    def act(self, state: StateKey, rng: random.Random) -> ActionId: ...


class UniformRandomPolicy(Policy):
    """Picks uniformly among legal actions using the rollout's generator."""

    deterministic = False

    def __init__(self, game: GameSpec):
        self.game = game
        self.name = "uniform-random"

    def act(self, state: StateKey, rng: random.Random) -> ActionId:
        return rng.choice(self.game.legal_actions(state))


@dataclass(frozen=True)
class TransitionSample:
    """One (s, a, s', r) tuple; reward is in the units of mover(s)."""

    state: StateKey
    action: ActionId
    next_state: StateKey
    reward: float


@dataclass
class EpisodeTrace:
    samples: list[TransitionSample] = field(default_factory=list)
    movers: list[PlayerId] = field(default_factory=list)  # mover of samples[i].state
    terminal_state: StateKey = b""

    @property
    def length(self) -> int:
        return len(self.samples)


def rollout(
    game: GameSpec,
    policies: tuple[Policy, Policy],
    seed: int,
) -> EpisodeTrace:
    """Play one episode from the initial state.

    `policies[0]` acts for P1 and `policies[1]` for P2; at every state the
    acting policy is the one owned by the mover.  All stochasticity (game
    and policies) flows through a single generator seeded with `seed`.

    Raises IllegalActionError if a policy returns an action outside
    legal_actions(state); the action is never silently remapped.
    """
    rng = random.Random(seed)
    trace = EpisodeTrace()
    state = game.initial_state()
    cap = game.horizon_bound()
    for _ in range(cap):
        if game.is_terminal(state):
            break
        who = game.mover(state)
        policy = policies[0] if who is PlayerId.P1 else policies[1]
        action = policy.act(state, rng)
        if action not in game.legal_actions(state):
            raise IllegalActionError(state, action, policy.name)
        next_state, reward = game.step(state, action, rng)
        trace.samples.append(TransitionSample(state, action, next_state, reward))
        trace.movers.append(who)
        state = next_state
    else:
        if not game.is_terminal(state):
            raise RuntimeError(
                f"{game.name}: play exceeded horizon_bound()={cap} without terminating"
            )
    trace.terminal_state = state
    return trace


def episode_payoff(trace: EpisodeTrace, perspective: PlayerId) -> float:
    """Total reward of the episode signed for `perspective`.

    Each sample's reward counts positively when the perspective player was
    the mover and negatively otherwise, so the two perspectives sum to 0.
    """
    total = 0.0
    for sample, who in zip(trace.samples, trace.movers):
        total += sample.reward if who is perspective else -sample.reward
    return total
