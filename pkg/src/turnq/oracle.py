"""Exhaustive ground-truth solvers for small deterministic games.

All solvers memoize over canonical state keys and recurse depth-first
from the initial state, which is valid because the built-in games embed
progress counters and are therefore acyclic.  Values follow the mover
perspective convention used by the Q-table:

    Q*(s, a) = r + sign(s, s') * V*(s'),   V*(s) = max_a Q*(s, a)

with V* = 0 at terminal states.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ActionId, GameSpec, PlayerId, Policy, StateKey
from .qlearn import QTable

DEFAULT_STATE_BUDGET = 1_000_000


class BudgetExceededError(RuntimeError):
    """The game's reachable state space exceeds the configured budget."""


class CycleDetectedError(RuntimeError):
    """A reachable cycle was found; the game violates its progress contract."""


def _check_deterministic(game: GameSpec) -> None:
    if not game.is_deterministic():
        raise ValueError(f"exact solving requires a deterministic game, got {game.name!r}")


def enumerate_reachable(game: GameSpec, budget: int = DEFAULT_STATE_BUDGET) -> list[StateKey]:
    """All states reachable from the initial state under any action sequence."""
    _check_deterministic(game)
    seen: dict[StateKey, None] = {}
    stack = [game.initial_state()]
    seen[stack[0]] = None
    while stack:
        s = stack.pop()
        for a in game.legal_actions(s):
            nxt, _ = game.step(s, a)
            if nxt not in seen:
                if len(seen) >= budget:
                    raise BudgetExceededError(
                        f"{game.name}: more than {budget} reachable states"
                    )
                seen[nxt] = None
                stack.append(nxt)
    return list(seen)


@dataclass
class ExactSolution:
    """Fixed point of the turn-game backup over the reachable space."""

    q_star: QTable
    v_star: dict[StateKey, float]
    pi_star: dict[StateKey, ActionId]
    reachable_count: int

    def root_value(self, game: GameSpec) -> float:
        return self.v_star[game.initial_state()]


def solve_exact(game: GameSpec, budget: int = DEFAULT_STATE_BUDGET) -> ExactSolution:
    """Solve the game by memoized backward recursion from the initial state.

    Returns exact Q*, V* and the lowest-index argmax policy over every
    reachable state.  Raises BudgetExceededError if the reachable space
    exceeds `budget` states and CycleDetectedError on a progress violation.
    """
    _check_deterministic(game)
    v: dict[StateKey, float] = {}
    q = QTable()
    pi: dict[StateKey, ActionId] = {}
    on_stack: set[StateKey] = set()

    def value(s: StateKey) -> float:
        known = v.get(s)
        if known is not None:
            return known
        if s in on_stack:
            raise CycleDetectedError(f"{game.name}: cycle through state {s.hex()}")
        legal = game.legal_actions(s)
        if not legal:
            v[s] = 0.0
            return 0.0
        if len(v) >= budget:
            raise BudgetExceededError(f"{game.name}: more than {budget} reachable states")
        on_stack.add(s)
        me = game.mover(s)
        best_v = None
        best_a = None
        for a in legal:
            nxt, reward = game.step(s, a)
            sub = value(nxt)
            qv = reward + (sub if game.mover(nxt) is me else -sub)
            q.entries[(s, a)] = qv
            if best_v is None or qv > best_v:
                best_v, best_a = qv, a
        on_stack.discard(s)
        v[s] = best_v
        pi[s] = best_a
        return best_v

    value(game.initial_state())
    return ExactSolution(q_star=q, v_star=v, pi_star=pi, reachable_count=len(v))


class ExactPolicy(Policy):
    """Plays the argmax policy of an ExactSolution."""

    deterministic = True

    def __init__(self, solution: ExactSolution, name: str = "pi-star"):
        self.solution = solution
        self.name = name

    def act(self, state, rng) -> ActionId:
        return self.solution.pi_star[state]


def _pair_action(game: GameSpec, pi1: Policy, pi2: Policy, state: StateKey) -> ActionId:
    policy = pi1 if game.mover(state) is PlayerId.P1 else pi2
    return policy.act(state, None)


def policy_pair_value(
    game: GameSpec,
    pi1: Policy,
    pi2: Policy,
    states: list[StateKey] | None = None,
    budget: int = DEFAULT_STATE_BUDGET,
) -> dict[StateKey, float]:
    """Mover-perspective value of fixed deterministic play from each state.

    With `states` omitted, every state reachable under any play is
    evaluated; otherwise only the given states (plus the continuations
    they need) are.
    """
    _check_deterministic(game)
    if not (pi1.deterministic and pi2.deterministic):
        raise ValueError("policy_pair_value requires deterministic policies")
    values: dict[StateKey, float] = {}

    def value(s: StateKey) -> float:
        known = values.get(s)
        if known is not None:
            return known
        if game.is_terminal(s):
            values[s] = 0.0
            return 0.0
        if len(values) >= budget:
            raise BudgetExceededError(f"{game.name}: more than {budget} evaluated states")
        # iterative chase along the single successor path to spare the stack
        path = []
        cur = s
        while cur not in values and not game.is_terminal(cur):
            a = _pair_action(game, pi1, pi2, cur)
            nxt, reward = game.step(cur, a)
            path.append((cur, reward, game.mover(cur) is game.mover(nxt)))
            cur = nxt
            if len(path) > game.horizon_bound():
                raise CycleDetectedError(f"{game.name}: policy play exceeded the horizon")
        acc = values.get(cur, 0.0)
        for st, reward, same_mover in reversed(path):
            acc = reward + (acc if same_mover else -acc)
            values[st] = acc
        return values[s]

    for s in states if states is not None else enumerate_reachable(game, budget):
        value(s)
    return values


def best_response_value(
    game: GameSpec,
    fixed: Policy,
    perspective: PlayerId,
    budget: int = DEFAULT_STATE_BUDGET,
) -> dict[StateKey, float]:
    """Value of `fixed` for `perspective` against a best-responding opponent.

    Returned values are signed for `perspective` (not the mover): at the
    opponent's states the opponent picks the action minimizing them, at
    `perspective`'s states play follows `fixed`.
    """
    _check_deterministic(game)
    if not fixed.deterministic:
        raise ValueError("best_response_value requires a deterministic fixed policy")
    values: dict[StateKey, float] = {}
    on_stack: set[StateKey] = set()

    def value(s: StateKey) -> float:
        known = values.get(s)
        if known is not None:
            return known
        if game.is_terminal(s):
            values[s] = 0.0
            return 0.0
        if s in on_stack:
            raise CycleDetectedError(f"{game.name}: cycle through state {s.hex()}")
        if len(values) >= budget:
            raise BudgetExceededError(f"{game.name}: more than {budget} evaluated states")
        on_stack.add(s)
        sign = 1 if game.mover(s) is perspective else -1
        if sign == 1:
            a = fixed.act(s, None)
            nxt, reward = game.step(s, a)
            out = reward * sign + value(nxt)
        else:
            out = None
            for a in game.legal_actions(s):
                nxt, reward = game.step(s, a)
                cand = reward * sign + value(nxt)
                if out is None or cand < out:
                    out = cand
        on_stack.discard(s)
        values[s] = out
        return out

    value(game.initial_state())
    return values


@dataclass
class SaddleViolation:
    state: StateKey
    challenger: str
    side: PlayerId
    saddle_value: float
    challenger_value: float

    @property
    def gap(self) -> float:
        return self.challenger_value - self.saddle_value


@dataclass
class SaddleCheck:
    ok: bool
    violations: list[SaddleViolation]

    @property
    def worst(self) -> SaddleViolation | None:
        if not self.violations:
            return None
        return max(self.violations, key=lambda v: abs(v.gap))


def verify_saddle(
    game: GameSpec,
    solution: ExactSolution,
    challenges: list[Policy],
    budget: int = DEFAULT_STATE_BUDGET,
) -> SaddleCheck:
    """Check that no challenger improves on the solved policy pair anywhere.

    For each challenge policy the full no-regret inequalities are tested at
    every reachable state, from both sides, and the best-response security
    value at the root is compared against the solved root value.
    """
    pi_star = ExactPolicy(solution)
    reachable = enumerate_reachable(game, budget)
    violations: list[SaddleViolation] = []
    for challenger in challenges:
        as_p1 = policy_pair_value(game, challenger, pi_star, states=reachable, budget=budget)
        as_p2 = policy_pair_value(game, pi_star, challenger, states=reachable, budget=budget)
        for s in reachable:
            v_star = solution.v_star[s]
            sgn1 = game.sign(s, PlayerId.P1)
            if sgn1 * v_star < sgn1 * as_p1[s]:
                violations.append(
                    SaddleViolation(s, challenger.name, PlayerId.P1, sgn1 * v_star, sgn1 * as_p1[s])
                )
            sgn2 = -sgn1
            if sgn2 * v_star < sgn2 * as_p2[s]:
                violations.append(
                    SaddleViolation(s, challenger.name, PlayerId.P2, sgn2 * v_star, sgn2 * as_p2[s])
                )
    root = game.initial_state()
    for player in (PlayerId.P1, PlayerId.P2):
        security = best_response_value(game, pi_star, player, budget)[root]
        expected = game.sign(root, player) * solution.v_star[root]
        if security != expected:
            violations.append(
                SaddleViolation(root, "best-response", player, expected, security)
            )
    return SaddleCheck(ok=not violations, violations=violations)


def export_solution(solution: ExactSolution, path) -> None:
    """Write q_star in the Q-table binary format for diffing against trained tables."""
    solution.q_star.save(path)
