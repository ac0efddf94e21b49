"""Empirical evaluation of trained tables against opponent policies.

Deterministic matchups are scored by exact dynamic programming whenever
the game fits the oracle budget, so the security comparisons are
equality-grade; stochastic matchups fall back to seeded rollouts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import GameSpec, PlayerId, Policy, episode_payoff, rollout
from .oracle import DEFAULT_STATE_BUDGET, best_response_value, policy_pair_value
from .qlearn import ExploitPolicy, QTable, state_value


@dataclass
class EvalRow:
    opponent: str
    perspective: PlayerId
    games: int
    mean: float
    min: float


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    root_q: float = 0.0
    perspective: PlayerId = PlayerId.P1
    converged: bool = False

    @property
    def min_payoff(self) -> float:
        return min((r.min for r in self.rows), default=float("nan"))


def evaluate_against_set(
    game: GameSpec,
    q: QTable,
    perspective: PlayerId,
    opponents: list[Policy],
    games_per_opponent: int = 1,
    seed: int = 0,
    converged: bool = True,
    budget: int = DEFAULT_STATE_BUDGET,
) -> EvalReport:
    """Play the greedy policy for `perspective` against each opponent.

    Payoffs are signed for `perspective`.  root_q is the table's root value
    signed the same way, the reference line every payoff is compared to.
    """
    root = game.initial_state()
    me = ExploitPolicy(game, q)
    report = EvalReport(
        root_q=game.sign(root, perspective) * state_value(q, root, game),
        perspective=perspective,
        converged=converged,
    )
    rng = random.Random(seed)
    for opp in opponents:
        pair = (me, opp) if perspective is PlayerId.P1 else (opp, me)
        if game.is_deterministic() and opp.deterministic:
            values = policy_pair_value(game, pair[0], pair[1], states=[root], budget=budget)
            payoff = game.sign(root, perspective) * values[root]
            report.rows.append(EvalRow(opp.name, perspective, 1, payoff, payoff))
        else:
            payoffs = [
                episode_payoff(rollout(game, pair, seed=rng.getrandbits(62)), perspective)
                for _ in range(games_per_opponent)
            ]
            report.rows.append(
                EvalRow(opp.name, perspective, len(payoffs), sum(payoffs) / len(payoffs), min(payoffs))
            )
    return report


def probe_exploitability(
    game: GameSpec,
    q: QTable,
    perspective: PlayerId,
    budget: int = DEFAULT_STATE_BUDGET,
) -> float:
    """True security level of the greedy policy for `perspective`.

    Computed by best-response dynamic programming over the full reachable
    space; subtracting it from root_q gives the exploitability gap.
    """
    me = ExploitPolicy(game, q)
    return best_response_value(game, me, perspective, budget)[game.initial_state()]


EVAL_CSV_HEADER = "opponent,perspective,games,mean,min,root_q,converged"


def write_eval_csv(reports: list[EvalReport], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(EVAL_CSV_HEADER + "\n")
        for report in reports:
            for r in report.rows:
                fh.write(
                    f"{r.opponent},{r.perspective.name},{r.games},{r.mean!r},{r.min!r},"
                    f"{report.root_q!r},{int(report.converged)}\n"
                )
