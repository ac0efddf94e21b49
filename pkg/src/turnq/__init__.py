"""turnq: tabular Q-learning solver toolkit for zero-sum turn-based games."""

from .core import (
    EpisodeTrace,
    GameSpec,
    IllegalActionError,
    PlayerId,
    Policy,
    TransitionSample,
    UniformRandomPolicy,
    episode_payoff,
    rollout,
)
from .evalharness import EvalReport, evaluate_against_set, probe_exploitability
from .explore import (
    ExitConfig,
    ProtectSets,
    TrainReport,
    TrainResult,
    VisitedSet,
    schedule_next,
    train,
    visited_invariance_check,
)
from .games import HeuristicPolicy, heuristic_action, heuristic_names, make_game, salvo_damage
from .oracle import (
    BudgetExceededError,
    ExactSolution,
    best_response_value,
    enumerate_reachable,
    policy_pair_value,
    solve_exact,
    verify_saddle,
)
from .qlearn import (
    BoltzmannParams,
    BoltzmannPolicy,
    ExploitPolicy,
    LearningRateSchedule,
    QTable,
    boltzmann_probabilities,
    exploit_action,
    q_target,
    q_update,
    state_value,
)

__version__ = "0.1.0"
