import random

import pytest

from oracles import plain_negamax
from turnq.core import GameSpec, PlayerId, Policy, UniformRandomPolicy, episode_payoff, rollout
from turnq.games import HeuristicPolicy, heuristic_names
from turnq.oracle import (
    BudgetExceededError,
    CycleDetectedError,
    ExactPolicy,
    best_response_value,
    enumerate_reachable,
    policy_pair_value,
    solve_exact,
    verify_saddle,
)

# roots pinned by the plain tree-walk oracle before the solver was built
TTT_ROOT = 0.0
TTT_REACHABLE = 5478
DAB_1X1_ROOT = -1.0
DAB_1X2_ROOT = 0.0


class OneShotGame(GameSpec):
    """Single decision, two actions worth 2 and 5, then the game ends."""

    name = "one-shot"

    def initial_state(self):
        return b"\x00"

    def mover(self, state):
        return PlayerId.P1

    def legal_actions(self, state):
        return (0, 1) if state == b"\x00" else ()

    def step(self, state, action, rng=None):
        return (b"\x01", [2.0, 5.0][action])

    def is_terminal(self, state):
        return state != b"\x00"

    def horizon_bound(self):
        return 1

    def action_space_size(self):
        return 2

    def progress(self, state):
        return state[0]


class SpinGame(GameSpec):
    """Deliberately cyclic: the solver must refuse it, not hang."""

    name = "spin"

    def initial_state(self):
        return b"\x00"

    def mover(self, state):
        return PlayerId.P1

    def legal_actions(self, state):
        return (0,)

    def step(self, state, action, rng=None):
        return (b"\x00", 0.0)

    def is_terminal(self, state):
        return False

    def horizon_bound(self):
        return 10

    def action_space_size(self):
        return 1

    def progress(self, state):
        return 0


class FirstLegalPolicy(Policy):
    name = "first-legal"
    deterministic = True

    def __init__(self, game):
        self.game = game

    def act(self, state, rng):
        return self.game.legal_actions(state)[0]


def test_solve_one_shot():
    g = OneShotGame()
    sol = solve_exact(g)
    assert sol.v_star[g.initial_state()] == 5.0
    assert sol.pi_star[g.initial_state()] == 1
    assert sol.reachable_count == 2


def test_solve_matches_plain_negamax_dab(dab11, dab12):
    assert solve_exact(dab11).root_value(dab11) == plain_negamax(dab11) == DAB_1X1_ROOT
    assert solve_exact(dab12).root_value(dab12) == plain_negamax(dab12) == DAB_1X2_ROOT


def test_solve_ttt_root_and_count(ttt):
    sol = solve_exact(ttt)
    assert sol.root_value(ttt) == TTT_ROOT
    assert sol.reachable_count == TTT_REACHABLE


def test_fixed_point_certificate(dab12):
    g = dab12
    sol = solve_exact(g)
    for (s, a), qv in sol.q_star.entries.items():
        nxt, reward = g.step(s, a)
        nxt_value = sol.v_star.get(nxt, 0.0)
        sign = 1 if g.mover(nxt) is g.mover(s) else -1
        assert qv == reward + sign * nxt_value
        assert sol.v_star[s] == max(
            sol.q_star.entries[(s, b)] for b in g.legal_actions(s)
        )


def test_budget_exceeded(ttt):
    with pytest.raises(BudgetExceededError):
        solve_exact(ttt, budget=100)
    with pytest.raises(BudgetExceededError):
        enumerate_reachable(ttt, budget=100)


def test_cycle_detected():
    with pytest.raises(CycleDetectedError):
        solve_exact(SpinGame())


def test_policy_pair_value_consistent_with_solution(ttt):
    sol = solve_exact(ttt)
    star = ExactPolicy(sol)
    values = policy_pair_value(ttt, star, star, states=[ttt.initial_state()])
    s = ttt.initial_state()
    while not ttt.is_terminal(s):
        assert values[s] == sol.v_star[s]
        s, _ = ttt.step(s, sol.pi_star[s])


def test_policy_pair_value_matches_rollout(ttt):
    pi1 = HeuristicPolicy(ttt, "center-first")
    pi2 = HeuristicPolicy(ttt, "win-block")
    root = ttt.initial_state()
    values = policy_pair_value(ttt, pi1, pi2, states=[root])
    payoff = episode_payoff(rollout(ttt, (pi1, pi2), seed=0), PlayerId.P1)
    assert ttt.sign(root, PlayerId.P1) * values[root] == payoff


def test_policy_pair_value_rejects_stochastic(ttt):
    with pytest.raises(ValueError):
        policy_pair_value(ttt, UniformRandomPolicy(ttt), HeuristicPolicy(ttt, "win-block"))


def test_zero_reward_game_values_are_zero():
    class DullGame(OneShotGame):
        def step(self, state, action, rng=None):
            return (b"\x01", 0.0)

    g = DullGame()
    values = policy_pair_value(g, FirstLegalPolicy(g), FirstLegalPolicy(g))
    assert set(values.values()) == {0.0}


def test_best_response_to_star_is_game_value(ttt):
    sol = solve_exact(ttt)
    star = ExactPolicy(sol)
    root = ttt.initial_state()
    assert best_response_value(ttt, star, PlayerId.P1)[root] == TTT_ROOT
    assert best_response_value(ttt, star, PlayerId.P2)[root] == -TTT_ROOT


def test_best_response_to_weak_policy_is_no_better(ttt):
    weak = FirstLegalPolicy(ttt)
    root = ttt.initial_state()
    security = best_response_value(ttt, weak, PlayerId.P1)[root]
    assert security <= TTT_ROOT


def test_best_response_single_action_path():
    g = OneShotGame()
    values = best_response_value(g, FirstLegalPolicy(g), PlayerId.P1)
    assert values[g.initial_state()] == 2.0  # forced first action


def test_verify_saddle_clean(ttt, dab11, dab12):
    for g in (ttt, dab11, dab12):
        sol = solve_exact(g)
        challengers = [HeuristicPolicy(g, n, seed=5) for n in heuristic_names(g)]
        check = verify_saddle(g, sol, challengers)
        assert check.ok, check.worst


def test_verify_saddle_reflexive(dab12):
    sol = solve_exact(dab12)
    check = verify_saddle(dab12, sol, [ExactPolicy(sol)])
    assert check.ok


def test_verify_saddle_flags_corruption(dab12):
    g = dab12
    sol = solve_exact(g)
    root = g.initial_state()
    # promote the root's worst action to look best, so pi_star plays it
    worst = min(g.legal_actions(root), key=lambda a: sol.q_star.entries[(root, a)])
    if sol.q_star.entries[(root, worst)] == sol.v_star[root]:
        pytest.skip("all root actions equal; cannot corrupt")
    sol.q_star.entries[(root, worst)] = sol.v_star[root] + 10.0
    sol.pi_star[root] = worst
    challengers = [HeuristicPolicy(g, n, seed=5) for n in heuristic_names(g)]
    check = verify_saddle(g, sol, challengers)
    assert not check.ok
    assert check.worst is not None


def test_upward_perturbation_stays_above_pair_value(ttt):
    # lifting the value at one P1 state keeps it a pointwise upper bound on
    # the fixed pair's value over that state's subtree
    sol = solve_exact(ttt)
    star = ExactPolicy(sol)
    reachable = enumerate_reachable(ttt)
    s_star = next(
        s for s in reachable if ttt.legal_actions(s) and ttt.mover(s) is PlayerId.P1
    )
    delta = 0.5
    lifted = dict(sol.v_star)
    lifted[s_star] += delta
    pair_values = policy_pair_value(ttt, star, star, states=[s_star])
    s = s_star
    while not ttt.is_terminal(s):
        sgn1 = ttt.sign(s, PlayerId.P1)
        assert sgn1 * lifted[s] >= sgn1 * pair_values[s] or sgn1 == -1
        assert lifted[s] >= pair_values[s] if s == s_star else lifted[s] == pair_values[s]
        s, _ = ttt.step(s, sol.pi_star[s])


def test_solution_exports_in_table_format(tmp_path, dab11):
    from turnq.oracle import export_solution
    from turnq.qlearn import QTable

    sol = solve_exact(dab11)
    path = tmp_path / "star.bin"
    export_solution(sol, path)
    assert QTable.load(path).entries == sol.q_star.entries
