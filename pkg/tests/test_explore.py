import pytest

from turnq.core import PlayerId
from turnq.explore import (
    ExitConfig,
    ProtectSets,
    build_slots,
    schedule_next,
    train,
    visited_from_qtable,
    visited_invariance_check,
    write_train_csv,
)
from turnq.games import HeuristicPolicy
from turnq.oracle import enumerate_reachable, solve_exact
from turnq.qlearn import LearningRateSchedule, q_target, state_value

LADDER = [0.0, 0.5, 2.0, 8.0]


def _protect(game, names, seed=0):
    return ProtectSets.from_heuristics(game, list(names), list(names), seed=seed)


def test_schedule_round_robin_ordering(ttt):
    protect = _protect(ttt, ["random-legal", "center-first"])
    slots = build_slots(protect, [])
    assert len(slots) == 5
    assert schedule_next(0, slots, 10**9).label == "random-legal+exploit"
    assert schedule_next(4, slots, 10**9).label == "exploit+exploit"
    assert schedule_next(5, slots, 10**9).label == "random-legal+exploit"  # period 5


def test_schedule_empty_protect_no_tempering(ttt):
    slots = build_slots(ProtectSets(), [])
    assert len(slots) == 1
    for ep in range(7):
        assert schedule_next(ep, slots, 10**9).label == "exploit+exploit"


def test_schedule_drops_tempered_slots_after_cutoff():
    slots = build_slots(ProtectSets(), [0.0, 1.0, 10.0])
    assert sum(s.tempered for s in slots) == 9
    for ep in range(100, 120):
        assert not schedule_next(ep, slots, temper_off_episode=100).tempered
    assert any(schedule_next(ep, slots, 200).tempered for ep in range(100, 120))


def test_exit_config_validation():
    with pytest.raises(ValueError):
        ExitConfig(window=0)
    with pytest.raises(ValueError):
        ExitConfig(q_tolerance=-1)
    with pytest.raises(ValueError):
        ExitConfig(max_episodes=0)


def test_window_must_cover_slots(ttt):
    protect = _protect(ttt, ["random-legal", "center-first"])
    with pytest.raises(ValueError):
        train(ttt, protect, ExitConfig(window=3), LearningRateSchedule(), [], seed=0)


def test_train_dab11_reaches_oracle_root(dab11):
    res = train(dab11, ProtectSets(), ExitConfig(), LearningRateSchedule(), LADDER, seed=1)
    assert res.report.converged
    assert state_value(res.q, dab11.initial_state(), dab11) == -1.0


def test_train_full_exploration_matches_oracle(dab12):
    res = train(dab12, ProtectSets(), ExitConfig(), LearningRateSchedule(), LADDER, seed=3)
    sol = solve_exact(dab12)
    assert res.report.converged
    assert res.q.entries == sol.q_star.entries


def test_fixed_point_residual_zero_on_exit(tiny_skirmish):
    g = tiny_skirmish
    protect = _protect(g, ["greedy-shoot", "city-holder"])
    res = train(
        g, protect, ExitConfig(temper_off_episode=200), LearningRateSchedule(), LADDER, seed=5
    )
    assert res.report.converged
    from turnq.core import TransitionSample

    for s, a in res.visited.pairs:
        nxt, reward = g.step(s, a)
        sample = TransitionSample(s, a, nxt, reward)
        assert res.q.entries[(s, a)] == q_target(sample, res.q, g)


def test_exit_requires_quiet_window(dab11):
    res = train(dab11, ProtectSets(), ExitConfig(), LearningRateSchedule(), LADDER, seed=1)
    window = 4 * len(build_slots(ProtectSets(), LADDER))
    tail = res.report.records[-window:]
    assert all(r.visited_states == tail[0].visited_states for r in tail)
    assert all(r.max_dq == 0.0 for r in tail)


def test_report_shape_and_monotone_visits(dab12):
    res = train(dab12, ProtectSets(), ExitConfig(), LearningRateSchedule(), LADDER, seed=9)
    episodes = [r.episode for r in res.report.records]
    assert episodes == list(range(len(episodes)))
    sizes = [r.visited_states for r in res.report.records]
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))
    assert res.report.updates >= sum(r.samples for r in res.report.records)


def test_non_convergence_reported_not_raised(tiny_skirmish):
    res = train(
        tiny_skirmish,
        _protect(tiny_skirmish, ["greedy-shoot"]),
        ExitConfig(max_episodes=3, window=20),
        LearningRateSchedule(),
        [],
        seed=0,
    )
    assert not res.report.converged
    assert "max_episodes" in res.report.reason
    assert res.report.episodes == 3


def test_invariance_check_passes_after_protected_run(tiny_skirmish):
    g = tiny_skirmish
    protect = _protect(g, ["greedy-shoot", "city-holder"])
    res = train(
        g, protect, ExitConfig(temper_off_episode=150), LearningRateSchedule(), LADDER, seed=2
    )
    assert res.report.converged
    ok, violation = visited_invariance_check(res.q, res.visited, protect, g)
    assert ok and violation is None


def test_invariance_check_on_full_reachable_set(ttt):
    from turnq.explore import VisitedSet
    from turnq.qlearn import QTable

    visited = VisitedSet(states={s: None for s in enumerate_reachable(ttt)})
    ok, _ = visited_invariance_check(QTable(), visited, ProtectSets(), ttt)
    assert ok


def test_invariance_check_reports_counterexample(tiny_skirmish):
    g = tiny_skirmish
    protect = _protect(g, ["greedy-shoot"])
    res = train(
        g, protect, ExitConfig(temper_off_episode=150), LearningRateSchedule(), LADDER, seed=2
    )
    # drop one successor that a scheduled pair reaches from the root
    pol = protect.p1[0]
    missing, _ = g.step(g.initial_state(), pol.act(g.initial_state(), None))
    del res.visited.states[missing]
    ok, violation = visited_invariance_check(res.q, res.visited, protect, g)
    assert not ok
    assert violation[2] == missing


def test_invariance_check_rejects_stochastic_game(ttt):
    class CoinGame(type(ttt)):
        def is_deterministic(self):
            return False

    from turnq.explore import VisitedSet
    from turnq.qlearn import QTable

    with pytest.raises(ValueError):
        visited_invariance_check(QTable(), VisitedSet(), ProtectSets(), CoinGame())


def test_schedule_order_does_not_change_full_exploration_fixed_point(dab12):
    g = dab12
    names = ["random-legal", "safe-edge"]
    a = train(g, _protect(g, names), ExitConfig(), LearningRateSchedule(), LADDER, seed=4)
    b = train(
        g, _protect(g, list(reversed(names))), ExitConfig(), LearningRateSchedule(), LADDER, seed=11
    )
    assert a.report.converged and b.report.converged
    shared = set(a.visited.pairs) & set(b.visited.pairs)
    assert shared
    for key in shared:
        assert a.q.entries[key] == b.q.entries[key]


def test_visited_from_qtable_roundtrip(tiny_skirmish):
    g = tiny_skirmish
    protect = _protect(g, ["greedy-shoot"])
    res = train(
        g, protect, ExitConfig(temper_off_episode=100), LearningRateSchedule(), LADDER, seed=8
    )
    rebuilt = visited_from_qtable(g, res.q)
    assert set(rebuilt.pairs) == set(res.visited.pairs)
    assert set(rebuilt.states) == set(res.visited.states)


def test_train_csv_layout(tmp_path, dab11):
    res = train(dab11, ProtectSets(), ExitConfig(), LearningRateSchedule(), LADDER, seed=1)
    path = tmp_path / "train.csv"
    write_train_csv(res.report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "episode,slot,samples,visited_states,max_dq,root_value,ms"
    assert len(lines) == res.report.episodes + 1
    first = lines[1].split(",")
    assert first[0] == "0" and first[-1] == "0"


def test_train_deterministic_given_seed(dab11):
    runs = [
        train(dab11, ProtectSets(), ExitConfig(), LearningRateSchedule(), LADDER, seed=77)
        for _ in range(2)
    ]
    assert runs[0].q.to_bytes() == runs[1].q.to_bytes()
    assert [r.root_value for r in runs[0].report.records] == [
        r.root_value for r in runs[1].report.records
    ]
