import random

import pytest

from turnq.core import (
    EpisodeTrace,
    IllegalActionError,
    PlayerId,
    Policy,
    TransitionSample,
    UniformRandomPolicy,
    episode_payoff,
    rollout,
)


class FixedActionPolicy(Policy):
    def __init__(self, action):
        self.action = action
        self.name = f"always-{action}"

    def act(self, state, rng):
        return self.action


def test_opponent_involution():
    assert PlayerId.P1.opponent is PlayerId.P2
    assert PlayerId.P2.opponent is PlayerId.P1


def test_ttt_rollout_alternates_and_bounded(ttt):
    p = UniformRandomPolicy(ttt)
    trace = rollout(ttt, (p, p), seed=123)
    assert 5 <= trace.length <= 9
    for i, who in enumerate(trace.movers):
        assert who is (PlayerId.P1 if i % 2 == 0 else PlayerId.P2)


def test_dab_1x1_every_episode_is_four_moves(dab11):
    p = UniformRandomPolicy(dab11)
    for seed in range(10):
        assert rollout(dab11, (p, p), seed=seed).length == 4


def test_seeded_rollout_reproducible(tiny_skirmish):
    g = tiny_skirmish
    p = UniformRandomPolicy(g)
    a = rollout(g, (p, p), seed=7)
    b = rollout(g, (p, p), seed=7)
    assert a.samples == b.samples
    assert a.terminal_state == b.terminal_state


def test_trace_samples_chain(ttt):
    p = UniformRandomPolicy(ttt)
    trace = rollout(ttt, (p, p), seed=5)
    for prev, nxt in zip(trace.samples, trace.samples[1:]):
        assert prev.next_state == nxt.state
    assert trace.samples[-1].next_state == trace.terminal_state


def test_mover_consistency(tiny_skirmish):
    g = tiny_skirmish
    p = UniformRandomPolicy(g)
    trace = rollout(g, (p, p), seed=11)
    for sample, who in zip(trace.samples, trace.movers):
        assert g.mover(sample.state) is who


def test_rollout_rejects_illegal_action(ttt):
    bad = FixedActionPolicy(4)  # center twice in a row is illegal
    with pytest.raises(IllegalActionError) as err:
        rollout(ttt, (bad, bad), seed=0)
    assert "always-4" in str(err.value)


def test_payoff_empty_trace_is_zero():
    assert episode_payoff(EpisodeTrace(), PlayerId.P1) == 0.0


def test_payoff_sign_convention():
    trace = EpisodeTrace(
        samples=[TransitionSample(b"a", 0, b"b", 3.0)],
        movers=[PlayerId.P1],
        terminal_state=b"b",
    )
    assert episode_payoff(trace, PlayerId.P1) == 3.0
    assert episode_payoff(trace, PlayerId.P2) == -3.0


@pytest.mark.parametrize("seed", range(20))
def test_zero_sum_payoffs(dab12, seed):
    p = UniformRandomPolicy(dab12)
    trace = rollout(dab12, (p, p), seed=seed)
    assert episode_payoff(trace, PlayerId.P1) + episode_payoff(trace, PlayerId.P2) == 0.0


def test_rollout_respects_horizon(ttt, dab12, tiny_skirmish):
    for g in (ttt, dab12, tiny_skirmish):
        p = UniformRandomPolicy(g)
        for seed in range(5):
            trace = rollout(g, (p, p), seed=seed)
            assert trace.length <= g.horizon_bound()
            assert g.is_terminal(trace.terminal_state)
