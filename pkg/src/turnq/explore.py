"""Training loop with opponent-informed scheduling and tempered exploration.

Episodes are generated round-robin over a slot list built from the
protect sets: each protect policy paired against the current greedy
policy, a greedy-vs-greedy slot, and (until disabled) tempered Boltzmann
slots at each configured temperature.  The table is frozen during an
episode and updated from its trace afterwards, in time order.

The run may exit only when, over a full scheduling window, no new state
was visited and no update moved the table by more than the tolerance.
In the exact regime (deterministic game, tolerance 0, unit step size)
the exit is then sealed by a finalization pass: the visited set is
closed under the relevant action choices (every legal action while
tempering is still enabled, the scheduled policy pairs once it is off),
with the missing transitions injected as ordinary off-policy samples,
and all stored transitions are replayed until every visited entry sits
exactly on its backup target.  Exiting with tempering enabled therefore
means the entire reachable space was explored, and exiting without it
certifies the visited set invariant plus a zero residual on it.
"""

from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field

from .core import (
    GameSpec,
    PlayerId,
    Policy,
    StateKey,
    TransitionSample,
    rollout,
)
from .qlearn import (
    BoltzmannPolicy,
    ExploitPolicy,
    LearningRateSchedule,
    QTable,
    exploit_action,
    q_update,
    state_value,
)


@dataclass
class ProtectSets:
    """Opponent policies each player's greedy policy must stay safe against."""

    p1: list[Policy] = field(default_factory=list)
    p2: list[Policy] = field(default_factory=list)

    @classmethod
    def from_heuristics(cls, game: GameSpec, p1: list[str], p2: list[str], seed: int = 0):
        from .games import HeuristicPolicy

        return cls(
            p1=[HeuristicPolicy(game, n, seed) for n in p1],
            p2=[HeuristicPolicy(game, n, seed) for n in p2],
        )


@dataclass(frozen=True)
class ScheduleSlot:
    """One entry of the round-robin: what each side plays for an episode."""

    label: str
    p1_kind: tuple
    p2_kind: tuple
    tempered: bool = False

    def materialize(
        self, game: GameSpec, q: QTable, protect: ProtectSets
    ) -> tuple[Policy, Policy]:
        def build(kind, side_policies):
            if kind[0] == "exploit":
                return ExploitPolicy(game, q)
            if kind[0] == "boltz":
                return BoltzmannPolicy(game, q, kind[1])
            return side_policies[kind[1]]

        return build(self.p1_kind, protect.p1), build(self.p2_kind, protect.p2)


def build_slots(protect: ProtectSets, temperatures: list[float]) -> list[ScheduleSlot]:
    slots = []
    for i, pol in enumerate(protect.p1):
        slots.append(ScheduleSlot(f"{pol.name}+exploit", ("protect", i), ("exploit",)))
    for j, pol in enumerate(protect.p2):
        slots.append(ScheduleSlot(f"exploit+{pol.name}", ("exploit",), ("protect", j)))
    slots.append(ScheduleSlot("exploit+exploit", ("exploit",), ("exploit",)))
    for beta in temperatures:
        slots.append(
            ScheduleSlot(f"boltz{beta:g}+exploit", ("boltz", beta), ("exploit",), tempered=True)
        )
    for beta in temperatures:
        slots.append(
            ScheduleSlot(f"exploit+boltz{beta:g}", ("exploit",), ("boltz", beta), tempered=True)
        )
    # both sides tempered: needed so exploration can reach branches where
    # neither side is currently greedy, without which off-argmax regions of
    # both players stay unsampled forever
    for beta in temperatures:
        slots.append(
            ScheduleSlot(f"boltz{beta:g}+boltz{beta:g}", ("boltz", beta), ("boltz", beta), tempered=True)
        )
    return slots


def schedule_next(
    episode: int, slots: list[ScheduleSlot], temper_off_episode: int
) -> ScheduleSlot:
    """Round-robin slot for this episode; tempered slots drop out after cutoff."""
    active = slots if episode < temper_off_episode else [s for s in slots if not s.tempered]
    return active[episode % len(active)]


@dataclass
class VisitedSet:
    """States and (state, action) pairs seen in any training sample."""

    states: dict[StateKey, None] = field(default_factory=dict)
    pairs: dict[tuple[StateKey, int], None] = field(default_factory=dict)

    def add_sample(self, sample: TransitionSample) -> int:
        """Record one sample; returns how many previously unseen states it added."""
        new = 0
        if sample.state not in self.states:
            self.states[sample.state] = None
            new += 1
        if sample.next_state not in self.states:
            self.states[sample.next_state] = None
            new += 1
        self.pairs[(sample.state, sample.action)] = None
        return new


@dataclass
class ExitConfig:
    window: int | None = None  # None: 4x the slot count
    q_tolerance: float = 0.0
    temper_off_episode: int | None = None  # None: tempering never disabled
    max_episodes: int = 100_000
    closure_budget: int = 2_000_000  # state cap for the finalization pass

    def __post_init__(self):
        if self.window is not None and self.window < 1:
            raise ValueError("window must be positive")
        if self.q_tolerance < 0:
            raise ValueError("q_tolerance must be >= 0")
        if self.max_episodes < 1:
            raise ValueError("max_episodes must be positive")


@dataclass
class EpisodeRecord:
    episode: int
    slot: str
    samples: int
    visited_states: int
    max_dq: float
    root_value: float
    wall_ms: float


@dataclass
class TrainReport:
    records: list[EpisodeRecord] = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    updates: int = 0  # cumulative q_update count, including finalization

    @property
    def episodes(self) -> int:
        return len(self.records)


@dataclass
class TrainResult:
    q: QTable
    visited: VisitedSet
    report: TrainReport


def _policy_pairs(game: GameSpec, q: QTable, protect: ProtectSets):
    """The scheduled deterministic pairs: protect-vs-greedy and greedy-vs-greedy."""
    exploit = ExploitPolicy(game, q)
    pairs = [(pol, exploit, f"{pol.name}+exploit") for pol in protect.p1]
    pairs += [(exploit, pol, f"exploit+{pol.name}") for pol in protect.p2]
    pairs.append((exploit, exploit, "exploit+exploit"))
    return pairs


def _finalize(
    game: GameSpec,
    q: QTable,
    visited: VisitedSet,
    protect: ProtectSets,
    schedule: LearningRateSchedule,
    full: bool,
    budget: int,
) -> tuple[int, int]:
    """Close the visited set and settle residuals; returns (changes, updates).

    `full` closes over every legal action (full exploration); otherwise only
    the actions the scheduled policy pairs would take.  Injected transitions
    and replays go through the ordinary update, so this is plain off-policy
    sample reuse on a deterministic game.  Each settle pass replays stored
    transitions deepest-first (by the game's progress counter), which pins
    every entry to its backup target in a single sweep.
    """
    changes = 0
    updates = 0
    while True:
        round_changes = 0
        # closure pass: visit whatever the relevant action choices reach
        worklist = list(visited.states)
        while worklist:
            grown = []
            for s in worklist:
                legal = game.legal_actions(s)
                if not legal:
                    continue
                if full:
                    actions = legal
                else:
                    prot = protect.p1 if game.mover(s) is PlayerId.P1 else protect.p2
                    actions = [exploit_action(q, s, game)]
                    for pol in prot:
                        a = pol.act(s, None)
                        if a not in actions:
                            actions.append(a)
                for a in actions:
                    if (s, a) in visited.pairs:
                        continue
                    nxt, reward = game.step(s, a)
                    old = q.entries.get((s, a), 0.0)
                    new = q_update(q, TransitionSample(s, a, nxt, reward), schedule, game)
                    updates += 1
                    visited.pairs[(s, a)] = None
                    if new != old:
                        round_changes += 1
                    if nxt not in visited.states:
                        visited.states[nxt] = None
                        grown.append(nxt)
                        round_changes += 1
                        if len(visited.states) > budget:
                            raise RuntimeError(
                                f"finalization exceeded closure budget of {budget} states"
                            )
            worklist = grown
        # settle pass: one deepest-first replay of every stored transition
        for s, a in sorted(visited.pairs, key=lambda k: -game.progress(k[0])):
            nxt, reward = game.step(s, a)
            old = q.entries.get((s, a), 0.0)
            new = q_update(q, TransitionSample(s, a, nxt, reward), schedule, game)
            updates += 1
            if new != old:
                round_changes += 1
        changes += round_changes
        if round_changes == 0:
            return changes, updates


def train(
    game: GameSpec,
    protect: ProtectSets,
    exit_cfg: ExitConfig,
    schedule: LearningRateSchedule,
    temperatures: list[float],
    seed: int,
) -> TrainResult:
    """Run scheduled episodes until the invariance exit condition holds.

    Returns the table, the visited set, and the per-episode report; a run
    that hits max_episodes without satisfying the exit condition is
    reported as non-converged, not raised.
    """
    slots = build_slots(protect, temperatures)
    window = exit_cfg.window if exit_cfg.window is not None else 4 * len(slots)
    if window < len(slots):
        raise ValueError(f"window {window} smaller than slot count {len(slots)}")
    temper_off = (
        exit_cfg.temper_off_episode
        if exit_cfg.temper_off_episode is not None
        else exit_cfg.max_episodes
    )
    exact = game.is_deterministic() and exit_cfg.q_tolerance == 0.0 and schedule.is_exact

    rng = random.Random(seed)
    q = QTable()
    visited = VisitedSet()
    report = TrainReport()
    root = game.initial_state()
    recent_new: deque[int] = deque(maxlen=window)
    recent_dq: deque[float] = deque(maxlen=window)

    for episode in range(exit_cfg.max_episodes):
        t0 = time.perf_counter()
        slot = schedule_next(episode, slots, temper_off)
        pair = slot.materialize(game, q, protect)
        trace = rollout(game, pair, seed=rng.getrandbits(62))
        new_states = 0
        max_dq = 0.0
        for sample in trace.samples:
            new_states += visited.add_sample(sample)
            old = q.entries.get((sample.state, sample.action), 0.0)
            new = q_update(q, sample, schedule, game)
            report.updates += 1
            delta = abs(new - old)
            if delta > max_dq:
                max_dq = delta
        recent_new.append(new_states)
        recent_dq.append(max_dq)
        report.records.append(
            EpisodeRecord(
                episode=episode,
                slot=slot.label,
                samples=trace.length,
                visited_states=len(visited.states),
                max_dq=max_dq,
                root_value=state_value(q, root, game),
                wall_ms=(time.perf_counter() - t0) * 1000.0,
            )
        )
        if (
            len(recent_new) == window
            and sum(recent_new) == 0
            and max(recent_dq) <= exit_cfg.q_tolerance
        ):
            if not exact:
                report.converged = True
                report.reason = "window quiet"
                break
            tempering_active = episode + 1 < temper_off and any(s.tempered for s in slots)
            changes, updates = _finalize(
                game,
                q,
                visited,
                protect,
                schedule,
                full=tempering_active,
                budget=exit_cfg.closure_budget,
            )
            report.updates += updates
            if changes == 0:
                report.converged = True
                report.reason = (
                    "window quiet, fully explored" if tempering_active
                    else "window quiet, visited set closed and settled"
                )
                break
            # the finalization discovered or moved something: require a fresh
            # quiet window before trying again
            recent_new.clear()
            recent_dq.clear()
    if not report.converged:
        report.reason = report.reason or f"max_episodes={exit_cfg.max_episodes} reached"
    return TrainResult(q=q, visited=visited, report=report)


def visited_invariance_check(
    q: QTable,
    visited: VisitedSet,
    protect: ProtectSets,
    game: GameSpec,
) -> tuple[bool, tuple[StateKey, str, StateKey] | None]:
    """Verify the visited set is closed under every scheduled policy pair.

    Returns (True, None) when, from every visited non-terminal state, each
    protect-vs-greedy and greedy-vs-greedy pair leads back into the visited
    set; otherwise (False, (state, pair label, escaping successor)).
    """
    if not game.is_deterministic():
        raise ValueError("invariance check by enumeration needs a deterministic game")
    pairs = _policy_pairs(game, q, protect)
    for s in visited.states:
        if not game.legal_actions(s):
            continue
        who = game.mover(s)
        for pi1, pi2, label in pairs:
            pol = pi1 if who is PlayerId.P1 else pi2
            nxt, _ = game.step(s, pol.act(s, None), None)
            if nxt not in visited.states:
                return False, (s, label, nxt)
    return True, None


def visited_from_qtable(game: GameSpec, q: QTable) -> VisitedSet:
    """Reconstruct the visited set implied by a table's entries.

    Every stored pair was updated from a sample, so for a deterministic
    game the pair keys plus their recomputed successors recover exactly the
    states and pairs that training saw.
    """
    visited = VisitedSet()
    for s, a in q.entries:
        visited.states[s] = None
        visited.pairs[(s, a)] = None
        nxt, _ = game.step(s, a, None)
        visited.states[nxt] = None
    return visited


TRAIN_CSV_HEADER = "episode,slot,samples,visited_states,max_dq,root_value,ms"


def write_train_csv(report: TrainReport, path) -> None:
    """Write the per-episode records.

    The ms column is pinned to 0 so identical runs produce byte-identical
    files; measured wall time stays on the in-memory records.
    """
    with open(path, "w", newline="") as fh:
        fh.write(TRAIN_CSV_HEADER + "\n")
        for r in report.records:
            fh.write(
                f"{r.episode},{r.slot},{r.samples},{r.visited_states},"
                f"{r.max_dq!r},{r.root_value!r},0\n"
            )
