"""Grid skirmish: a desk-scale two-faction wargame.

Units sit on a square grid with 4-neighborhood movement.  A faction's
turn consists of one action per live unit, in roster order; after the
last unit acts, control passes to the other faction and the game ends
after a fixed number of faction turns.  Combat is deterministic: a shot
removes health per the salvo table below (reduced by the defender's
terrain), and the shooter's faction is credited the health actually
removed.  When a faction's turn ends it is additionally credited +1 per
city cell occupied by one of its units.  Wiping out the enemy ends the
game immediately (the final city credit is still paid).

Salvo table (attacker row vs defender column, clear terrain):

              infantry  armor  artillery
    infantry      2       1        2
    armor         3       2        3
    artillery     2       2        1

Rough and urban terrain each reduce incoming damage by 1 (floor 0).
Ranges (Manhattan): infantry 1, armor 1, artillery 2.

State key layout (one byte each): turn counter, active roster index,
then 4 bytes per roster slot (type+1 or 0 if dead, x, y, health) for
faction 1 then faction 2.  Dead slots are zeroed so behaviorally equal
states share one key.  (turn counter, active index) grows on every
move, so play is acyclic by construction.
"""

from __future__ import annotations

import random

from ..core import ActionId, GameSpec, PlayerId, StateKey

UNIT_TYPES = ("infantry", "armor", "artillery")
TERRAIN_TYPES = ("clear", "rough", "urban")

SALVO_TABLE = (
    (2, 1, 2),  # infantry vs ...
    (3, 2, 3),  # armor vs ...
    (2, 2, 1),  # artillery vs ...
)
TERRAIN_DEFENSE = (0, 1, 1)  # clear, rough, urban
UNIT_RANGE = (1, 1, 2)
DEFAULT_HEALTH = (2, 3, 2)

PASS = 0
MOVE_DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0))  # actions 1..4: N, S, W, E
SHOOT_BASE = 5

DEAD = (0, 0, 0, 0)  # canonical dead roster slot: (type+1, x, y, health)


def salvo_damage(attacker_type: str, defender_type: str, terrain: str = "clear") -> int:
    """Health loss inflicted by one salvo, before capping at remaining health."""
    a = UNIT_TYPES.index(attacker_type)
    d = UNIT_TYPES.index(defender_type)
    t = TERRAIN_TYPES.index(terrain)
    return max(0, SALVO_TABLE[a][d] - TERRAIN_DEFENSE[t])


class GridSkirmish(GameSpec):
    def __init__(
        self,
        width: int,
        height: int,
        units_p1: list[tuple[str, int, int, int]],
        units_p2: list[tuple[str, int, int, int]],
        duration: int,
        cities: list[tuple[int, int]] | None = None,
        rough: list[tuple[int, int]] | None = None,
    ):
        if width < 1 or height < 1:
            raise ValueError("grid-skirmish needs width >= 1 and height >= 1")
        if duration < 1:
            raise ValueError("grid-skirmish needs duration >= 1")
        if not units_p1 or not units_p2:
            raise ValueError("grid-skirmish needs at least one unit per side")
        if width > 255 or height > 255 or 2 * duration > 255:
            raise ValueError("grid-skirmish dimensions exceed key encoding limits")
        self.width = width
        self.height = height
        self.duration = duration
        self.cities = frozenset(tuple(c) for c in cities or [])
        self.rough = frozenset(tuple(r) for r in rough or [])
        self.name = f"grid-skirmish-{width}x{height}"

        rosters = []
        seen = set()
        for side in (units_p1, units_p2):
            roster = []
            for utype, x, y, health in side:
                if utype not in UNIT_TYPES:
                    raise ValueError(f"unknown unit type {utype!r}")
                if not (0 <= x < width and 0 <= y < height):
                    raise ValueError(f"unit position ({x}, {y}) off the grid")
                if (x, y) in seen:
                    raise ValueError(f"two units share cell ({x}, {y})")
                if not 1 <= health <= 255:
                    raise ValueError("unit health must be in 1..255")
                seen.add((x, y))
                roster.append((UNIT_TYPES.index(utype) + 1, x, y, health))
            rosters.append(tuple(roster))
        self._initial_rosters = tuple(rosters)
        self.max_roster = max(len(r) for r in rosters)
        self._decode_cache: dict[bytes, tuple] = {}
        self._legal_cache: dict[bytes, tuple[int, ...]] = {}

    # -- encoding ----------------------------------------------------------

    def _encode(self, turns: int, active: int, r1: tuple, r2: tuple) -> StateKey:
        out = bytearray((turns, active))
        for roster in (r1, r2):
            for slot in roster:
                out.extend(slot)
        return bytes(out)

    def decode(self, state: StateKey) -> tuple[int, int, tuple, tuple]:
        """(turn counter, active roster index, faction-1 roster, faction-2 roster)."""
        cached = self._decode_cache.get(state)
        if cached is not None:
            return cached
        turns, active = state[0], state[1]
        pos = 2
        rosters = []
        for side in self._initial_rosters:
            roster = []
            for _ in side:
                roster.append(tuple(state[pos : pos + 4]))
                pos += 4
            rosters.append(tuple(roster))
        decoded = (turns, active, rosters[0], rosters[1])
        self._decode_cache[state] = decoded
        return decoded

    def initial_state(self) -> StateKey:
        return self._encode(0, 0, *self._initial_rosters)

    # -- board queries -----------------------------------------------------

    def terrain_at(self, x: int, y: int) -> str:
        if (x, y) in self.cities:
            return "urban"
        if (x, y) in self.rough:
            return "rough"
        return "clear"

    def mover(self, state: StateKey) -> PlayerId:
        return PlayerId.P1 if state[0] % 2 == 0 else PlayerId.P2

    def _wiped(self, roster: tuple) -> bool:
        return all(u[0] == 0 for u in roster)

    def is_terminal(self, state: StateKey) -> bool:
        turns, _, r1, r2 = self.decode(state)
        return turns >= 2 * self.duration or self._wiped(r1) or self._wiped(r2)

    def active_unit(self, state: StateKey) -> tuple[int, tuple[int, int, int, int]]:
        """(roster index, unit tuple) of the unit that acts next."""
        turns, active, r1, r2 = self.decode(state)
        roster = r1 if turns % 2 == 0 else r2
        return active, roster[active]

    def legal_actions(self, state: StateKey) -> tuple[ActionId, ...]:
        acts = self._legal_cache.get(state)
        if acts is not None:
            return acts
        if self.is_terminal(state):
            self._legal_cache[state] = ()
            return ()
        turns, active, r1, r2 = self.decode(state)
        own, enemy = (r1, r2) if turns % 2 == 0 else (r2, r1)
        unit = own[active]
        _, ux, uy, _ = unit
        occupied = {
            (u[1], u[2]) for u in r1 + r2 if u[0] != 0
        }
        out = [PASS]
        for i, (dx, dy) in enumerate(MOVE_DELTAS):
            nx, ny = ux + dx, uy + dy
            if 0 <= nx < self.width and 0 <= ny < self.height and (nx, ny) not in occupied:
                out.append(1 + i)
        reach = UNIT_RANGE[unit[0] - 1]
        for j, tgt in enumerate(enemy):
            if tgt[0] != 0 and abs(tgt[1] - ux) + abs(tgt[2] - uy) <= reach:
                out.append(SHOOT_BASE + j)
        acts = tuple(out)
        self._legal_cache[state] = acts
        return acts

    def _city_bonus(self, roster: tuple) -> int:
        return sum(1 for u in roster if u[0] != 0 and (u[1], u[2]) in self.cities)

    def step(
        self, state: StateKey, action: ActionId, rng: random.Random | None = None
    ) -> tuple[StateKey, float]:
        turns, active, r1, r2 = self.decode(state)
        p1_moving = turns % 2 == 0
        own = list(r1 if p1_moving else r2)
        enemy = list(r2 if p1_moving else r1)
        unit = own[active]
        reward = 0

        if action == PASS:
            pass
        elif 1 <= action < SHOOT_BASE:
            dx, dy = MOVE_DELTAS[action - 1]
            own[active] = (unit[0], unit[1] + dx, unit[2] + dy, unit[3])
        else:
            j = action - SHOOT_BASE
            tgt = enemy[j]
            dmg = max(
                0,
                SALVO_TABLE[unit[0] - 1][tgt[0] - 1]
                - TERRAIN_DEFENSE[TERRAIN_TYPES.index(self.terrain_at(tgt[1], tgt[2]))],
            )
            dealt = min(dmg, tgt[3])
            reward += dealt
            if dealt >= tgt[3]:
                enemy[j] = DEAD
            else:
                enemy[j] = (tgt[0], tgt[1], tgt[2], tgt[3] - dealt)

        own_t, enemy_t = tuple(own), tuple(enemy)
        if self._wiped(enemy_t):
            reward += self._city_bonus(own_t)
            turns_out, active_out = turns, 0
        else:
            nxt = next((i for i in range(active + 1, len(own_t)) if own_t[i][0] != 0), None)
            if nxt is not None:
                turns_out, active_out = turns, nxt
            else:
                reward += self._city_bonus(own_t)
                turns_out = turns + 1
                if turns_out >= 2 * self.duration:
                    active_out = 0
                else:
                    active_out = next(i for i in range(len(enemy_t)) if enemy_t[i][0] != 0)
        r1_out, r2_out = (own_t, enemy_t) if p1_moving else (enemy_t, own_t)
        return self._encode(turns_out, active_out, r1_out, r2_out), float(reward)

    def horizon_bound(self) -> int:
        return self.duration * (len(self._initial_rosters[0]) + len(self._initial_rosters[1]))

    def action_space_size(self) -> int:
        return SHOOT_BASE + self.max_roster

    def progress(self, state: StateKey) -> int:
        # (turn counter, active index) grows lexicographically on every move
        # except into wipe-out terminals, which never need ordering
        return state[0] * (self.max_roster + 1) + state[1]

    def is_valid_key(self, state: StateKey) -> bool:
        n = len(self._initial_rosters[0]) + len(self._initial_rosters[1])
        if len(state) != 2 + 4 * n:
            return False
        if state[0] > 2 * self.duration:
            return False
        try:
            _, _, r1, r2 = self.decode(state)
        except Exception:
            return False
        for u in r1 + r2:
            if u[0] > len(UNIT_TYPES):
                return False
            if u[0] != 0 and not (u[1] < self.width and u[2] < self.height and u[3] >= 1):
                return False
            if u[0] == 0 and u != DEAD:
                return False
        return True
