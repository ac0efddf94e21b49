"""Dots and Boxes on an m x n box grid.

Edges are globally numbered: horizontal edges first, row-major over the
(m+1) x n horizontal slots, then vertical edges over the m x (n+1)
slots.  Drawing the fourth edge of a box scores +1 to the mover per box
completed, and the same player moves again after completing at least
one box; otherwise the turn passes.

State key: the drawn-edge bitmask (little-endian, fixed width) plus one
mover byte.  Completed boxes and scores are implied by the mask and the
reward stream, so they are not part of the key.
"""

from __future__ import annotations

import random

from ..core import ActionId, GameSpec, PlayerId, StateKey


class DotsAndBoxes(GameSpec):
    def __init__(self, rows: int = 1, cols: int = 1):
        if rows < 1 or cols < 1:
            raise ValueError("dots-and-boxes needs rows >= 1 and cols >= 1")
        self.rows = rows
        self.cols = cols
        self.h_count = (rows + 1) * cols
        self.v_count = rows * (cols + 1)
        self.n_edges = self.h_count + self.v_count
        self.mask_bytes = (self.n_edges + 7) // 8
        self.name = f"dots-and-boxes-{rows}x{cols}"
        # box (i, j) -> bitmask of its four edges
        self._box_masks: list[int] = []
        for i in range(rows):
            for j in range(cols):
                edges = (
                    i * cols + j,                              # top
                    (i + 1) * cols + j,                        # bottom
                    self.h_count + i * (cols + 1) + j,         # left
                    self.h_count + i * (cols + 1) + j + 1,     # right
                )
                m = 0
                for e in edges:
                    m |= 1 << e
                self._box_masks.append(m)
        # edge -> boxes it borders
        self._edge_boxes: list[tuple[int, ...]] = [() for _ in range(self.n_edges)]
        for b, m in enumerate(self._box_masks):
            for e in range(self.n_edges):
                if m >> e & 1:
                    self._edge_boxes[e] = self._edge_boxes[e] + (b,)
        self._full_mask = (1 << self.n_edges) - 1

    def _decode(self, state: StateKey) -> tuple[int, PlayerId]:
        mask = int.from_bytes(state[: self.mask_bytes], "little")
        who = PlayerId.P1 if state[self.mask_bytes] == 1 else PlayerId.P2
        return mask, who

    def _encode(self, mask: int, who: PlayerId) -> StateKey:
        return mask.to_bytes(self.mask_bytes, "little") + bytes(
            [1 if who is PlayerId.P1 else 2]
        )

    def initial_state(self) -> StateKey:
        return self._encode(0, PlayerId.P1)

    def mover(self, state: StateKey) -> PlayerId:
        return self._decode(state)[1]

    def legal_actions(self, state: StateKey) -> tuple[ActionId, ...]:
        mask = self._decode(state)[0]
        return tuple(e for e in range(self.n_edges) if not mask >> e & 1)

    def is_terminal(self, state: StateKey) -> bool:
        return self._decode(state)[0] == self._full_mask

    def step(
        self, state: StateKey, action: ActionId, rng: random.Random | None = None
    ) -> tuple[StateKey, float]:
        mask, who = self._decode(state)
        new_mask = mask | 1 << action
        completed = 0
        for b in self._edge_boxes[action]:
            bm = self._box_masks[b]
            if new_mask & bm == bm:
                completed += 1
        nxt_who = who if completed else who.opponent
        return self._encode(new_mask, nxt_who), float(completed)

    def horizon_bound(self) -> int:
        return self.n_edges

    def action_space_size(self) -> int:
        return self.n_edges

    def progress(self, state: StateKey) -> int:
        return self._decode(state)[0].bit_count()

    def is_valid_key(self, state: StateKey) -> bool:
        if len(state) != self.mask_bytes + 1 or state[self.mask_bytes] not in (1, 2):
            return False
        return int.from_bytes(state[: self.mask_bytes], "little") <= self._full_mask
