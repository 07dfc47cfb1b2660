"""MCTS baselines with (w + a) / (c + b) selection.

Two variants:

* ``standard`` -- one new litter per iteration; the playout below the new
  node is not stored.
* ``modified`` -- keeps everything a playout reveals (the whole new branch
  plus the siblings of its nodes) and updates counts on the full branch;
  re-selecting an already visited leaf replays its known outcome.

Counts are from the maximizer's point of view at the current root; a
reroot flips W to C - W so the engine can play either seat.
"""

from __future__ import annotations

import time

from .game_core import DrawPolicy, Position, binary_value
from .rng import Stream

FRONTIER, INTERNAL, LEAF = 0, 1, 2
TIE_TOL = 1e-12


class MctsNode:
    __slots__ = ("parent", "move", "depth", "pos", "status", "turn_max", "children", "C", "W")

    def __init__(self, parent, move, depth, pos, turn_max):
        self.parent = parent
        self.move = move
        self.depth = depth
        self.pos = pos
        self.status = FRONTIER
        self.turn_max = turn_max
        self.children: list[MctsNode] = []
        self.C = 0
        self.W = 0


class MctsSearch:
    """State of one MCTS engine (standard or modified variant)."""

    def __init__(
        self,
        root_pos: Position,
        a: float,
        b: float,
        rng: Stream,
        policy: DrawPolicy = DrawPolicy(),
        modified: bool = False,
    ):
        if a <= 0 or b <= 0:
            raise ValueError("selection constants a, b must be positive")
        self.a = a
        self.b = b
        self.rng = rng
        self.policy = policy
        self.modified = modified
        self.flip = False
        self.iterations = 0
        self.nodes_created = 1
        self.root = MctsNode(None, None, root_pos.depth, root_pos, True)
        self._first_iteration()

    # -- helpers -------------------------------------------------------------

    def _leaf_value(self, pos: Position) -> int:
        v = binary_value(pos.raw_outcome, self.policy)
        return 1 - v if self.flip else v

    def _materialize(self, node: MctsNode) -> None:
        pos = node.pos
        node.children = [
            MctsNode(node, mv, node.depth + 1, pos.apply(mv), not node.turn_max)
            for mv in pos.legal_moves
        ]
        node.status = INTERNAL
        self.nodes_created += len(node.children)

    def _phi(self, node: MctsNode) -> float:
        v = node.W if node.parent.turn_max else node.C - node.W
        return (v + self.a) / (node.C + self.b)

    def _pick(self, nodes: list[MctsNode]) -> MctsNode:
        scores = [self._phi(c) for c in nodes]
        best = max(scores)
        ties = [i for i, sc in enumerate(scores) if sc >= best - TIE_TOL]
        pick = ties[0] if len(ties) == 1 else ties[self.rng.below(len(ties))]
        return nodes[pick]

    def _bump(self, node: MctsNode, value: int) -> None:
        while node is not None:
            node.C += 1
            node.W += value
            node = node.parent

    def _expand_and_rollout(self, node: MctsNode) -> None:
        """One iteration's growth below a tree leaf ``node`` (non-terminal)."""
        if self.modified:
            # keep the whole new branch plus all its litters
            pos = node.pos
            while not pos.is_terminal:
                self._materialize(node)
                moves = pos.legal_moves
                i = self.rng.below(len(moves)) if len(moves) > 1 else 0
                node = node.children[i]
                pos = node.pos
            node.status = LEAF
            self._bump(node, self._leaf_value(pos))
        else:
            # keep only the selected node's litter
            self._materialize(node)
            moves = node.pos.legal_moves
            i = self.rng.below(len(moves)) if len(moves) > 1 else 0
            child = node.children[i]
            pos = child.pos
            while not pos.is_terminal:
                mv = pos.legal_moves
                j = self.rng.below(len(mv)) if len(mv) > 1 else 0
                pos = pos.apply(mv[j])
            self._bump(child, self._leaf_value(pos))

    def _first_iteration(self) -> None:
        root = self.root
        if root.pos.is_terminal:
            root.status = LEAF
            self.iterations += 1
            return
        self._expand_and_rollout(root)
        self.iterations += 1

    # -- iterations ----------------------------------------------------------

    def step(self) -> None:
        if self.root.status == LEAF:
            self.iterations += 1
            return
        node = self.root
        while node.status == INTERNAL:
            node = self._pick(node.children)
        if node.status == LEAF or node.pos.is_terminal:
            # a known outcome replays on its branch (tree unchanged)
            node.status = LEAF
            self._bump(node, self._leaf_value(node.pos))
        else:
            self._expand_and_rollout(node)
        self.iterations += 1

    def run(self, iterations: int | None = None, deadline: float | None = None) -> int:
        if iterations is None and deadline is None:
            raise ValueError("mcts needs an explicit budget")
        done = 0
        while iterations is None or done < iterations:
            if deadline is not None and time.perf_counter() >= deadline:
                break
            self.step()
            done += 1
        return done

    def best_move(self):
        children = self.root.children
        if not children:
            raise RuntimeError("root has no explored children")
        return self._pick(children).move

    def reroot(self, move) -> "MctsSearch":
        root = self.root
        new_root = None
        for c in root.children:
            if c.move == move:
                new_root = c
                break
        if new_root is None:
            raise ValueError(f"unknown move {move!r} at the search root")
        self.flip = not self.flip
        stack = [new_root]
        while stack:
            n = stack.pop()
            n.W = n.C - n.W
            n.turn_max = not n.turn_max
            stack.extend(n.children)
        new_root.parent = None
        new_root.move = None
        self.root = new_root
        if new_root.status == FRONTIER:
            # nothing retained below the new root: grow it afresh
            if new_root.pos.is_terminal:
                new_root.status = LEAF
            else:
                self._expand_and_rollout(new_root)
                self.iterations += 1
        return self
