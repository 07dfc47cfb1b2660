"""Game abstraction and exact reference solvers.

Games are deterministic, alternate-move, complete-information and finite,
with win/loss outcomes after a configurable draw mapping.  J1 is the
maximizer and moves at even depth.  Positions are immutable values keyed
by their move history from the game's initial position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .rng import Stream


class Player(enum.Enum):
    J1 = 1
    J0 = 0


class Outcome(enum.Enum):
    J1_WIN = 1
    J0_WIN = 0
    DRAW = 2


@dataclass(frozen=True)
class DrawPolicy:
    """How a drawn game is scored; the default hands draws to J0."""

    map_draw_to: Player = Player.J0


class ResourceLimitError(RuntimeError):
    """Raised when an exact solve exceeds its node budget."""


DEFAULT_NODE_BUDGET = 10**8


def binary_value(outcome: Outcome, policy: DrawPolicy) -> int:
    """Map a raw outcome to the binary value of J1 (1 = J1 wins)."""
    if outcome is Outcome.J1_WIN:
        return 1
    if outcome is Outcome.J0_WIN:
        return 0
    return 1 if policy.map_draw_to is Player.J1 else 0


class Position:
    """Base interface for immutable game positions.

    Concrete games provide ``depth``, ``path``, ``is_terminal``,
    ``raw_outcome``, ``legal_moves`` and ``apply``.  ``turn`` follows from
    depth parity: J1 moves at even depth.
    """

    __slots__ = ()

    depth: int

    @property
    def turn(self) -> Player:
        return Player.J1 if self.depth % 2 == 0 else Player.J0

    @property
    def path(self) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def is_terminal(self) -> bool:
        raise NotImplementedError

    @property
    def raw_outcome(self) -> Outcome:
        raise NotImplementedError

    @property
    def legal_moves(self) -> tuple:
        raise NotImplementedError

    def apply(self, move) -> "Position":
        raise NotImplementedError


def minimax_solve(
    root: Position, policy: DrawPolicy = DrawPolicy(), node_budget: int = DEFAULT_NODE_BUDGET
) -> int:
    """Exact minimax value of ``root`` by backward induction."""
    nodes = 0

    def value(pos: Position) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise ResourceLimitError("game too large for exact solve")
        if pos.is_terminal:
            return binary_value(pos.raw_outcome, policy)
        child_values = [value(pos.apply(mv)) for mv in pos.legal_moves]
        return max(child_values) if pos.turn is Player.J1 else min(child_values)

    return value(root)


def alphabeta_count(
    root: Position,
    policy: DrawPolicy = DrawPolicy(),
    order: Stream | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[int, int]:
    """Binary alpha-beta value and number of terminal positions evaluated.

    ``order`` shuffles the children visited at every node; ``None`` keeps
    the natural move order.  Cutoffs are the binary ones: a child proving
    1 under a max node (or 0 under a min node) cuts its remaining
    siblings.
    """
    nodes = 0
    leaves = 0

    def value(pos: Position) -> int:
        nonlocal nodes, leaves
        nodes += 1
        if nodes > node_budget:
            raise ResourceLimitError("game too large for exact solve")
        if pos.is_terminal:
            leaves += 1
            return binary_value(pos.raw_outcome, policy)
        moves = pos.legal_moves
        idx = order.shuffled(len(moves)) if order is not None else range(len(moves))
        maximize = pos.turn is Player.J1
        v = None
        for i in idx:
            v = value(pos.apply(moves[i]))
            if v == (1 if maximize else 0):
                return v
        return v

    return value(root), leaves


@dataclass
class Playout:
    """Result of one uniformly random match."""

    leaf: Position
    branch: list[Position]
    # unvisited sibling move labels per non-terminal branch node
    siblings: list[tuple]


def uniform_random_match(start: Position, rng: Stream) -> Playout:
    """Play uniformly random moves from ``start`` until a terminal position."""
    branch = [start]
    siblings: list[tuple] = []
    pos = start
    while not pos.is_terminal:
        moves = pos.legal_moves
        i = rng.below(len(moves)) if len(moves) > 1 else 0
        siblings.append(tuple(m for j, m in enumerate(moves) if j != i))
        pos = pos.apply(moves[i])
        branch.append(pos)
    return Playout(leaf=pos, branch=branch, siblings=siblings)
