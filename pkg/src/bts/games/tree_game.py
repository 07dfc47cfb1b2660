"""Explicit finite trees with independent Bernoulli leaf outcomes.

This is the deterministic-tree model used by the exact oracles and the
small-game tests: the tree shape is known, each leaf carries a win
probability, and a realization fixes one outcome per leaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..game_core import Outcome, Position
from ..rng import Stream

Path = tuple[int, ...]


@dataclass
class TreeModel:
    """Tree shape plus per-leaf win probabilities.

    ``children[path]`` lists the child paths of an internal node;
    ``leaf_probs[path]`` gives P(R = 1) at a leaf.
    """

    children: dict[Path, list[Path]] = field(default_factory=dict)
    leaf_probs: dict[Path, float] = field(default_factory=dict)

    @classmethod
    def from_nested(cls, spec) -> "TreeModel":
        """Build from nested lists, where a float is a leaf probability.

        Example: ``[[0.3, 0.7], 0.9]`` is a root with an internal first
        child (two leaves) and a leaf second child.
        """
        model = cls()

        def walk(node, path: Path):
            if isinstance(node, (int, float)):
                model.leaf_probs[path] = float(node)
                return
            kids = [path + (i,) for i in range(len(node))]
            model.children[path] = kids
            for sub, kid in zip(node, kids):
                walk(sub, kid)

        walk(spec, ())
        return model

    @property
    def leaves(self) -> list[Path]:
        return sorted(self.leaf_probs)

    def is_leaf(self, path: Path) -> bool:
        return path in self.leaf_probs

    def depth_of(self, path: Path) -> int:
        return len(path)

    def subtree_leaves(self, path: Path) -> list[Path]:
        if self.is_leaf(path):
            return [path]
        out: list[Path] = []
        for kid in self.children[path]:
            out.extend(self.subtree_leaves(kid))
        return out

    def nodes(self) -> list[Path]:
        return sorted(self.children) + self.leaves


def sample_outcomes(model: TreeModel, rng: Stream) -> dict[Path, int]:
    """Draw one realization of the leaf outcomes."""
    return {p: 1 if rng.unit() < q else 0 for p, q in sorted(model.leaf_probs.items())}


class TreePosition(Position):
    """Position in a realized explicit tree game."""

    __slots__ = ("model", "outcomes", "_path")

    def __init__(self, model: TreeModel, outcomes: dict[Path, int], path: Path = ()):
        self.model = model
        self.outcomes = outcomes
        self._path = path

    @property
    def depth(self) -> int:
        return len(self._path)

    @property
    def path(self) -> Path:
        return self._path

    @property
    def is_terminal(self) -> bool:
        return self.model.is_leaf(self._path)

    @property
    def raw_outcome(self) -> Outcome:
        return Outcome.J1_WIN if self.outcomes[self._path] == 1 else Outcome.J0_WIN

    @property
    def legal_moves(self) -> tuple:
        return tuple(range(len(self.model.children[self._path])))

    def apply(self, move) -> "TreePosition":
        kids = self.model.children[self._path]
        if not 0 <= move < len(kids):
            raise ValueError(f"illegal move {move!r} at {self._path!r}")
        return TreePosition(self.model, self.outcomes, self._path + (move,))


def random_tree_model(
    rng: Stream,
    max_depth: int = 4,
    max_degree: int = 3,
    max_leaves: int = 16,
    prob_range: tuple[float, float] = (0.1, 0.9),
) -> TreeModel:
    """Random small tree model for oracle-vs-engine tests.

    Degrees are uniform on 1..max_degree, shrinking near the leaf cap;
    every branch reaches depth >= 1.
    """
    lo, hi = prob_range
    while True:
        model = TreeModel()
        leaves = 0

        def grow(path: Path, depth: int) -> bool:
            nonlocal leaves
            branch_here = depth < max_depth and (depth == 0 or rng.unit() < 0.75)
            if branch_here and leaves + 2 <= max_leaves:
                d = 1 + rng.below(max_degree)
                kids = [path + (i,) for i in range(d)]
                model.children[path] = kids
                for kid in kids:
                    if not grow(kid, depth + 1):
                        return False
                return True
            leaves += 1
            if leaves > max_leaves:
                return False
            model.leaf_probs[path] = lo + (hi - lo) * rng.unit()
            return True

        if grow((), 0) and len(model.leaf_probs) >= 2:
            return model
