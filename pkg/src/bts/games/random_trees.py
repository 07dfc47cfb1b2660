"""Lazily sampled random games: Pearl trees and Galton-Watson models.

A realization is a pure function of (config, seed): every node derives its
randomness (litter size, leaf outcome) from a 64-bit hash of its move path,
so play can revisit, replay or traverse the same realization without
storing anything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..game_core import Outcome, Position
from ..rng import LITTER_SALT, OUTCOME_SALT, path_child, path_root, unit_from

Law = list[tuple[int, float]]  # finite-support law as (count, prob) pairs

_PROB_SUM_TOL = 1e-9


def _validate_law(law: Law, where: str) -> Law:
    if not law:
        raise ValueError(f"{where}: empty reproduction law")
    total = 0.0
    for count, prob in law:
        if count < 0 or prob < 0:
            raise ValueError(f"{where}: negative entry in law")
        total += prob
    if abs(total - 1.0) > _PROB_SUM_TOL:
        raise ValueError(f"{where}: law sums to {total}, not 1")
    return [(int(c), p / total) for c, p in sorted(law)]


def _draw_from_law(law: Law, u: float) -> int:
    acc = 0.0
    for count, prob in law:
        acc += prob
        if u < acc:
            return count
    return law[-1][0]


@dataclass(frozen=True)
class PearlConfig:
    """Regular degree-d depth-K tree with i.i.d. Bernoulli(p) leaves."""

    d: int
    K: int
    p: float
    seed: int

    def __post_init__(self):
        if self.d < 2 or self.K < 1:
            raise ValueError("Pearl game needs d >= 2 and K >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be a probability")


class PearlPosition(Position):
    __slots__ = ("cfg", "_path", "h")

    def __init__(self, cfg: PearlConfig, path: tuple[int, ...], h: int):
        self.cfg = cfg
        self._path = path
        self.h = h

    @property
    def depth(self) -> int:
        return len(self._path)

    @property
    def path(self) -> tuple[int, ...]:
        return self._path

    @property
    def is_terminal(self) -> bool:
        return len(self._path) == self.cfg.K

    @property
    def raw_outcome(self) -> Outcome:
        if not self.is_terminal:
            raise ValueError("position is not terminal")
        win = unit_from(self.h, OUTCOME_SALT) < self.cfg.p
        return Outcome.J1_WIN if win else Outcome.J0_WIN

    @property
    def legal_moves(self) -> tuple:
        if self.is_terminal:
            return ()
        return tuple(range(self.cfg.d))

    def apply(self, move) -> "PearlPosition":
        if not 0 <= move < self.cfg.d or self.is_terminal:
            raise ValueError(f"illegal move {move!r}")
        return PearlPosition(self.cfg, self._path + (move,), path_child(self.h, move))


def pearl_game_new(cfg: PearlConfig) -> PearlPosition:
    return PearlPosition(cfg, (), path_root(cfg.seed))


@dataclass(frozen=True)
class GWModel:
    """Inhomogeneous Galton-Watson game model.

    ``mu[k]`` is the litter-size law at depth k (``mu[K]`` must be the
    point mass at 0) and ``q[k]`` the win probability of a depth-k leaf.
    """

    K: int
    mu: tuple
    q: tuple
    seed: int

    @classmethod
    def create(cls, K: int, mu, q, seed: int) -> "GWModel":
        if K < 0 or len(mu) != K + 1 or len(q) != K + 1:
            raise ValueError("need laws and leaf probabilities for depths 0..K")
        laws = tuple(tuple(_validate_law(list(law), f"mu[{k}]")) for k, law in enumerate(mu))
        if dict(laws[K]).get(0, 0.0) != 1.0:
            raise ValueError("mu[K] must be the point mass at 0")
        for k, qk in enumerate(q):
            if qk is not None and not 0.0 <= qk <= 1.0:
                raise ValueError(f"q[{k}] must be a probability")
        return cls(K=K, mu=laws, q=tuple(q), seed=seed)

    def to_json(self) -> str:
        doc = {
            "K": self.K,
            "mu": [[[c, p] for c, p in law] for law in self.mu],
            "q": list(self.q),
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GWModel":
        doc = json.loads(text)
        mu = [[(int(c), float(p)) for c, p in law] for law in doc["mu"]]
        return cls.create(K=int(doc["K"]), mu=mu, q=[float(x) for x in doc["q"]], seed=int(doc["seed"]))

    def with_seed(self, seed: int) -> "GWModel":
        return GWModel(K=self.K, mu=self.mu, q=self.q, seed=seed)


class GWPosition(Position):
    __slots__ = ("model", "_path", "h", "_litter")

    def __init__(self, model: GWModel, path: tuple[int, ...], h: int):
        self.model = model
        self._path = path
        self.h = h
        k = len(path)
        if k >= model.K:
            self._litter = 0
        else:
            self._litter = _draw_from_law(model.mu[k], unit_from(h, LITTER_SALT))

    @property
    def depth(self) -> int:
        return len(self._path)

    @property
    def path(self) -> tuple[int, ...]:
        return self._path

    @property
    def is_terminal(self) -> bool:
        return self._litter == 0

    @property
    def raw_outcome(self) -> Outcome:
        if not self.is_terminal:
            raise ValueError("position is not terminal")
        q = self.model.q[len(self._path)]
        if q is None:
            raise ValueError(f"model has no leaf probability at depth {len(self._path)}")
        win = unit_from(self.h, OUTCOME_SALT) < q
        return Outcome.J1_WIN if win else Outcome.J0_WIN

    @property
    def legal_moves(self) -> tuple:
        return tuple(range(self._litter))

    def apply(self, move) -> "GWPosition":
        if not 0 <= move < self._litter:
            raise ValueError(f"illegal move {move!r}")
        return GWPosition(self.model, self._path + (move,), path_child(self.h, move))


def gw_game_sample(model: GWModel) -> GWPosition:
    return GWPosition(model, (), path_root(model.seed))
