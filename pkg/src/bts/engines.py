"""Engine spec strings, the uniform engine interface, backend selection.

Engine specs:

* ``boss:sym:a=0.5`` / ``boss:symp:a=0.5`` / ``boss:symb:a=0.5,b=1.0``
* ``boss:gw:file=prior.json`` / ``boss:gw2:file=prior.json``
* ``boss:known`` (explicit test trees only, pure backend)
* ``mcts:a=3.5,b=5`` (standard) / ``mctsinf:a=2,b=3`` (modified)
* ``random``

The compiled core in ``bts._speedups`` is used automatically for the
game/engine combinations it supports; set ``BTS_BACKEND=py`` or ``c`` to
force a backend (forcing ``c`` on an unsupported combination is an
error).  Both backends produce bit-identical searches for equal seeds.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path as FsPath

from . import boss as boss_mod
from . import mcts as mcts_mod
from .games.parse import GameSpec
from .priors import PriorTables, SymFamily, pearl_tables
from .rng import Stream

try:  # compiled kernels are optional
    from . import _speedups
except ImportError:  # pragma: no cover - depends on the build
    _speedups = None

HAVE_SPEEDUPS = _speedups is not None


def backend_choice() -> str:
    mode = os.environ.get("BTS_BACKEND", "auto")
    if mode not in ("auto", "c", "py"):
        raise ValueError("BTS_BACKEND must be auto, c or py")
    if mode == "c" and not HAVE_SPEEDUPS:
        raise RuntimeError("compiled backend requested but bts._speedups is missing")
    return mode


@dataclass(frozen=True)
class Budget:
    kind: str  # "iterations" | "milliseconds"
    amount: int

    def __post_init__(self):
        if self.kind not in ("iterations", "milliseconds"):
            raise ValueError("budget kind must be iterations or milliseconds")
        if self.amount < 0:
            raise ValueError("budget must be non-negative")

    @property
    def text(self) -> str:
        return f"{'iters' if self.kind == 'iterations' else 'ms'}:{self.amount}"

    @classmethod
    def parse(cls, text: str) -> "Budget":
        kind, _, amount = text.partition(":")
        if kind == "iters":
            return cls("iterations", int(amount))
        if kind == "ms":
            return cls("milliseconds", int(amount))
        raise ValueError(f"budget must look like iters:<n> or ms:<n>, got {text!r}")


@dataclass(frozen=True)
class EngineSpec:
    text: str
    kind: str  # "boss" | "mcts" | "mctsinf" | "random"
    params: dict

    @classmethod
    def parse(cls, text: str) -> "EngineSpec":
        head, _, body = text.partition(":")
        if head == "random":
            if body:
                raise ValueError("random engine takes no parameters")
            return cls(text, "random", {})
        fields = {}
        if head in ("mcts", "mctsinf"):
            for item in body.split(",") if body else []:
                k, _, v = item.partition("=")
                fields[k.strip()] = v.strip()
            return cls(
                text,
                head,
                {"a": float(fields.pop("a", 1.0)), "b": float(fields.pop("b", 1.0))},
            )
        if head == "boss":
            family, _, rest = body.partition(":")
            for item in rest.split(",") if rest else []:
                k, _, v = item.partition("=")
                fields[k.strip()] = v.strip()
            if family in ("sym", "symp", "symb"):
                a = float(fields.pop("a", 0.5))
                b = float(fields.pop("b")) if family == "symb" else 0.0
                return cls(
                    text,
                    "boss",
                    {"family": "sym", "a": a, "b": b, "pearl_consistent": family == "symp"},
                )
            if family in ("gw", "gw2"):
                path = fields.pop("file")
                tables = PriorTables.from_json(FsPath(path).read_text())
                if (family == "gw2") != (tables.kind == "gw2"):
                    raise ValueError(f"{family} engine needs {family} tables, got {tables.kind}")
                return cls(text, "boss", {"family": family, "tables": tables})
            if family == "pearl-exact":
                return cls(text, "boss", {"family": "pearl-exact"})
            if family == "known":
                return cls(text, "boss", {"family": "known", "prior": fields.pop("prior", None)})
            raise ValueError(f"unknown boss prior family {family!r}")
        raise ValueError(f"unknown engine spec {text!r}")


class Engine:
    """Uniform interface: think / best_move / advance."""

    def think(self, budget: Budget) -> int:
        raise NotImplementedError

    def best_move(self):
        raise NotImplementedError

    def advance(self, move) -> None:
        raise NotImplementedError

    @property
    def solved(self) -> bool:
        return False


class RandomEngine(Engine):
    def __init__(self, game: GameSpec, realization_seed, seed: int):
        self.pos = game.initial(realization_seed)
        self.rng = Stream(seed)

    def think(self, budget: Budget) -> int:
        return 0

    def best_move(self):
        moves = self.pos.legal_moves
        i = self.rng.below(len(moves)) if len(moves) > 1 else 0
        return moves[i]

    def advance(self, move) -> None:
        self.pos = self.pos.apply(move)


class PyBossEngine(Engine):
    def __init__(self, state: boss_mod.SearchState):
        self.state = state
        self._pending = 1  # the construction playout belongs to the first think

    @property
    def iterations(self) -> int:
        return self.state.diag.iterations

    @property
    def trajectory(self):
        return self.state.diag.trajectory

    @property
    def root_value(self) -> float:
        return self.state.root_value()

    def think(self, budget: Budget) -> int:
        state = self.state
        done, self._pending = self._pending, 0
        if budget.kind == "iterations":
            while not state.terminated and done < budget.amount:
                state.step()
                done += 1
        else:
            deadline = time.perf_counter() + budget.amount / 1000.0
            while not state.terminated and time.perf_counter() < deadline:
                state.step()
                done += 1
        return done

    def best_move(self):
        return self.state.best_move()

    def advance(self, move) -> None:
        retained = self.state.diag.iterations
        self.state.reroot(move)
        if self.state.diag.iterations > retained:
            self._pending += self.state.diag.iterations - retained

    @property
    def solved(self) -> bool:
        return self.state.terminated


class PyMctsEngine(Engine):
    def __init__(self, search: mcts_mod.MctsSearch):
        self.search = search
        self._pending = 1

    def think(self, budget: Budget) -> int:
        done, self._pending = self._pending, 0
        if budget.kind == "iterations":
            while done < budget.amount:
                self.search.step()
                done += 1
        else:
            deadline = time.perf_counter() + budget.amount / 1000.0
            while time.perf_counter() < deadline:
                self.search.step()
                done += 1
        return done

    def best_move(self):
        return self.search.best_move()

    def advance(self, move) -> None:
        before = self.search.iterations
        self.search.reroot(move)
        if self.search.iterations > before:
            self._pending += self.search.iterations - before


class CEngineWrapper(Engine):
    """Wrapper around a compiled search core (same contract as the pure ones)."""

    def __init__(self, core):
        self.core = core
        self._pending = 1

    def think(self, budget: Budget) -> int:
        done, self._pending = self._pending, 0
        if budget.kind == "iterations":
            if budget.amount > done:
                done += self.core.run(budget.amount - done)
        else:
            deadline = time.perf_counter() + budget.amount / 1000.0
            while time.perf_counter() < deadline:
                got = self.core.run(64)
                done += got
                if got == 0:
                    break
        return done

    def best_move(self):
        return self.core.best_move()

    def advance(self, move) -> None:
        self._pending += self.core.advance(move)

    @property
    def solved(self) -> bool:
        return bool(self.core.terminated)

    @property
    def iterations(self) -> int:
        return self.core.iterations

    @property
    def trajectory(self):
        return self.core.r_trajectory()

    @property
    def root_value(self) -> float:
        return self.core.root_value()


def _build_boss_prior(spec: EngineSpec, game: GameSpec):
    family = spec.params["family"]
    if family == "sym":
        return boss_mod.SymPrior(
            SymFamily(
                a=spec.params["a"],
                b=spec.params["b"],
                pearl_consistent=spec.params.get("pearl_consistent", False),
            )
        )
    if family == "gw":
        return boss_mod.TablePrior(spec.params["tables"])
    if family == "gw2":
        return boss_mod.Table2Prior(spec.params["tables"])
    if family == "pearl-exact":
        if game.kind != "pearl":
            raise ValueError("the pearl-exact prior needs a pearl game")
        cfg = game.params["cfg"]
        return boss_mod.TablePrior(pearl_tables(cfg.d, cfg.K, cfg.p))
    raise ValueError(f"engine family {family!r} has no automatic prior for {game.kind}")


def make_engine(
    spec_text: str,
    game: GameSpec,
    seed: int,
    realization_seed: int | None = None,
    backend: str | None = None,
    record_trajectory: bool = False,
) -> Engine:
    spec = EngineSpec.parse(spec_text)
    mode = backend or backend_choice()
    if spec.kind == "random":
        return RandomEngine(game, realization_seed, seed)

    use_c = HAVE_SPEEDUPS and mode != "py" and _speedups.supports(game.kind, spec.kind, spec.params.get("family"))
    if mode == "c" and not use_c:
        raise RuntimeError(f"compiled backend does not support ({game.text}, {spec_text})")

    if spec.kind in ("mcts", "mctsinf"):
        if use_c:
            core = _speedups.make_mcts(
                game, realization_seed, spec.params["a"], spec.params["b"], spec.kind == "mctsinf", seed
            )
            return CEngineWrapper(core)
        search = mcts_mod.MctsSearch(
            game.initial(realization_seed),
            a=spec.params["a"],
            b=spec.params["b"],
            rng=Stream(seed),
            policy=game.policy,
            modified=spec.kind == "mctsinf",
        )
        return PyMctsEngine(search)

    # boss
    if use_c:
        params = dict(spec.params)
        if params["family"] == "pearl-exact":
            cfg = game.params["cfg"]
            params = {"family": "gw", "tables": pearl_tables(cfg.d, cfg.K, cfg.p)}
        core = _speedups.make_boss(game, realization_seed, params, seed, record_trajectory)
        return CEngineWrapper(core)
    prior = _build_boss_prior(spec, game)
    state = boss_mod.SearchState(
        game.initial(realization_seed),
        prior,
        Stream(seed),
        policy=game.policy,
        record_trajectory=record_trajectory,
    )
    return PyBossEngine(state)
