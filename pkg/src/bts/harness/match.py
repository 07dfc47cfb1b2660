"""Engine-vs-engine play: single matches, duels, championships.

Everything is a pure function of (spec strings, seed): per-match seeds are
derived from the top-level seed by index, matches may run in parallel
across processes, and aggregation follows a fixed order, so results are
reproducible regardless of the worker count (capped by ``BTS_THREADS``).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from ..engines import Budget, make_engine
from ..game_core import Outcome
from ..games.parse import parse_game
from ..rng import derive_seed

_OUTCOME_NAME = {Outcome.J1_WIN: "J1Win", Outcome.J0_WIN: "J0Win", Outcome.DRAW: "Draw"}


@dataclass
class MatchRecord:
    game: str
    engines: tuple[str, str]  # (first mover, second mover)
    budget: str
    seed: int
    realization: int | None
    fingerprint: str
    winner_raw: str
    moves: list
    iterations_per_move: list[int]
    first_move_iterations: tuple[int, int]

    def to_dict(self) -> dict:
        return asdict(self)


def play_match(
    game_text: str,
    first_text: str,
    second_text: str,
    budget: Budget,
    seed: int,
    realization_seed: int | None = None,
) -> MatchRecord:
    """One full game; both engines keep their trees across moves."""
    game = parse_game(game_text)
    if game.is_random and realization_seed is None:
        realization_seed = derive_seed(seed, 0)
    if not game.is_random:
        realization_seed = None
    engines = [
        make_engine(first_text, game, derive_seed(seed, 1), realization_seed),
        make_engine(second_text, game, derive_seed(seed, 2), realization_seed),
    ]
    pos = game.initial(realization_seed)
    moves = []
    iters: list[int] = []
    first_iters = [0, 0]
    mover = 0
    while not pos.is_terminal:
        n = engines[mover].think(budget)
        move = engines[mover].best_move()
        if not first_iters[mover]:
            first_iters[mover] = n
        iters.append(n)
        moves.append(move)
        pos = pos.apply(move)
        if not pos.is_terminal:
            engines[0].advance(move)
            engines[1].advance(move)
        mover = 1 - mover
    return MatchRecord(
        game=game_text,
        engines=(first_text, second_text),
        budget=budget.text,
        seed=seed,
        realization=realization_seed,
        fingerprint=game.fingerprint(realization_seed),
        winner_raw=_OUTCOME_NAME[pos.raw_outcome],
        moves=moves,
        iterations_per_move=iters,
        first_move_iterations=(first_iters[0], first_iters[1]),
    )


@dataclass
class DuelResult:
    game: str
    engine_a: str
    engine_b: str
    games_per_seat: int
    budget: str
    seed: int
    # seating A-first: (A wins, A losses, draws); seating B-first likewise
    a_first: tuple[int, int, int] = (0, 0, 0)
    b_first: tuple[int, int, int] = (0, 0, 0)
    mean_first_move_iterations: dict = field(default_factory=dict)
    fingerprints_paired: bool = True

    def summary(self) -> str:
        af, bf = self.a_first, self.b_first
        return f"{af[0]}/{af[1]}({af[2]}), {bf[0]}/{bf[1]}({bf[2]})"

    def to_dict(self) -> dict:
        return asdict(self)


def _threads() -> int:
    env = os.environ.get("BTS_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _run_match_batch(args):
    game_text, jobs = args
    out = []
    for first, second, budget_text, seed, realization in jobs:
        rec = play_match(game_text, first, second, Budget.parse(budget_text), seed, realization)
        out.append((rec.winner_raw, rec.first_move_iterations))
    return out


def _parallel_batches(game_text: str, jobs: list, batch: int = 64):
    """Run match jobs, in order, possibly across processes."""
    chunks = [jobs[i : i + batch] for i in range(0, len(jobs), batch)]
    threads = _threads()
    if threads <= 1 or len(chunks) <= 1:
        for chunk in chunks:
            yield from _run_match_batch((game_text, chunk))
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for res in pool.map(_run_match_batch, [(game_text, c) for c in chunks]):
            yield from res


def duel(
    game_text: str,
    engine_a: str,
    engine_b: str,
    games_per_seat: int,
    budget: Budget,
    seed: int,
) -> DuelResult:
    """games_per_seat matches with A first and as many with B first.

    On random games, pair i plays both seatings on one shared realization.
    """
    game = parse_game(game_text)
    jobs = []
    for i in range(games_per_seat):
        realization = derive_seed(seed, 7, i) if game.is_random else None
        jobs.append((engine_a, engine_b, budget.text, derive_seed(seed, 1, i), realization))
        jobs.append((engine_b, engine_a, budget.text, derive_seed(seed, 2, i), realization))

    a_first = [0, 0, 0]
    b_first = [0, 0, 0]
    first_iter_sums = {engine_a: [0, 0], engine_b: [0, 0]}  # sum, count
    for j, (winner, first_iters) in enumerate(_parallel_batches(game_text, jobs)):
        a_is_first = j % 2 == 0
        # each tally is the first mover's (wins, losses, draws)
        tally = a_first if a_is_first else b_first
        if winner == "Draw":
            tally[2] += 1
        elif winner == "J1Win":
            tally[0] += 1
        else:
            tally[1] += 1
        first_engine = engine_a if a_is_first else engine_b
        second_engine = engine_b if a_is_first else engine_a
        first_iter_sums[first_engine][0] += first_iters[0]
        first_iter_sums[first_engine][1] += 1
        first_iter_sums[second_engine][0] += first_iters[1]
        first_iter_sums[second_engine][1] += 1

    means = {
        name: (s / n if n else 0.0) for name, (s, n) in first_iter_sums.items()
    }
    return DuelResult(
        game=game_text,
        engine_a=engine_a,
        engine_b=engine_b,
        games_per_seat=games_per_seat,
        budget=budget.text,
        seed=seed,
        a_first=tuple(a_first),
        b_first=tuple(b_first),
        mean_first_move_iterations=means,
    )


@dataclass
class ChampionshipResult:
    game: str
    family: str
    grid_max: int
    matches_per_pair: int
    budget: str
    seed: int
    standings: list  # [{a, b, wins, losses, draws, games}] sorted by wins desc
    best: tuple[float, float]

    def to_dict(self) -> dict:
        return asdict(self)


def championship(
    game_text: str,
    family: str,
    grid_max: int,
    matches_per_pair: int,
    budget: Budget,
    seed: int,
) -> ChampionshipResult:
    """Round robin over the triangular (a, b) = (k/2, l/2) grid, k <= l.

    Every unordered pair plays ``matches_per_pair`` games, half per
    seating; the winner is the entrant with the most wins (ties broken by
    the lexicographically smaller (a, b)).
    """
    if family not in ("mcts", "mctsinf"):
        raise ValueError("championship family must be mcts or mctsinf")
    if matches_per_pair % 2:
        raise ValueError("matches_per_pair must split evenly between seatings")
    entrants = [(k / 2.0, l / 2.0) for k in range(1, grid_max + 1) for l in range(k, grid_max + 1)]
    spec = {e: f"{family}:a={e[0]},b={e[1]}" for e in entrants}
    game = parse_game(game_text)

    jobs = []
    pair_index = []
    half = matches_per_pair // 2
    for i, ea in enumerate(entrants):
        for jdx in range(i + 1, len(entrants)):
            eb = entrants[jdx]
            for g in range(half):
                realization = derive_seed(seed, 11, i, jdx, g) if game.is_random else None
                jobs.append((spec[ea], spec[eb], budget.text, derive_seed(seed, 1, i, jdx, g), realization))
                pair_index.append((ea, eb))
                jobs.append((spec[eb], spec[ea], budget.text, derive_seed(seed, 2, i, jdx, g), realization))
                pair_index.append((eb, ea))

    stats = {e: [0, 0, 0, 0] for e in entrants}  # wins, losses, draws, games
    for (first, second), (winner, _) in zip(pair_index, _parallel_batches(game_text, jobs, batch=256)):
        stats[first][3] += 1
        stats[second][3] += 1
        if winner == "Draw":
            stats[first][2] += 1
            stats[second][2] += 1
        elif winner == "J1Win":
            stats[first][0] += 1
            stats[second][1] += 1
        else:
            stats[first][1] += 1
            stats[second][0] += 1

    standings = [
        {"a": e[0], "b": e[1], "wins": w, "losses": l, "draws": d, "games": g}
        for e, (w, l, d, g) in stats.items()
    ]
    standings.sort(key=lambda row: (-row["wins"], row["a"], row["b"]))
    best = max(entrants, key=lambda e: (stats[e][0], (-e[0], -e[1])))
    return ChampionshipResult(
        game=game_text,
        family=family,
        grid_max=grid_max,
        matches_per_pair=matches_per_pair,
        budget=budget.text,
        seed=seed,
        standings=standings,
        best=best,
    )
