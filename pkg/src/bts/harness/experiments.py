"""Benchmark experiments: leaf-count comparisons and error curves."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..engines import Budget, make_engine
from ..game_core import alphabeta_count
from ..games.parse import parse_game
from ..rng import Stream, derive_seed

GOLDEN_P = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class TauRow:
    K: int
    mean_tau: float
    stderr: float
    theory: float
    mean_alphabeta: float
    stderr_alphabeta: float


def _mean_stderr(values) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var / n)


def pearl_tau(depths: list[int], trials: int, seed: int) -> list[TauRow]:
    """Leaves needed to determine the root value of Pearl games at the
    classical p where alpha-beta's expected leaf count is (2/(sqrt5-1))^K.

    For each realization the optimal search runs to termination with the
    exact prior; alpha-beta visits children in a fresh uniformly random
    order.
    """
    rows = []
    for K in depths:
        if K % 2:
            raise ValueError("depths must be even for the classical comparison")
        game = parse_game(f"pearl:d=2,K={K},p={GOLDEN_P!r},seed=0")
        taus = []
        ab_leaves = []
        for t in range(trials):
            realization = derive_seed(seed, K, t, 0)
            eng = make_engine("boss:pearl-exact", game, derive_seed(seed, K, t, 1), realization)
            taus.append(eng.think(Budget("iterations", 1 << 62)))
            _, leaves = alphabeta_count(
                game.initial(realization),
                order=Stream(derive_seed(seed, K, t, 2)),
            )
            ab_leaves.append(leaves)
        mean, err = _mean_stderr(taus)
        ab_mean, ab_err = _mean_stderr(ab_leaves)
        rows.append(
            TauRow(
                K=K,
                mean_tau=mean,
                stderr=err,
                theory=(2.0 / (math.sqrt(5.0) - 1.0)) ** K,
                mean_alphabeta=ab_mean,
                stderr_alphabeta=ab_err,
            )
        )
    return rows


def tau_csv(rows: list[TauRow]) -> str:
    lines = ["K,mean_tau,stderr,theory,mean_alphabeta,stderr_alphabeta"]
    for r in rows:
        lines.append(
            f"{r.K},{r.mean_tau!r},{r.stderr!r},{r.theory!r},{r.mean_alphabeta!r},{r.stderr_alphabeta!r}"
        )
    return "\n".join(lines) + "\n"


@dataclass
class CurveResult:
    mean_sq_error: list[float]  # index n-1 holds the value after n playouts
    stderr: list[float]
    sample_trajectory: list[float]
    trials: int
    max_tau: int


def error_curve(game_text: str, engine_text: str, trials: int, max_iters: int, seed: int) -> CurveResult:
    """Monte-Carlo E[(R_n(root) - R(root))^2] as a function of n.

    Each realization is solved exactly for the true root value; runs that
    terminate early contribute error 0 afterwards (the posterior freezes
    at the exact value).
    """
    game = parse_game(game_text)
    sums: list[float] = []
    sqs: list[float] = []
    sample: list[float] = []
    max_tau = 0
    for t in range(trials):
        realization = derive_seed(seed, 3, t) if game.is_random else None
        eng = make_engine(
            engine_text, game, derive_seed(seed, 4, t), realization, record_trajectory=True
        )
        eng.think(Budget("iterations", max_iters))
        truth, _ = alphabeta_count(game.initial(realization))
        traj = eng.trajectory
        max_tau = max(max_tau, len(traj))
        if t == 0:
            sample = list(traj)
        while len(sums) < len(traj):
            sums.append(0.0)
            sqs.append(0.0)
        for n, r in enumerate(traj):
            e = (r - truth) ** 2
            sums[n] += e
            sqs[n] += e * e
        # beyond termination the error is identically zero: nothing to add
    means = [s / trials for s in sums]
    errs = [math.sqrt(max(0.0, q / trials - m * m) / trials) for q, m in zip(sqs, means)]
    return CurveResult(
        mean_sq_error=means,
        stderr=errs,
        sample_trajectory=sample,
        trials=trials,
        max_tau=max_tau,
    )


def curve_csv(result: CurveResult) -> str:
    lines = ["n,mean_sq_error,stderr"]
    for n, (m, e) in enumerate(zip(result.mean_sq_error, result.stderr), start=1):
        lines.append(f"{n},{m!r},{e!r}")
    return "\n".join(lines) + "\n"


def sample_csv(result: CurveResult) -> str:
    lines = ["n,root_posterior"]
    for n, r in enumerate(result.sample_trajectory, start=1):
        lines.append(f"{n},{r!r}")
    return "\n".join(lines) + "\n"
