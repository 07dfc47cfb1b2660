"""Command-line interface.

Every command is a pure function of its arguments and seed; outputs embed
the arguments, so re-running a command reproduces the file byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..engines import Budget, make_engine
from ..game_core import DrawPolicy, alphabeta_count, minimax_solve
from ..games.parse import parse_game
from ..priors import fit_gw2_from_playouts, fit_gw_from_playouts, gw2_tables, gw_tables
from ..rng import Stream, derive_seed
from .experiments import curve_csv, error_curve, pearl_tau, sample_csv, tau_csv
from .match import championship, duel, play_match


def _dump(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> None:
    game = parse_game(args.game)
    root = game.initial()
    value = minimax_solve(root, game.policy)
    _, leaves = alphabeta_count(root, game.policy)
    _dump({"config": {"game": args.game}, "value": value, "alphabeta_leaves": leaves}, args.out)


def _cmd_duel(args) -> None:
    res = duel(args.game, args.p1, args.p2, args.games, Budget.parse(args.budget), args.seed)
    doc = res.to_dict()
    doc["table"] = res.summary()
    _dump(doc, args.out)


def _cmd_championship(args) -> None:
    res = championship(
        args.game, args.family, args.grid_max, args.pairs, Budget.parse(args.budget), args.seed
    )
    _dump(res.to_dict(), args.out)


def _cmd_pearl_tau(args) -> None:
    depths = [int(k) for k in args.depths.split(",")]
    rows = pearl_tau(depths, args.trials, args.seed)
    text = tau_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_curve(args) -> None:
    res = error_curve(args.game, args.engine, args.trials, args.max_iters, args.seed)
    text = curve_csv(res)
    if args.out:
        Path(args.out).write_text(text)
        Path(args.out).with_suffix(".sample.csv").write_text(sample_csv(res))
    else:
        sys.stdout.write(text)


def _cmd_fit_prior(args) -> None:
    game = parse_game(args.game)
    root = game.initial()
    rng = Stream(derive_seed(args.seed, 21))
    if args.order == 1:
        fit = fit_gw_from_playouts(root, args.playouts, rng, game.policy)
        tables = gw_tables(fit.to_model())
    else:
        fit = fit_gw2_from_playouts(root, args.playouts, rng, game.policy)
        tables = gw2_tables(fit.to_model())
    text = tables.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_play(args) -> None:
    game = parse_game(args.game)
    if game.kind != "c4":
        raise SystemExit("interactive play supports Connect-Four boards only")
    pos = game.initial()
    engine = make_engine(args.engine, game, args.seed)
    budget = Budget.parse(args.budget)
    human_turn = bool(args.human_first)
    while not pos.is_terminal:
        print(pos.render())
        if human_turn:
            try:
                move = int(input("your column: "))
            except (ValueError, EOFError):
                print("enter a column number")
                continue
            if move not in pos.legal_moves:
                print("illegal move")
                continue
        else:
            engine.think(budget)
            move = engine.best_move()
            print(f"engine plays column {move}")
        pos = pos.apply(move)
        if not pos.is_terminal:
            engine.advance(move)
        human_turn = not human_turn
    print(pos.render())
    print(f"game over: {pos.raw_outcome.name}")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(prog="bts", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="exact value of a (small) game")
    p.add_argument("--game", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("duel", help="two engines, both seatings")
    p.add_argument("--game", required=True)
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--games", type=int, required=True, help="games per seating")
    p.add_argument("--budget", required=True, help="iters:<n> or ms:<n>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_duel)

    p = sub.add_parser("championship", help="fit (a, b) by round robin")
    p.add_argument("--game", required=True)
    p.add_argument("--family", choices=["mcts", "mctsinf"], required=True)
    p.add_argument("--grid-max", type=int, default=10)
    p.add_argument("--pairs", type=int, default=40, help="games per unordered pair")
    p.add_argument("--budget", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_championship)

    p = sub.add_parser("pearl-tau", help="leaves to solve Pearl games vs alpha-beta")
    p.add_argument("--depths", default="4,8")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_pearl_tau)

    p = sub.add_parser("curve", help="mean squared root error per iteration")
    p.add_argument("--game", required=True)
    p.add_argument("--engine", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-iters", type=int, default=1 << 20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_curve)

    p = sub.add_parser("fit-prior", help="fit Galton-Watson prior tables from playouts")
    p.add_argument("--game", required=True)
    p.add_argument("--playouts", type=int, required=True)
    p.add_argument("--order", type=int, choices=[1, 2], default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_fit_prior)

    p = sub.add_parser("play", help="text-mode play against an engine")
    p.add_argument("--game", required=True)
    p.add_argument("--engine", required=True)
    p.add_argument("--budget", default="ms:1000")
    p.add_argument("--seed", type=int, default=0)
    side = p.add_mutually_exclusive_group(required=True)
    side.add_argument("--human-first", action="store_true")
    side.add_argument("--engine-first", action="store_true")
    p.set_defaults(fn=_cmd_play)

    args = ap.parse_args(argv)
    args.fn(args)


if __name__ == "__main__":
    main()
