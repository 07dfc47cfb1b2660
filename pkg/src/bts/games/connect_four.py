"""Connect-Four variants: any board size, alignment length, inverse mode.

Boards are encoded as one bitboard per player with ``rows + 1`` bits per
column (the spare bit prevents wrap-around in alignment checks); Python
integers make this work for any board size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..game_core import DrawPolicy, Outcome, Player, Position


@dataclass(frozen=True)
class ConnectFourConfig:
    columns: int = 7
    rows: int = 6
    connect: int = 4
    inverse: bool = False
    draw_policy: DrawPolicy = field(default_factory=DrawPolicy)

    def __post_init__(self):
        if self.columns < 1 or self.rows < 1:
            raise ValueError("board must have at least one column and one row")
        if not 2 <= self.connect <= max(self.columns, self.rows):
            raise ValueError("connect length must fit on the board")


class ConnectFourPosition(Position):
    __slots__ = ("cfg", "bb", "heights", "_depth", "_path", "_outcome")

    def __init__(self, cfg, bb, heights, depth, path, outcome):
        self.cfg = cfg
        self.bb = bb  # (J1 board, J0 board)
        self.heights = heights
        self._depth = depth
        self._path = path
        self._outcome = outcome  # None while the game is running

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def path(self) -> tuple[int, ...]:
        return self._path

    @property
    def is_terminal(self) -> bool:
        return self._outcome is not None

    @property
    def raw_outcome(self) -> Outcome:
        if self._outcome is None:
            raise ValueError("position is not terminal")
        return self._outcome

    @property
    def legal_moves(self) -> tuple:
        rows = self.cfg.rows
        return tuple(c for c in range(self.cfg.columns) if self.heights[c] < rows)

    def apply(self, move) -> "ConnectFourPosition":
        cfg = self.cfg
        if not (0 <= move < cfg.columns) or self.heights[move] >= cfg.rows:
            raise ValueError(f"illegal move {move!r}")
        mover = self.turn  # player making this move
        row = self.heights[move]
        bit = 1 << (move * (cfg.rows + 1) + row)
        who = 0 if mover is Player.J1 else 1
        bb = (self.bb[0] | bit, self.bb[1]) if who == 0 else (self.bb[0], self.bb[1] | bit)
        heights = self.heights[:move] + (row + 1,) + self.heights[move + 1 :]
        depth = self._depth + 1

        outcome = None
        if _aligned(cfg, bb[who], move, row):
            winner = mover if not cfg.inverse else _other(mover)
            outcome = Outcome.J1_WIN if winner is Player.J1 else Outcome.J0_WIN
        elif depth == cfg.columns * cfg.rows:
            outcome = Outcome.DRAW
        return ConnectFourPosition(cfg, bb, heights, depth, self._path + (move,), outcome)

    def render(self) -> str:
        cfg = self.cfg
        rows = []
        for r in range(cfg.rows - 1, -1, -1):
            cells = []
            for c in range(cfg.columns):
                bit = 1 << (c * (cfg.rows + 1) + r)
                cells.append("X" if self.bb[0] & bit else "O" if self.bb[1] & bit else ".")
            rows.append(" ".join(cells))
        rows.append(" ".join(str(c % 10) for c in range(cfg.columns)))
        return "\n".join(rows)


def _other(p: Player) -> Player:
    return Player.J0 if p is Player.J1 else Player.J1


def _aligned(cfg: ConnectFourConfig, board: int, col: int, row: int) -> bool:
    """Does the disc just placed at (col, row) complete an alignment?"""
    stride = cfg.rows + 1
    need = cfg.connect
    for dc, dr in ((0, 1), (1, 0), (1, 1), (1, -1)):
        count = 1
        for sign in (1, -1):
            c, r = col + sign * dc, row + sign * dr
            while 0 <= c < cfg.columns and 0 <= r < cfg.rows:
                if not board & (1 << (c * stride + r)):
                    break
                count += 1
                c += sign * dc
                r += sign * dr
        if count >= need:
            return True
    return False


def connect_four_new(cfg: ConnectFourConfig) -> ConnectFourPosition:
    """Initial position; raises on an invalid config (validated at cfg)."""
    return ConnectFourPosition(cfg, (0, 0), (0,) * cfg.columns, 0, (), None)
