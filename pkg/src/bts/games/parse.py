"""Game spec strings, e.g. ``c4:cols=7,rows=6,connect=4,inverse=false,draw=j0``."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path as FsPath

from ..game_core import DrawPolicy, Player, Position
from ..rng import derive_seed
from .connect_four import ConnectFourConfig, connect_four_new
from .random_trees import GWModel, PearlConfig, gw_game_sample, pearl_game_new


def _split_fields(body: str) -> dict[str, str]:
    fields = {}
    if body:
        for item in body.split(","):
            key, _, value = item.partition("=")
            if not _ or not key:
                raise ValueError(f"malformed game spec field {item!r}")
            fields[key.strip()] = value.strip()
    return fields


def _bool(text: str) -> bool:
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class GameSpec:
    """Parsed game description; positions are built per realization."""

    text: str
    kind: str  # "c4" | "pearl" | "gw"
    params: dict
    policy: DrawPolicy

    @property
    def is_random(self) -> bool:
        return self.kind in ("pearl", "gw")

    def initial(self, realization_seed: int | None = None) -> Position:
        """Initial position; for random games an explicit seed overrides
        the one in the spec string."""
        if self.kind == "c4":
            return connect_four_new(self.params["cfg"])
        if self.kind == "pearl":
            cfg: PearlConfig = self.params["cfg"]
            if realization_seed is not None:
                cfg = PearlConfig(d=cfg.d, K=cfg.K, p=cfg.p, seed=realization_seed)
            return pearl_game_new(cfg)
        if self.kind == "gw":
            model: GWModel = self.params["model"]
            if realization_seed is not None:
                model = model.with_seed(realization_seed)
            return gw_game_sample(model)
        raise ValueError(f"unknown game kind {self.kind!r}")

    def fingerprint(self, realization_seed: int | None = None) -> str:
        """Stable id of the realization a match is played on."""
        if self.kind == "c4":
            cfg = self.params["cfg"]
            side = "j1" if cfg.draw_policy.map_draw_to is Player.J1 else "j0"
            return f"c4:{cfg.columns}x{cfg.rows}c{cfg.connect}:inv={int(cfg.inverse)}:draw={side}"
        seed = realization_seed
        if seed is None:
            seed = self.params["cfg"].seed if self.kind == "pearl" else self.params["model"].seed
        return f"{self.kind}:{derive_seed(seed):016x}"


def parse_game(text: str) -> GameSpec:
    kind, _, body = text.partition(":")
    fields = _split_fields(body)
    if kind == "c4":
        draw = fields.pop("draw", "j0").lower()
        if draw not in ("j0", "j1"):
            raise ValueError(f"draw must be j0 or j1, got {draw!r}")
        policy = DrawPolicy(Player.J1 if draw == "j1" else Player.J0)
        cfg = ConnectFourConfig(
            columns=int(fields.pop("cols", 7)),
            rows=int(fields.pop("rows", 6)),
            connect=int(fields.pop("connect", 4)),
            inverse=_bool(fields.pop("inverse", "false")),
            draw_policy=policy,
        )
        _reject_leftovers(fields, text)
        return GameSpec(text=text, kind="c4", params={"cfg": cfg}, policy=policy)

    if kind == "pearl":
        d = int(fields.pop("d", 2))
        K = int(fields.pop("K", 8))
        p_text = fields.pop("p", "auto")
        seed = int(fields.pop("seed", 0))
        _reject_leftovers(fields, text)
        if p_text == "auto":
            from ..priors import solve_root_mean  # deferred: avoids an import cycle

            p = solve_root_mean(d, K, 0.5)
        else:
            p = float(p_text)
        cfg = PearlConfig(d=d, K=K, p=p, seed=seed)
        return GameSpec(text=text, kind="pearl", params={"cfg": cfg}, policy=DrawPolicy())

    if kind == "gw":
        path = fields.pop("file", None)
        if path is None:
            raise ValueError("gw spec needs file=<path>")
        seed = int(fields.pop("seed", 0))
        _reject_leftovers(fields, text)
        model = GWModel.from_json(FsPath(path).read_text()).with_seed(seed)
        return GameSpec(text=text, kind="gw", params={"model": model}, policy=DrawPolicy())

    raise ValueError(f"unknown game spec {text!r}")


def _reject_leftovers(fields: dict, text: str) -> None:
    if fields:
        raise ValueError(f"unknown fields {sorted(fields)} in game spec {text!r}")
