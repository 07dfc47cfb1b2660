from .connect_four import ConnectFourConfig, connect_four_new
from .random_trees import GWModel, PearlConfig, gw_game_sample, pearl_game_new
from .tree_game import TreeModel, TreePosition, random_tree_model, sample_outcomes
from .parse import GameSpec, parse_game

__all__ = [
    "ConnectFourConfig",
    "connect_four_new",
    "GWModel",
    "PearlConfig",
    "gw_game_sample",
    "pearl_game_new",
    "TreeModel",
    "TreePosition",
    "random_tree_model",
    "sample_outcomes",
    "GameSpec",
    "parse_game",
]
