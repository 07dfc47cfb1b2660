"""bts: Bayesian step-by-step optimal game-tree search and benchmark harness."""

from .engines import HAVE_SPEEDUPS, Budget, EngineSpec, make_engine
from .games.parse import parse_game

__version__ = "0.1.0"

__all__ = ["HAVE_SPEEDUPS", "Budget", "EngineSpec", "make_engine", "parse_game", "__version__"]
