from .match import DuelResult, MatchRecord, championship, duel, play_match
from .experiments import error_curve, pearl_tau

__all__ = [
    "DuelResult",
    "MatchRecord",
    "championship",
    "duel",
    "play_match",
    "error_curve",
    "pearl_tau",
]
