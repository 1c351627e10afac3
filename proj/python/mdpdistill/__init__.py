"""Distill epsilon-optimal MDP strategies into small decision trees."""

from ._core import (
    Mdp,
    Tree,
    ModelError,
    distill,
    load_model,
    max_reach,
    parse_flat,
    parse_model,
    solve,
)

__all__ = [
    "Mdp",
    "Tree",
    "ModelError",
    "distill",
    "load_model",
    "max_reach",
    "parse_flat",
    "parse_model",
    "solve",
]
