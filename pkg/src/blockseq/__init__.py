"""Blocksworld event sequencing: states, optimal plans, learned sequencers."""

from .model import (
    COLORS,
    OUT,
    TABLE,
    Color,
    Configuration,
    Move,
    MoveSequence,
    canonical,
    format_config,
    parse_config,
    sequence,
)

__version__ = "0.1.0"

__all__ = [
    "COLORS",
    "OUT",
    "TABLE",
    "Color",
    "Configuration",
    "Move",
    "MoveSequence",
    "canonical",
    "format_config",
    "parse_config",
    "sequence",
    "__version__",
]
