"""macrorts: hierarchical RL with mined macro-actions on a micro-RTS simulator."""

__version__ = "0.1.0"
