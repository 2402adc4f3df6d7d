"""Build-location sampling: occupancy masks, binary dilation, random placement.

Masks follow the convention 1 = occupied/unbuildable, 0 = free. Dilation uses a
Chebyshev (square) structuring element so a radius-r dilation keeps sampled
locations at least r cells away from any footprint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine.types import BASE, POWER_AURA_RADIUS, STATS, STRUCTURE_KINDS, GameState
from .errors import UsageError

# clearance radius used when sampling a location for each structure kind
FOOTPRINT_RADIUS = {kind: 1 for kind in STRUCTURE_KINDS}


@dataclass
class Window:
    """Axis-aligned view rectangle in map cells."""
    x0: int
    y0: int
    width: int
    height: int

    @classmethod
    def centered(cls, cx: int, cy: int, side: int, map_w: int, map_h: int) -> "Window":
        side = min(side, map_w, map_h)
        x0 = min(max(cx - side // 2, 0), map_w - side)
        y0 = min(max(cy - side // 2, 0), map_h - side)
        return cls(x0, y0, side, side)

    def contains(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x0 + self.width and self.y0 <= y < self.y0 + self.height


@dataclass
class BinaryMask:
    width: int
    height: int
    cells: np.ndarray  # uint8 {0,1}, shape (height, width)

    def __post_init__(self):
        if self.cells.shape != (self.height, self.width):
            raise UsageError("mask shape does not match declared dimensions")

    def __eq__(self, other):
        return (isinstance(other, BinaryMask) and self.width == other.width
                and self.height == other.height
                and np.array_equal(self.cells, other.cells))


def occupancy_mask(state: GameState, window: Window) -> BinaryMask:
    cells = np.zeros((window.height, window.width), dtype=np.uint8)
    for e in state.entities.values():
        if window.contains(e.x, e.y):
            cells[e.y - window.y0, e.x - window.x0] = 1
    return BinaryMask(window.width, window.height, cells)


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Chebyshev dilation: output 1 iff an input 1 lies within distance radius."""
    if radius < 0:
        raise UsageError("dilation radius must be >= 0")
    if radius == 0:
        return BinaryMask(mask.width, mask.height, mask.cells.copy())
    src = mask.cells
    out = src.copy()
    h, w = src.shape
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx == 0 and dy == 0:
                continue
            sy0, sy1 = max(0, -dy), min(h, h - dy)
            ty0, ty1 = max(0, dy), min(h, h + dy)
            sx0, sx1 = max(0, -dx), min(w, w - dx)
            tx0, tx1 = max(0, dx), min(w, w + dx)
            np.maximum(out[ty0:ty1, tx0:tx1], src[sy0:sy1, sx0:sx1],
                       out=out[ty0:ty1, tx0:tx1])
    return BinaryMask(mask.width, mask.height, out)


def power_mask(state: GameState, player: int, window: Window) -> BinaryMask:
    """1 where the player's completed aura structures provide power."""
    cells = np.zeros((window.height, window.width), dtype=np.uint8)
    r = POWER_AURA_RADIUS
    for e in state.entities.values():
        if e.owner != player or not e.complete or not STATS[e.kind].aura:
            continue
        x0 = max(e.x - r, window.x0) - window.x0
        x1 = min(e.x + r, window.x0 + window.width - 1) - window.x0
        y0 = max(e.y - r, window.y0) - window.y0
        y1 = min(e.y + r, window.y0 + window.height - 1) - window.y0
        if x1 >= 0 and y1 >= 0 and x0 < window.width and y0 < window.height:
            cells[max(y0, 0):y1 + 1, max(x0, 0):x1 + 1] = 1
    return BinaryMask(window.width, window.height, cells)


def buildable_mask(state: GameState, player: int, kind: str, window: Window) -> BinaryMask:
    if kind not in STRUCTURE_KINDS:
        raise UsageError(f"{kind!r} is not a structure kind")
    occupied = dilate(occupancy_mask(state, window), FOOTPRINT_RADIUS[kind])
    free = 1 - occupied.cells
    if STATS[kind].needs_power:
        free &= power_mask(state, player, window).cells
    return BinaryMask(window.width, window.height, free)


def default_window(state: GameState, player: int) -> Window:
    """Local build view centered on the player's base (or spawn site)."""
    base = next((e for e in state.entities.values()
                 if e.owner == player and e.kind == BASE), None)
    cx, cy = (base.x, base.y) if base is not None else state.players[player].spawn
    w, h = state.map.size
    return Window.centered(cx, cy, w // 2, w, h)


def sample_build_location(state: GameState, kind: str, rng,
                          player: int = 0,
                          window: Window | None = None) -> tuple[int, int] | None:
    """Uniform random buildable cell for `kind`, or None when nothing fits."""
    if window is None:
        window = default_window(state, player)
    free = buildable_mask(state, player, kind, window).cells
    ys, xs = np.nonzero(free)
    if len(xs) == 0:
        return None
    i = rng.randrange(len(xs))
    return int(xs[i]) + window.x0, int(ys[i]) + window.y0
