"""Tiled world files: a small text format parsed into collision geometry.

Format (UTF-8)::

    tile=0.5
    wheel_drop=3.0,Left,Air

    ########
    #..~...#
    #..R...#
    ########

Header lines are ``key=value`` pairs: ``tile`` sets the tile edge in
meters (default 0.5) and each ``wheel_drop=<t>,<Left|Right>,<Air|Ground>``
schedules a wheel event injection at simulated time ``t``.  A blank line
ends the header; the remaining lines are the grid, one character per
tile: ``.`` floor, ``#`` wall, ``~`` hole, ``R`` robot start (floor,
facing +x).  Row 0 is the top of the map; x grows rightward and y grows
upward, so the world rectangle spans ``[0, cols*tile] x [0, rows*tile]``.
Everything outside the grid behaves as wall.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .robot import WheelSide, WheelState

FLOOR = 0
WALL = 1
HOLE = 2

_CHARS = {".": FLOOR, "#": WALL, "~": HOLE}


class WorldError(ValueError):
    """Raised for malformed world files."""


@dataclass(frozen=True)
class ScriptedWheelEvent:
    t: float
    side: WheelSide
    state: WheelState


@dataclass(frozen=True)
class World:
    cells: bytes  # row-major with y up: cells[iy * cols + ix]
    cols: int
    rows: int
    tile: float
    start: tuple[float, float, float]  # x, y, heading
    scripted: tuple[ScriptedWheelEvent, ...] = field(default_factory=tuple)

    @property
    def width(self) -> float:
        return self.cols * self.tile

    @property
    def height(self) -> float:
        return self.rows * self.tile

    def cell(self, ix: int, iy: int) -> int:
        """Tile kind at grid index; out-of-range indices are wall."""
        if 0 <= ix < self.cols and 0 <= iy < self.rows:
            return self.cells[iy * self.cols + ix]
        return WALL


def _parse_wheel_drop(raw: str) -> ScriptedWheelEvent:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise WorldError(f"wheel_drop needs <t>,<Left|Right>,<Air|Ground>: {raw!r}")
    try:
        t = float(parts[0])
    except ValueError:
        raise WorldError(f"bad wheel_drop time: {parts[0]!r}") from None
    if t < 0.0:
        raise WorldError(f"wheel_drop time must be non-negative: {parts[0]!r}")
    sides = {"left": WheelSide.LEFT, "right": WheelSide.RIGHT}
    states = {"air": WheelState.AIR, "ground": WheelState.GROUND}
    side = sides.get(parts[1].lower())
    state = states.get(parts[2].lower())
    if side is None or state is None:
        raise WorldError(f"bad wheel_drop entry: {raw!r}")
    return ScriptedWheelEvent(t, side, state)


def load_world(text: str) -> World:
    """Parse world text; raises :class:`WorldError` on any malformation."""
    lines = text.splitlines()

    tile = 0.5
    scripted: list[ScriptedWheelEvent] = []
    i = 0
    while i < len(lines) and lines[i].strip():
        line = lines[i].strip()
        if "=" not in line:
            raise WorldError(f"malformed header line: {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key == "tile":
            try:
                tile = float(value)
            except ValueError:
                raise WorldError(f"bad tile size: {value!r}") from None
            if not tile > 0.0:
                raise WorldError(f"tile size must be positive: {value!r}")
        elif key == "wheel_drop":
            scripted.append(_parse_wheel_drop(value))
        else:
            raise WorldError(f"unknown header key: {key!r}")
        i += 1
    while i < len(lines) and not lines[i].strip():
        i += 1

    grid = [line.rstrip("\r") for line in lines[i:] if line.strip()]
    if not grid:
        raise WorldError("world has no grid rows")
    cols = len(grid[0])
    rows = len(grid)
    if any(len(row) != cols for row in grid):
        raise WorldError("grid rows have unequal lengths")

    cells = bytearray(cols * rows)
    start: tuple[float, float, float] | None = None
    for top_iy, row in enumerate(grid):
        iy = rows - 1 - top_iy  # row 0 is the top of the map
        for ix, ch in enumerate(row):
            if ch == "R":
                if start is not None:
                    raise WorldError("more than one robot start marker")
                start = ((ix + 0.5) * tile, (iy + 0.5) * tile, 0.0)
                cells[iy * cols + ix] = FLOOR
            elif ch in _CHARS:
                cells[iy * cols + ix] = _CHARS[ch]
            else:
                raise WorldError(f"unknown grid character {ch!r}")
    if start is None:
        raise WorldError("no robot start marker ('R') in grid")

    scripted.sort(key=lambda s: s.t)
    return World(bytes(cells), cols, rows, tile, start, tuple(scripted))


def load_world_file(path: str | Path) -> World:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise WorldError(f"cannot read world file {path}: {exc}") from exc
    return load_world(text)
