"""Occupancy-grid ingestion (map_server PGM + YAML) and box approximation of obstacles."""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy import ndimage

from .geometry import ObstacleRect, Point

Workspace = Tuple[float, float, float, float]

REQUIRED_YAML_KEYS = ("image", "resolution", "origin", "occupied_thresh", "free_thresh", "negate")


class CellState(enum.IntEnum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


class MapFormatError(ValueError):
    """Raised for malformed map YAML or PGM input."""


@dataclass(frozen=True)
class MapThresholds:
    occupied_thresh: float = 0.65
    free_thresh: float = 0.196
    negate: bool = False

    def __post_init__(self):
        if not (0.0 <= self.free_thresh < self.occupied_thresh <= 1.0):
            raise MapFormatError(
                f"need 0 <= free_thresh < occupied_thresh <= 1, got "
                f"{self.free_thresh}, {self.occupied_thresh}"
            )


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Ternary raster. ``cells[row, col]``; row 0 is the bottom of the map."""

    width: int
    height: int
    resolution: float
    origin: Tuple[float, float, float]
    cells: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.resolution <= 0:
            raise ValueError("width, height and resolution must be positive")
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.size != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} cells, got {cells.size}"
            )
        cells = cells.reshape(self.height, self.width).copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))

    @property
    def extent(self) -> Workspace:
        """World bounds (x_min, y_min, x_max, y_max) covered by the grid."""
        ox, oy, _ = self.origin
        return (ox, oy, ox + self.width * self.resolution, oy + self.height * self.resolution)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            (self.width, self.height, self.resolution, self.origin)
            == (other.width, other.height, other.resolution, other.origin)
            and np.array_equal(self.cells, other.cells)
        )


def _parse_pgm(data: bytes) -> np.ndarray:
    """Decode a P5 or P2 PGM with maxval 255 into a (rows, cols) uint8 array."""
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise MapFormatError(f"unsupported PGM magic {magic!r}")
    # header: magic, width, height, maxval, with '#' comments allowed between tokens
    pos = 2
    tokens = []
    token_re = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([0-9]+)")
    while len(tokens) < 3:
        m = token_re.match(data, pos)
        if m is None:
            raise MapFormatError("truncated PGM header")
        tokens.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = tokens
    if maxval != 255:
        raise MapFormatError(f"maxval must be 255, got {maxval}")
    if width <= 0 or height <= 0:
        raise MapFormatError("PGM dimensions must be positive")
    n = width * height
    if magic == b"P5":
        raster = data[pos + 1:]
        if len(raster) != n:
            raise MapFormatError(f"PGM declares {n} pixels, found {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) != n:
            raise MapFormatError(f"PGM declares {n} pixels, found {len(body)}")
        values = np.array([int(v) for v in body], dtype=np.int64)
        if values.min() < 0 or values.max() > 255:
            raise MapFormatError("pixel value outside 0..255")
        pixels = values.astype(np.uint8)
    return pixels.reshape(height, width)


def _encode_pgm(pixels: np.ndarray) -> bytes:
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def parse_map(yaml_text: str, pgm_bytes: bytes) -> OccupancyGrid:
    """Build an occupancy grid from map_server YAML text and the raw PGM image."""
    try:
        meta = yaml.safe_load(yaml_text)
    except yaml.YAMLError as exc:
        raise MapFormatError(f"invalid YAML: {exc}") from exc
    if not isinstance(meta, dict):
        raise MapFormatError("map YAML must be a mapping")
    missing = [k for k in REQUIRED_YAML_KEYS if k not in meta]
    if missing:
        raise MapFormatError(f"map YAML missing keys: {', '.join(missing)}")
    origin = meta["origin"]
    if not isinstance(origin, (list, tuple)) or len(origin) != 3:
        raise MapFormatError("origin must be [x, y, yaw]")
    thresholds = MapThresholds(
        float(meta["occupied_thresh"]), float(meta["free_thresh"]), bool(int(meta["negate"]))
    )
    pixels = _parse_pgm(pgm_bytes).astype(np.float64)
    occ = pixels / 255.0 if thresholds.negate else (255.0 - pixels) / 255.0
    cells = np.full(occ.shape, CellState.UNKNOWN, dtype=np.int8)
    cells[occ >= thresholds.occupied_thresh] = CellState.OCCUPIED
    cells[occ <= thresholds.free_thresh] = CellState.FREE
    # image row 0 is the top edge of the map
    cells = cells[::-1]
    return OccupancyGrid(
        width=cells.shape[1],
        height=cells.shape[0],
        resolution=float(meta["resolution"]),
        origin=tuple(float(v) for v in origin),
        cells=cells,
    )


def load_map(yaml_path) -> OccupancyGrid:
    """Read a map YAML file and the image it references (relative to the YAML)."""
    yaml_path = Path(yaml_path)
    text = yaml_path.read_text()
    meta = yaml.safe_load(text)
    if not isinstance(meta, dict) or "image" not in meta:
        raise MapFormatError(f"{yaml_path}: missing 'image' key")
    image = Path(meta["image"])
    if not image.is_absolute():
        image = yaml_path.parent / image
    return parse_map(text, image.read_bytes())


def save_map(grid: OccupancyGrid, yaml_path, thresholds: MapThresholds = MapThresholds()) -> None:
    """Write ``grid`` as a P5 PGM plus map_server YAML next to it."""
    yaml_path = Path(yaml_path)
    pgm_path = yaml_path.with_suffix(".pgm")
    pixels = np.full(grid.cells.shape, 205, dtype=np.uint8)
    pixels[grid.cells == CellState.FREE] = 254
    pixels[grid.cells == CellState.OCCUPIED] = 0
    if thresholds.negate:
        pixels = 255 - pixels
    pgm_path.write_bytes(_encode_pgm(pixels[::-1]))
    meta = {
        "image": pgm_path.name,
        "resolution": grid.resolution,
        "origin": list(grid.origin),
        "occupied_thresh": thresholds.occupied_thresh,
        "free_thresh": thresholds.free_thresh,
        "negate": int(thresholds.negate),
    }
    yaml_path.write_text(yaml.safe_dump(meta, sort_keys=False))


def world_to_cell(grid: OccupancyGrid, p: Point) -> Tuple[int, int]:
    """(col, row) of the cell containing world point ``p``."""
    ox, oy, _ = grid.origin
    col = math.floor((p[0] - ox) / grid.resolution)
    row = math.floor((p[1] - oy) / grid.resolution)
    # the far edge belongs to the last cell
    if col == grid.width and math.isclose(p[0], ox + grid.width * grid.resolution):
        col -= 1
    if row == grid.height and math.isclose(p[1], oy + grid.height * grid.resolution):
        row -= 1
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        raise ValueError(f"point {p} outside the map extent {grid.extent}")
    return col, row


def cell_to_world(grid: OccupancyGrid, col: int, row: int) -> Point:
    """World coordinates of the centre of cell (col, row)."""
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        raise ValueError(f"cell ({col}, {row}) outside {grid.width}x{grid.height} grid")
    ox, oy, _ = grid.origin
    return (ox + (col + 0.5) * grid.resolution, oy + (row + 0.5) * grid.resolution)


def _cells_to_rect(grid: OccupancyGrid, rows: slice, cols: slice) -> ObstacleRect:
    ox, oy, _ = grid.origin
    res = grid.resolution
    return ObstacleRect(
        ox + cols.start * res, oy + rows.start * res, ox + cols.stop * res, oy + rows.stop * res
    )


def _tight_box(mask: np.ndarray, rows: slice, cols: slice) -> Optional[Tuple[slice, slice]]:
    sub = mask[rows, cols]
    r_idx = np.flatnonzero(sub.any(axis=1))
    c_idx = np.flatnonzero(sub.any(axis=0))
    if r_idx.size == 0:
        return None
    return (
        slice(rows.start + r_idx[0], rows.start + r_idx[-1] + 1),
        slice(cols.start + c_idx[0], cols.start + c_idx[-1] + 1),
    )


def _split_box(mask: np.ndarray, rows: slice, cols: slice, out: list) -> None:
    box = _tight_box(mask, rows, cols)
    if box is None:
        return
    rows, cols = box
    h, w = rows.stop - rows.start, cols.stop - cols.start
    fill = mask[rows, cols].mean()
    if fill >= 0.5 or max(h, w) < 4:
        out.append(box)
        return
    if w >= h:
        mid = cols.start + w // 2
        _split_box(mask, rows, slice(cols.start, mid), out)
        _split_box(mask, rows, slice(mid, cols.stop), out)
    else:
        mid = rows.start + h // 2
        _split_box(mask, slice(rows.start, mid), cols, out)
        _split_box(mask, slice(mid, rows.stop), cols, out)


def extract_obstacles(grid: OccupancyGrid, split: bool = False) -> List[ObstacleRect]:
    """Bounding boxes of the 8-connected components of non-free cells.

    Unknown cells count as occupied. With ``split=True`` a sparsely filled box
    (fill ratio below 0.5) is halved along its longer side and each half
    re-boxed, down to pieces of 2x2 cells.
    """
    mask = grid.cells != CellState.FREE
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    boxes = []
    for label_id, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        if split:
            component = labels == label_id
            _split_box(component, sl[0], sl[1], boxes)
        else:
            boxes.append(sl)
    rects = {_cells_to_rect(grid, rows, cols) for rows, cols in boxes}
    return sorted(rects, key=lambda r: (r.x_bl, r.y_bl, r.x_tr, r.y_tr))


def clip_to_workspace(rects: Sequence[ObstacleRect], workspace: Workspace) -> List[ObstacleRect]:
    """Clip rectangles to the workspace; rectangles left with no area are dropped."""
    x0, y0, x1, y1 = workspace
    out = []
    for r in rects:
        xb, yb = max(r.x_bl, x0), max(r.y_bl, y0)
        xt, yt = min(r.x_tr, x1), min(r.y_tr, y1)
        if xb < xt and yb < yt:
            out.append(ObstacleRect(xb, yb, xt, yt))
    return out


def inflate_obstacles(
    rects: Sequence[ObstacleRect], r: float, workspace: Optional[Workspace] = None
) -> List[ObstacleRect]:
    """Grow every rectangle by ``r`` on each side, then clip to ``workspace`` if given."""
    if r < 0:
        raise ValueError(f"inflation radius must be non-negative, got {r}")
    grown = [ObstacleRect(o.x_bl - r, o.y_bl - r, o.x_tr + r, o.y_tr + r) for o in rects]
    if workspace is None:
        return grown
    return clip_to_workspace(grown, workspace)


def scale_rects(rects: Sequence[ObstacleRect], factor: float) -> List[ObstacleRect]:
    """Convert rectangles between length units (e.g. metres to centimetres)."""
    return [ObstacleRect(o.x_bl * factor, o.y_bl * factor, o.x_tr * factor, o.y_tr * factor) for o in rects]


def obstacles_to_json(rects: Sequence[ObstacleRect]) -> str:
    return json.dumps([r.to_dict() for r in rects])


def obstacles_from_json(text: str) -> List[ObstacleRect]:
    return [ObstacleRect.from_dict(d) for d in json.loads(text)]
