"""Dartboard geometry: outcome labels, scoring, classification and action grids.

Outcomes are indexed 0..62:

    0..19   S1..S20
    20..39  D1..D20
    40..59  T1..T20
    60      SB
    61      DB
    62      MISS

All distances are millimeters, origin at the center of the double bull.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

N_OUTCOMES = 63
SB_INDEX = 60
DB_INDEX = 61
MISS_INDEX = 62

# Standard segment layout, clockwise starting from the top wedge.
STANDARD_SEGMENT_ORDER = (20, 1, 18, 4, 13, 6, 10, 15, 2, 17, 3, 19, 7, 16, 8, 11, 14, 9, 12, 5)

GEOMETRY_FORMAT_VERSION = 1


def outcome_index(kind: str, base: int | None = None) -> int:
    """Index of an outcome given its kind ('S','D','T','SB','DB','MISS') and base."""
    if kind == "S":
        return base - 1
    if kind == "D":
        return 20 + base - 1
    if kind == "T":
        return 40 + base - 1
    return {"SB": SB_INDEX, "DB": DB_INDEX, "MISS": MISS_INDEX}[kind]


def outcome_name(idx: int) -> str:
    if idx < 20:
        return f"S{idx + 1}"
    if idx < 40:
        return f"D{idx - 19}"
    if idx < 60:
        return f"T{idx - 39}"
    return {SB_INDEX: "SB", DB_INDEX: "DB", MISS_INDEX: "MISS"}[idx]


def parse_outcome(name: str) -> int:
    """Parse a label like 'T20', 'D16', 'SB', 'MISS' to its index."""
    name = name.strip().upper()
    if name in ("SB", "DB", "MISS"):
        return {"SB": SB_INDEX, "DB": DB_INDEX, "MISS": MISS_INDEX}[name]
    kind, base = name[0], int(name[1:])
    if kind not in "SDT" or not 1 <= base <= 20:
        raise ValueError(f"bad outcome label: {name!r}")
    return outcome_index(kind, base)


ALL_LABELS = tuple(outcome_name(i) for i in range(N_OUTCOMES))
SCORING_LABELS = ALL_LABELS[:62]


def _scores() -> np.ndarray:
    h = np.zeros(N_OUTCOMES, dtype=np.int64)
    for b in range(1, 21):
        h[outcome_index("S", b)] = b
        h[outcome_index("D", b)] = 2 * b
        h[outcome_index("T", b)] = 3 * b
    h[SB_INDEX] = 25
    h[DB_INDEX] = 50
    return h


SCORES = _scores()
# doubles (incl. DB) are the only legal checkout darts
IS_DOUBLE = np.zeros(N_OUTCOMES, dtype=bool)
IS_DOUBLE[20:40] = True
IS_DOUBLE[DB_INDEX] = True
MAX_SCORE = 60


def score(outcome: int | str) -> int:
    """Numeric score h(z) of an outcome."""
    if isinstance(outcome, str):
        outcome = parse_outcome(outcome)
    return int(SCORES[outcome])


@dataclass(frozen=True)
class BoardGeometry:
    """Radii of the board wires (mm) and the wedge ordering.

    The 20-wedge is centered on the +y axis; wedges proceed clockwise in
    ``segment_order``.  Angles are measured counterclockwise from +x.
    """

    r_db: float = 6.35
    r_sb: float = 15.9
    r_treble_in: float = 99.0
    r_treble_out: float = 107.0
    r_double_in: float = 162.0
    r_double_out: float = 170.0
    segment_order: tuple[int, ...] = STANDARD_SEGMENT_ORDER

    def __post_init__(self):
        radii = (self.r_db, self.r_sb, self.r_treble_in, self.r_treble_out,
                 self.r_double_in, self.r_double_out)
        if not all(a < b for a, b in zip((0.0,) + radii, radii)):
            raise ValueError(f"radii must be strictly increasing and positive: {radii}")
        if sorted(self.segment_order) != list(range(1, 21)):
            raise ValueError("segment_order must be a permutation of 1..20")

    def to_json(self) -> str:
        doc = {
            "format_version": GEOMETRY_FORMAT_VERSION,
            "radii_mm": {
                "db": self.r_db, "sb": self.r_sb,
                "treble_in": self.r_treble_in, "treble_out": self.r_treble_out,
                "double_in": self.r_double_in, "double_out": self.r_double_out,
            },
            "segment_order": list(self.segment_order),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BoardGeometry":
        doc = json.loads(text)
        if doc.get("format_version") != GEOMETRY_FORMAT_VERSION:
            raise ValueError(f"unsupported geometry format_version: {doc.get('format_version')}")
        r = doc["radii_mm"]
        return cls(r_db=r["db"], r_sb=r["sb"], r_treble_in=r["treble_in"],
                   r_treble_out=r["treble_out"], r_double_in=r["double_in"],
                   r_double_out=r["double_out"], segment_order=tuple(doc["segment_order"]))


def classify(geom: BoardGeometry, x, y) -> np.ndarray | int:
    """Map board coordinates to outcome indices (vectorized).

    Boundary points (exactly on a wire) resolve toward the smaller radius /
    smaller angle so that the map is deterministic.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    scalar = x.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    r = np.hypot(x, y)
    out = np.full(r.shape, MISS_INDEX, dtype=np.int64)

    on_board = r <= geom.r_double_out
    bull_d = r <= geom.r_db
    bull_s = (r > geom.r_db) & (r <= geom.r_sb)
    out[bull_d] = DB_INDEX
    out[bull_s] = SB_INDEX

    wedge_zone = on_board & ~bull_d & ~bull_s
    if np.any(wedge_zone):
        theta = np.degrees(np.arctan2(y[wedge_zone], x[wedge_zone]))
        # wedge j spans angles (99 - 18*(j+1), 99 - 18*j]; ties go to the
        # smaller-angle wedge, which floor() delivers directly
        j = np.floor(((99.0 - theta) % 360.0) / 18.0).astype(np.int64) % 20
        base = np.asarray(geom.segment_order, dtype=np.int64)[j]
        rw = r[wedge_zone]
        treble = (rw > geom.r_treble_in) & (rw <= geom.r_treble_out)
        double = (rw > geom.r_double_in)
        kind_off = np.where(double, 20, np.where(treble, 40, 0))
        out[wedge_zone] = kind_off + base - 1
    return int(out[0]) if scalar else out


def region_center(geom: BoardGeometry, outcome: int | str) -> tuple[float, float]:
    """Canonical aim point of a scoring region.

    Wedge regions use the polar midpoint of their annular sector; the single
    region (a union of two annuli) uses the midpoint of the inner band, which
    is the larger of the two.  DB returns the origin; SB, whose angular midpoint
    is undefined, uses the radial midpoint of its annulus on the +y axis.
    """
    if isinstance(outcome, str):
        outcome = parse_outcome(outcome)
    if outcome == MISS_INDEX:
        raise ValueError("MISS has no region center")
    if outcome == DB_INDEX:
        return (0.0, 0.0)
    if outcome == SB_INDEX:
        return (0.0, 0.5 * (geom.r_db + geom.r_sb))
    base = outcome % 20 + 1
    j = geom.segment_order.index(base)
    theta = np.radians(99.0 - 18.0 * j - 9.0)
    if outcome < 20:  # single: inner band between SB and treble wires
        rad = 0.5 * (geom.r_sb + geom.r_treble_in)
    elif outcome < 40:  # double
        rad = 0.5 * (geom.r_double_in + geom.r_double_out)
    else:  # treble
        rad = 0.5 * (geom.r_treble_in + geom.r_treble_out)
    return (rad * np.cos(theta), rad * np.sin(theta))


@dataclass(frozen=True)
class ActionGrid:
    """Square-cell action grid: cell centers inside the board disc, row-major by (y, x)."""

    cell_size: float
    xy: np.ndarray = field(repr=False)  # (n, 2) float64

    def __len__(self) -> int:
        return self.xy.shape[0]


def make_grid(geom: BoardGeometry, cell_size: float) -> ActionGrid:
    """Grid of cell centers covering the board disc."""
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    R = geom.r_double_out
    n = int(np.ceil(R / cell_size))
    coords = (np.arange(-n, n) + 0.5) * cell_size
    xx, yy = np.meshgrid(coords, coords)  # rows vary y, columns vary x
    x, y = xx.ravel(), yy.ravel()
    inside = x * x + y * y <= R * R
    xy = np.column_stack([x[inside], y[inside]])
    return ActionGrid(cell_size=float(cell_size), xy=xy)


def region_target_indices(grid: ActionGrid, geom: BoardGeometry, outcome: int) -> np.ndarray:
    """Grid indices whose cell centers classify to the given outcome."""
    labels = classify(geom, grid.xy[:, 0], grid.xy[:, 1])
    return np.flatnonzero(labels == outcome)
