"""Data model, CSV ingestion, and the lidar subsampling operation.

The toolkit models two misaligned responses: sparsely observed field biomass
(AGB, Mg/ha, modeled on the square-root scale) and strip-sampled lidar 90th
percentile canopy height (m), with an optional wall-to-wall percent tree
cover covariate. Coordinates are Euclidean kilometers throughout.

Points CSV schema: ``id,x_km,y_km,agb_mgha,p90_m,treecover_pct`` where an
empty field means missing (misaligned record, not an error). Grid CSV schema:
``id,x_km,y_km,cell_area_ha,treecover_pct[,block_id]``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DataError,
    DuplicateLocation,
    EmptyLidar,
    MissingColumn,
    NegativeResponse,
    NonNumeric,
)

POINTS_COLUMNS = ("id", "x_km", "y_km", "agb_mgha", "p90_m", "treecover_pct")
GRID_COLUMNS = ("id", "x_km", "y_km", "cell_area_ha", "treecover_pct")


def _freeze(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Prediction cells with areas, optional tree cover and block labels."""

    ids: np.ndarray          # (g,) str
    xy: np.ndarray           # (g, 2) km
    cell_area_ha: np.ndarray  # (g,)
    treecover: np.ndarray    # (g,), NaN = missing
    block_id: np.ndarray | None = None  # (g,) str, optional

    def __post_init__(self):
        for name in ("ids", "xy", "cell_area_ha", "treecover", "block_id"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _freeze(v))
        if not np.all(np.isfinite(self.xy)):
            raise DataError("grid coordinates must be finite")
        if np.any(self.cell_area_ha <= 0):
            raise DataError("grid cell areas must be positive")

    @property
    def n_cells(self):
        return self.xy.shape[0]

    @property
    def total_area_ha(self):
        return float(self.cell_area_ha.sum())


@dataclass(frozen=True)
class Dataset:
    """Immutable misaligned bivariate spatial dataset.

    Field and lidar observations are independent record lists that may share
    coordinates (colocated plots); the joint covariance handles colocation,
    rows are never merged. ``field_treecover``/``lidar_treecover`` carry the
    covariate at each observation, NaN where unknown.
    """

    field_xy: np.ndarray       # (n, 2) km
    field_agb: np.ndarray      # (n,) Mg/ha
    lidar_xy: np.ndarray       # (m, 2) km
    lidar_p90: np.ndarray      # (m,) meters
    field_treecover: np.ndarray  # (n,), NaN = missing
    lidar_treecover: np.ndarray  # (m,), NaN = missing
    field_ids: np.ndarray = None  # (n,) str
    lidar_ids: np.ndarray = None  # (m,) str
    grid: Grid | None = None

    def __post_init__(self):
        if self.field_ids is None:
            object.__setattr__(self, "field_ids",
                               np.array([str(i) for i in range(len(self.field_agb))]))
        if self.lidar_ids is None:
            object.__setattr__(self, "lidar_ids",
                               np.array([str(i) for i in range(len(self.lidar_p90))]))
        for name in ("field_xy", "field_agb", "lidar_xy", "lidar_p90",
                     "field_treecover", "lidar_treecover", "field_ids", "lidar_ids"):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name))))
        if not np.all(np.isfinite(self.field_xy)) or not np.all(np.isfinite(self.lidar_xy)):
            raise DataError("coordinates must be finite")
        if np.any(self.field_agb < 0):
            row = int(np.argmax(self.field_agb < 0))
            raise NegativeResponse(row, float(self.field_agb[row]))
        if np.any(self.lidar_p90 < 0) or not np.all(np.isfinite(self.lidar_p90)):
            row = int(np.argmax(~(self.lidar_p90 >= 0)))
            raise NegativeResponse(row, float(self.lidar_p90[row]))
        _check_duplicates(self.field_xy, "field")
        _check_duplicates(self.lidar_xy, "lidar")

    @property
    def n_field(self):
        return self.field_xy.shape[0]

    @property
    def n_lidar(self):
        return self.lidar_xy.shape[0]

    @property
    def field_sqrt(self):
        """Square-root transformed AGB, the modeled primary response."""
        return np.sqrt(self.field_agb)

    @property
    def covariates(self):
        """Map (x, y) -> tree cover over every location with a known value."""
        out = {}
        for xy, tc in ((self.field_xy, self.field_treecover),
                       (self.lidar_xy, self.lidar_treecover)):
            for (x, y), v in zip(xy, tc):
                if not math.isnan(v):
                    out[(float(x), float(y))] = float(v)
        if self.grid is not None:
            for (x, y), v in zip(self.grid.xy, self.grid.treecover):
                if not math.isnan(v):
                    out[(float(x), float(y))] = float(v)
        return out

    def with_grid(self, grid: Grid) -> "Dataset":
        return replace(self, grid=grid)

    def colocated_lidar_mask(self):
        """Boolean mask over lidar rows whose coordinates exactly match a field plot."""
        plots = {(float(x), float(y)) for x, y in self.field_xy}
        return np.array([(float(x), float(y)) in plots for x, y in self.lidar_xy])

    def equals(self, other: "Dataset") -> bool:
        def eq(a, b):
            return a.shape == b.shape and bool(np.all((a == b) | (_nan(a) & _nan(b))))

        def _nan(a):
            return np.isnan(a) if a.dtype.kind == "f" else np.zeros(a.shape, bool)

        return (eq(self.field_xy, other.field_xy) and eq(self.field_agb, other.field_agb)
                and eq(self.lidar_xy, other.lidar_xy) and eq(self.lidar_p90, other.lidar_p90)
                and eq(self.field_treecover, other.field_treecover)
                and eq(self.lidar_treecover, other.lidar_treecover)
                and eq(self.field_ids, other.field_ids) and eq(self.lidar_ids, other.lidar_ids))


def _check_duplicates(xy, response):
    seen = {}
    for i, (x, y) in enumerate(xy):
        key = (float(x), float(y))
        if key in seen:
            raise DuplicateLocation(response, i)
        seen[key] = i


def sqrt_transform(agb):
    """Square root of AGB density; the primary response is modeled on this scale."""
    agb = np.asarray(agb, dtype=float)
    if np.any(agb < 0):
        bad = np.asarray(agb < 0).nonzero()[0]
        raise NegativeResponse(int(bad[0]), float(np.atleast_1d(agb)[bad[0]]))
    return np.sqrt(agb)


DEFAULT_SCHEMA = {
    "id": "id", "x": "x_km", "y": "y_km",
    "agb": "agb_mgha", "p90": "p90_m", "treecover": "treecover_pct",
}


def _parse_float(raw, row, column):
    try:
        return float(raw)
    except ValueError:
        raise NonNumeric(row, column, raw) from None


def load_points(path, schema=None, coords="km", jitter_km=0.0, seed=0):
    """Read a points CSV into a validated Dataset.

    Empty agb/p90 cells produce misaligned records. ``coords="m"`` divides
    coordinates by 1000. ``jitter_km`` > 0 perturbs only rows that would
    duplicate an earlier location within the same response (uniform in
    +/- jitter_km per coordinate, deterministic under ``seed``); duplicates
    are otherwise a hard error.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for key in ("id", "x", "y", "agb", "p90", "treecover"):
            if schema[key] not in header:
                raise MissingColumn(schema[key])
        rows = list(reader)

    scale = 1.0 / 1000.0 if coords == "m" else 1.0
    rng = np.random.default_rng(seed)
    f_ids, f_xy, f_agb, f_tc = [], [], [], []
    l_ids, l_xy, l_p90, l_tc = [], [], [], []
    seen = {"field": set(), "lidar": set()}

    def place(response, x, y, i):
        key = (x, y)
        if key in seen[response]:
            if jitter_km > 0:
                while key in seen[response]:
                    key = (x + rng.uniform(-jitter_km, jitter_km),
                           y + rng.uniform(-jitter_km, jitter_km))
            else:
                raise DuplicateLocation(response, i)
        seen[response].add(key)
        return key

    for i, row in enumerate(rows):
        x = _parse_float(row[schema["x"]], i, schema["x"]) * scale
        y = _parse_float(row[schema["y"]], i, schema["y"]) * scale
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NonNumeric(i, schema["x"], (x, y))
        tc_raw = (row[schema["treecover"]] or "").strip()
        tc = _parse_float(tc_raw, i, schema["treecover"]) if tc_raw else math.nan
        if not math.isnan(tc) and not 0.0 <= tc <= 100.0:
            raise DataError(f"row {i}: tree cover {tc} outside [0, 100]")

        agb_raw = (row[schema["agb"]] or "").strip()
        if agb_raw:
            agb = _parse_float(agb_raw, i, schema["agb"])
            if agb < 0:
                raise NegativeResponse(i, agb)
            fx, fy = place("field", x, y, i)
            f_ids.append(row[schema["id"]])
            f_xy.append((fx, fy))
            f_agb.append(agb)
            f_tc.append(tc)
        p90_raw = (row[schema["p90"]] or "").strip()
        if p90_raw:
            p90 = _parse_float(p90_raw, i, schema["p90"])
            if p90 < 0:
                raise NegativeResponse(i, p90)
            lx, ly = place("lidar", x, y, i)
            l_ids.append(row[schema["id"]])
            l_xy.append((lx, ly))
            l_p90.append(p90)
            l_tc.append(tc)

    return Dataset(
        field_xy=np.array(f_xy, dtype=float).reshape(-1, 2),
        field_agb=np.array(f_agb, dtype=float),
        lidar_xy=np.array(l_xy, dtype=float).reshape(-1, 2),
        lidar_p90=np.array(l_p90, dtype=float),
        field_treecover=np.array(f_tc, dtype=float),
        lidar_treecover=np.array(l_tc, dtype=float),
        field_ids=np.array(f_ids, dtype=object),
        lidar_ids=np.array(l_ids, dtype=object),
    )


def _fmt(x):
    """Shortest decimal text that round-trips the float exactly."""
    if isinstance(x, float) and math.isnan(x):
        return ""
    return repr(float(x))


def write_points(d: Dataset, path):
    """Write a Dataset back to the points CSV schema, one row per observation.

    Floats are emitted as shortest round-trip decimals so load(write(d))
    reproduces d bitwise.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(POINTS_COLUMNS)
        for i in range(d.n_field):
            w.writerow([d.field_ids[i], _fmt(d.field_xy[i, 0]), _fmt(d.field_xy[i, 1]),
                        _fmt(d.field_agb[i]), "", _fmt(d.field_treecover[i])])
        for j in range(d.n_lidar):
            w.writerow([d.lidar_ids[j], _fmt(d.lidar_xy[j, 0]), _fmt(d.lidar_xy[j, 1]),
                        "", _fmt(d.lidar_p90[j]), _fmt(d.lidar_treecover[j])])


def load_grid(path, schema=None, coords="km"):
    """Read a prediction grid CSV (block_id column optional)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in GRID_COLUMNS:
            if col not in header:
                raise MissingColumn(col)
        has_blocks = "block_id" in header
        rows = list(reader)

    scale = 1.0 / 1000.0 if coords == "m" else 1.0
    ids, xy, area, tc, blocks = [], [], [], [], []
    for i, row in enumerate(rows):
        ids.append(row["id"])
        xy.append((_parse_float(row["x_km"], i, "x_km") * scale,
                   _parse_float(row["y_km"], i, "y_km") * scale))
        area.append(_parse_float(row["cell_area_ha"], i, "cell_area_ha"))
        raw = (row["treecover_pct"] or "").strip()
        tc.append(_parse_float(raw, i, "treecover_pct") if raw else math.nan)
        if has_blocks:
            blocks.append(row["block_id"])
    return Grid(
        ids=np.array(ids, dtype=object),
        xy=np.array(xy, dtype=float).reshape(-1, 2),
        cell_area_ha=np.array(area, dtype=float),
        treecover=np.array(tc, dtype=float),
        block_id=np.array(blocks, dtype=object) if has_blocks else None,
    )


def write_grid(grid: Grid, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        cols = list(GRID_COLUMNS) + (["block_id"] if grid.block_id is not None else [])
        w.writerow(cols)
        for i in range(grid.n_cells):
            row = [grid.ids[i], _fmt(grid.xy[i, 0]), _fmt(grid.xy[i, 1]),
                   _fmt(grid.cell_area_ha[i]), _fmt(grid.treecover[i])]
            if grid.block_id is not None:
                row.append(grid.block_id[i])
            w.writerow(row)


def subsample_lidar(d: Dataset, fraction, seed) -> Dataset:
    """Random thinning of the lidar set, keeping plot-colocated cells.

    Draws round(fraction * m) cells uniformly without replacement from the
    lidar rows not colocated with a field plot (capped at that pool's size),
    then force-retains every plot-colocated cell; original row order is kept.
    Deterministic under seed.
    """
    if d.n_lidar == 0:
        raise EmptyLidar()
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"subsample fraction must be in (0, 1], got {fraction}")
    colocated = d.colocated_lidar_mask()
    pool = np.flatnonzero(~colocated)
    k = min(int(round(fraction * d.n_lidar)), pool.size)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(pool, size=k, replace=False) if k else np.array([], dtype=int)
    keep = np.zeros(d.n_lidar, dtype=bool)
    keep[chosen] = True
    keep |= colocated
    return replace(
        d,
        lidar_xy=d.lidar_xy[keep],
        lidar_p90=d.lidar_p90[keep],
        lidar_treecover=d.lidar_treecover[keep],
        lidar_ids=d.lidar_ids[keep],
    )
