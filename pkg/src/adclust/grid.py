"""Grid sectioning and the two clustering thresholds.

The grid cuts each dimension into m uniform sections between the data
min and max (closed upper edge, so the max lands in the last section).
Neighborhood means are exact multiset means: every mean here is
math.fsum(values) / len(values), which makes rt and dt bit-identical
under any permutation of the points and lets an independent oracle
reproduce them exactly.

Distance convention: Euclidean, sqrt of the squared differences summed
in dimension order, float64 throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DegenerateGeometryError, ValidationError

CellKey = tuple[int, ...]


@dataclass
class Grid:
    """Section assignment of a point set.

    sections: m, the section count per dimension (same for every
    dimension). Dimensions with zero width collapse to section 0 and are
    flagged degenerate; they never restrict a neighborhood.
    """

    sections: int
    mins: np.ndarray
    widths: np.ndarray
    cell_of_point: np.ndarray
    cells: dict[CellKey, np.ndarray]
    degenerate_dims: np.ndarray

    @property
    def min_cell_side(self) -> float:
        """Smallest nonzero cell side; inf if every dimension is degenerate."""
        live = self.widths[~self.degenerate_dims]
        return float(live.min()) if live.size else math.inf


@dataclass
class Thresholds:
    rt: float
    dt: float
    coef_rt: float
    coef_dt: float

    def __post_init__(self) -> None:
        if self.coef_rt <= 0 or self.coef_dt <= 0:
            raise ValidationError("threshold coefficients must be positive")
        if self.rt < 0 or self.dt < 0:
            raise ValidationError("thresholds must be nonnegative")


@dataclass
class DensityProfile:
    """Per-point and per-cell averages backing the thresholds.

    avg_dist_point is a(p), the mean distance from p to the other points
    of its 3^q cell neighborhood (NaN when the neighborhood holds only
    p). density_point is n(p), the count of neighborhood points within
    rt of p, self included.
    """

    avg_dist_point: np.ndarray
    avg_dist_cell: dict[CellKey, float]
    density_point: np.ndarray
    density_cell: dict[CellKey, float]


def _fmean(values) -> float:
    vals = list(values)
    return math.fsum(vals) / len(vals)


def build_grid(points: np.ndarray, target_fraction: float = 0.075) -> Grid:
    """Assign points to uniform grid cells.

    The section count per dimension is floor(1 / target_fraction),
    clamped to [1, N], so each section spans roughly a target_fraction
    slice of the data range.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValidationError("points must be a nonempty 2-d array")
    if not 0.0 < target_fraction <= 1.0:
        raise ValidationError("target_fraction must be in (0, 1]")
    n, q = points.shape
    m = min(max(1, math.floor(1.0 / target_fraction)), n)
    mins = points.min(axis=0)
    maxs = points.max(axis=0)
    widths = (maxs - mins) / m
    degenerate = widths == 0.0
    safe = np.where(degenerate, 1.0, widths)
    idx = np.floor((points - mins) / safe).astype(np.int64)
    idx = np.clip(idx, 0, m - 1)
    idx[:, degenerate] = 0
    cells: dict[CellKey, list[int]] = {}
    for i, key in enumerate(map(tuple, idx.tolist())):
        cells.setdefault(key, []).append(i)
    packed = {k: np.array(v, dtype=np.int64) for k, v in cells.items()}
    return Grid(sections=m, mins=mins, widths=widths, cell_of_point=idx,
                cells=packed, degenerate_dims=degenerate)


def neighbor_cells(grid: Grid, key: CellKey) -> list[CellKey]:
    """Index tuples whose section differs by at most 1 in every dimension.

    Includes key itself; indices clip at the grid boundary. Returned in
    sorted order, occupied or not.
    """
    m = grid.sections
    ranges = [range(max(0, k - 1), min(m - 1, k + 1) + 1) for k in key]
    return [tuple(t) for t in product(*ranges)]


def _neighborhood_ids(grid: Grid, key: CellKey) -> np.ndarray:
    parts = [grid.cells[k] for k in neighbor_cells(grid, key) if k in grid.cells]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def compute_rt(grid: Grid, points: np.ndarray,
               coef_rt: float = 20.0) -> tuple[float, np.ndarray, dict[CellKey, float]]:
    """Distance threshold rt = mean(d(c)) / (q * coef_rt).

    a(p) averages distances from p to its neighborhood, excluding p;
    d(c) averages a(p) over the cell's points with a defined a(p); cells
    where no point has one contribute nothing. All points isolated in
    their neighborhoods is an error.
    """
    if coef_rt <= 0:
        raise ValidationError("coef_rt must be positive")
    n, q = points.shape
    a_p = np.full(n, np.nan)
    d_c: dict[CellKey, float] = {}
    for key in sorted(grid.cells):
        members = grid.cells[key]
        nb = _neighborhood_ids(grid, key)
        block = points[nb]
        a_vals = []
        for p in members.tolist():
            diffs = block - points[p]
            dist = np.sqrt((diffs * diffs).sum(axis=1))
            dist = dist[nb != p]
            if dist.size:
                a_p[p] = _fmean(dist.tolist())
                a_vals.append(a_p[p])
        if a_vals:
            d_c[key] = _fmean(a_vals)
    if not d_c:
        raise DegenerateGeometryError("degenerate density geometry")
    rt = _fmean(d_c.values()) / (q * coef_rt)
    return rt, a_p, d_c


def compute_density(grid: Grid, points: np.ndarray, rt: float,
                    exact: bool = False) -> np.ndarray:
    """Point density n(p): neighborhood points within rt of p, p included.

    The neighborhood restriction undercounts when rt exceeds the cell
    side; exact=True counts against all points instead (validation
    fallback).
    """
    if rt < 0:
        raise ValidationError("rt must be nonnegative")
    n = points.shape[0]
    n_p = np.zeros(n, dtype=np.int64)
    if exact:
        for p in range(n):
            diffs = points - points[p]
            dist = np.sqrt((diffs * diffs).sum(axis=1))
            n_p[p] = int((dist <= rt).sum())
        return n_p
    for key in sorted(grid.cells):
        members = grid.cells[key]
        nb = _neighborhood_ids(grid, key)
        block = points[nb]
        for p in members.tolist():
            diffs = block - points[p]
            dist = np.sqrt((diffs * diffs).sum(axis=1))
            n_p[p] = int((dist <= rt).sum())
    return n_p


def compute_dt(grid: Grid, n_p: np.ndarray, coef_dt: float = 0.95,
               log_base: float = math.e) -> tuple[float, dict[CellKey, float]]:
    """Density threshold dt = mean(n(c)) / log(N) * coef_dt.

    n(c) is the mean n(p) over the cell's points; the outer mean runs
    over occupied cells. log is natural by default; log_base switches it
    (the pseudocode variant uses base 10).
    """
    if coef_dt <= 0:
        raise ValidationError("coef_dt must be positive")
    if log_base <= 1.0:
        raise ValidationError("log_base must exceed 1")
    n = int(n_p.shape[0])
    if n < 2:
        raise DegenerateGeometryError("dataset too small for density threshold")
    n_c: dict[CellKey, float] = {}
    for key in sorted(grid.cells):
        members = grid.cells[key]
        n_c[key] = _fmean(n_p[members].tolist())
    log_n = math.log(n) / math.log(log_base)
    dt = _fmean(n_c.values()) / log_n * coef_dt
    return dt, n_c
