"""Set operations on base-region grids and the positioning-uncertainty filter.

Intersections of base regions are cell-wise ANDs; each non-empty
intersection is annotated with its 4-connected components and their largest
inscribed circles (exact Euclidean distance transform over cell centers,
out-of-grid cells counting as infeasible).  Intersections whose best
inscribed radius falls below the positioning-uncertainty level are discarded
by the filter.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import ndimage

from .baseregion import BaseGridSpec, BaseRegion

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])

UNCERTAINTY_MODELS = ("uniform-disk", "gaussian-radial", "boundary-worst-case")


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class UncertaintyModel:
    """Base positioning error: level sigma (m), distribution tag, RNG seed."""

    sigma: float
    model: str = "uniform-disk"
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        if self.model not in UNCERTAINTY_MODELS:
            raise ValueError(
                f"unknown uncertainty model {self.model!r}; "
                f"expected one of {UNCERTAINTY_MODELS}")


@dataclass(frozen=True)
class Component:
    """One 4-connected component with its inscribed circle."""

    mask: np.ndarray
    cells: int
    center: tuple[float, float]
    radius: float
    radius_cells_sq: int  # squared radius in cell units (exact integer)


@dataclass(frozen=True)
class IntersectionRecord:
    """Cell-wise AND of the base regions of a tray subset."""

    trays: tuple[str, ...]
    order: int
    grid: BaseGridSpec
    mask: np.ndarray
    components: tuple[Component, ...]

    @property
    def best_component(self) -> Component:
        best = self.components[0]
        for comp in self.components[1:]:
            if comp.radius_cells_sq > best.radius_cells_sq:
                best = comp
        return best

    @property
    def robust_center(self) -> tuple[float, float]:
        return self.best_component.center

    @property
    def robust_radius(self) -> float:
        return self.best_component.radius


def _check_grids(regions) -> BaseGridSpec:
    grid = regions[0].grid
    for region in regions[1:]:
        if region.grid != grid:
            raise GridMismatchError(
                "regions use different base grids and cannot be intersected")
    return grid


def intersect(regions: list[BaseRegion]) -> np.ndarray:
    """Cell-wise AND of region masks (identical grid specs required)."""
    if not regions:
        raise ValueError("need at least one region")
    _check_grids(regions)
    mask = regions[0].mask.copy()
    for region in regions[1:]:
        mask &= region.mask
    return mask


def connected_components(mask: np.ndarray) -> list[np.ndarray]:
    """4-connected components, largest first, ties by top-left cell."""
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=_CROSS)
    comps = []
    for lab in range(1, count + 1):
        comp = labels == lab
        size = int(comp.sum())
        first = int(np.flatnonzero(comp.ravel())[0])
        comps.append((-size, first, comp))
    comps.sort(key=lambda t: (t[0], t[1]))
    return [c for _, _, c in comps]


def distance_sq_cells(mask: np.ndarray) -> np.ndarray:
    """Exact squared cell-distance from each feasible cell to the nearest
    infeasible cell center, counting cells outside the grid as infeasible."""
    mask = np.asarray(mask, dtype=bool)
    padded = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    nearest = ndimage.distance_transform_edt(
        padded, return_distances=False, return_indices=True)
    rows = np.arange(padded.shape[0])[:, None]
    cols = np.arange(padded.shape[1])[None, :]
    d2 = (rows - nearest[0]) ** 2 + (cols - nearest[1]) ** 2
    d2 = d2[1:-1, 1:-1].astype(np.int64)
    d2[~mask] = 0
    return d2


def inscribed_circle(mask: np.ndarray, grid: BaseGridSpec) -> tuple[tuple[float, float], float]:
    """Center (cell center, m) and radius (m) of the largest inscribed circle.

    The radius at a feasible cell is the distance from its center to the
    nearest infeasible cell center; ties in the argmax break toward the
    lowest (row, column).
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("cannot inscribe a circle in an empty mask")
    d2 = distance_sq_cells(mask)
    flat = int(np.argmax(d2))  # first maximum in row-major order
    row, col = divmod(flat, mask.shape[1])
    radius = grid.cell * float(np.sqrt(d2[row, col]))
    return grid.cell_center(row, col), radius


def _build_components(mask: np.ndarray, grid: BaseGridSpec) -> tuple[Component, ...]:
    d2 = distance_sq_cells(mask)
    out = []
    for comp in connected_components(mask):
        masked = np.where(comp, d2, -1)
        flat = int(np.argmax(masked))
        row, col = divmod(flat, mask.shape[1])
        r2 = int(d2[row, col])
        out.append(Component(
            mask=comp,
            cells=int(comp.sum()),
            center=grid.cell_center(row, col),
            radius=grid.cell * float(np.sqrt(r2)),
            radius_cells_sq=r2,
        ))
    return tuple(out)


def make_record(trays, grid: BaseGridSpec, mask: np.ndarray) -> IntersectionRecord:
    trays = tuple(sorted(trays))
    return IntersectionRecord(
        trays=trays,
        order=len(trays),
        grid=grid,
        mask=np.asarray(mask, dtype=bool),
        components=_build_components(mask, grid),
    )


def enumerate_intersections(regions: list[BaseRegion],
                            lambda_max: int | None = None) -> list[IntersectionRecord]:
    """All non-empty intersections of subsets of size 1..lambda_max.

    Subsets with an empty ancestor are pruned without evaluation.  Records
    come back ordered by subset size, then lexicographically by tray ids.
    """
    if not regions:
        raise ValueError("need at least one region")
    grid = _check_grids(regions)
    ids = [r.tray_id for r in regions]
    if len(set(ids)) != len(ids):
        raise ValueError("tray ids must be unique")
    by_id = {r.tray_id: r for r in regions}
    order = tuple(sorted(ids))
    if lambda_max is None:
        lambda_max = len(order)
    lambda_max = min(lambda_max, len(order))

    records: list[IntersectionRecord] = []
    alive: dict[tuple[str, ...], np.ndarray] = {}
    for tray in order:
        mask = by_id[tray].mask
        if mask.any():
            alive[(tray,)] = mask
            records.append(make_record((tray,), grid, mask))
    for k in range(2, lambda_max + 1):
        next_alive: dict[tuple[str, ...], np.ndarray] = {}
        for subset in combinations(order, k):
            if any(tuple(s for s in subset if s != drop) not in alive
                   for drop in subset):
                continue
            mask = alive[subset[:-1]] & by_id[subset[-1]].mask
            if mask.any():
                next_alive[subset] = mask
                records.append(make_record(subset, grid, mask))
        if not next_alive:
            break
        alive = next_alive
    return records


def filter_by_uncertainty(records: list[IntersectionRecord],
                          u: UncertaintyModel) -> list[IntersectionRecord]:
    """Keep records whose best inscribed radius is at least sigma."""
    return [r for r in records if r.robust_radius >= u.sigma]
