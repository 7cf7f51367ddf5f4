"""Monte-Carlo evaluation of a plan under base-positioning error.

Each trial perturbs every stop center by a sampled offset and checks the
perturbed position against the precomputed feasibility masks (cell lookup,
no IK or collision re-runs).  The planned sequence is compared against the
naive one-stop-per-tray sequence on stop count, path length, estimated time,
and success rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baseregion import BaseGridSpec, BaseRegion
from .regiongeo import UncertaintyModel, intersect, make_record
from .sequencer import (
    EXACT_ENUMERATION_LIMIT,
    PlanResult,
    SaSchedule,
    order_stops_exact,
    order_stops_sa,
)

DEFAULT_SPEED = 0.5      # m/s, base travel speed
DEFAULT_OVERHEAD = 20.0  # s per stop: decelerate, position, manipulate


def sample_offset(u: UncertaintyModel, rng: np.random.Generator, size=None):
    """Planar positioning-error samples for an uncertainty model.

    uniform-disk: uniform over the closed disk of radius sigma.
    gaussian-radial: isotropic normal, sigma/sqrt(2) per axis.
    boundary-worst-case: uniform on the circle of radius sigma.
    Returns shape (2,) when size is None, else (size, 2).
    """
    n = 1 if size is None else int(size)
    if u.model == "uniform-disk":
        radius = u.sigma * np.sqrt(rng.uniform(size=n))
        angle = rng.uniform(0.0, 2.0 * math.pi, size=n)
        out = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
    elif u.model == "gaussian-radial":
        out = rng.normal(0.0, u.sigma / math.sqrt(2.0), size=(n, 2))
    else:  # boundary-worst-case
        angle = rng.uniform(0.0, 2.0 * math.pi, size=n)
        out = u.sigma * np.stack([np.cos(angle), np.sin(angle)], axis=1)
    return out[0] if size is None else out


@dataclass
class SimReport:
    """Planned-vs-naive comparison under sampled positioning error."""

    trials: int
    sigma: float
    model: str
    seed: int
    speed: float
    overhead: float
    planned_stops: int
    planned_length: float
    planned_time: float
    planned_per_stop: list[float]
    planned_overall: float
    naive_stops: int
    naive_length: float
    naive_time: float
    naive_per_stop: list[float]
    naive_overall: float

    @property
    def time_ratio(self) -> float:
        return self.planned_time / self.naive_time

    def to_text(self) -> str:
        def f(v):
            return format(float(v), ".9g")

        lines = [
            "simreport v1",
            f"trials {self.trials}",
            f"sigma {f(self.sigma)}",
            f"model {self.model}",
            f"seed {self.seed}",
            f"speed {f(self.speed)}",
            f"overhead {f(self.overhead)}",
            f"planned_stops {self.planned_stops}",
            f"planned_length {f(self.planned_length)}",
            f"planned_time {f(self.planned_time)}",
            "planned_per_stop " + " ".join(f(v) for v in self.planned_per_stop),
            f"planned_overall {f(self.planned_overall)}",
            f"naive_stops {self.naive_stops}",
            f"naive_length {f(self.naive_length)}",
            f"naive_time {f(self.naive_time)}",
            "naive_per_stop " + " ".join(f(v) for v in self.naive_per_stop),
            f"naive_overall {f(self.naive_overall)}",
            f"time_ratio {f(self.time_ratio)}",
        ]
        return "\n".join(lines) + "\n"


def _success_matrix(center, mask: np.ndarray, grid: BaseGridSpec,
                    offsets: np.ndarray) -> np.ndarray:
    """Per-trial success of one stop: perturbed position in a feasible cell."""
    x = center[0] + offsets[:, 0]
    y = center[1] + offsets[:, 1]
    col = np.floor((x - grid.x0) / grid.cell).astype(np.int64)
    row = np.floor((y - grid.y0) / grid.cell).astype(np.int64)
    inside = (row >= 0) & (row < grid.height) & (col >= 0) & (col < grid.width)
    ok = np.zeros(offsets.shape[0], dtype=bool)
    idx = np.nonzero(inside)[0]
    ok[idx] = mask[row[idx], col[idx]]
    return ok


def evaluate(
    plan_result: PlanResult,
    regions: list[BaseRegion],
    u: UncertaintyModel,
    trials: int,
    speed: float = DEFAULT_SPEED,
    overhead: float = DEFAULT_OVERHEAD,
    sa_schedule: SaSchedule = SaSchedule(),
    sa_seed: int = 42,
) -> SimReport:
    """Simulate positioning error around every stop of a plan.

    A stop succeeds in a trial when its perturbed center lies in a feasible
    cell of the intersection mask it serves; the overall rate counts trials
    where every stop succeeds.  The naive sequence (one stop per tray,
    ordered on its own shortest path) is evaluated the same way.
    Deterministic under the model's seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    by_id = {r.tray_id: r for r in regions}
    grid = regions[0].grid
    rng = np.random.default_rng(u.seed)

    stop_masks = []
    for stop in plan_result.stops:
        stop_masks.append(intersect([by_id[t] for t in stop.trays]))

    planned_ok = np.ones(trials, dtype=bool)
    planned_per_stop = []
    for stop, mask in zip(plan_result.stops, stop_masks):
        offsets = sample_offset(u, rng, size=trials)
        ok = _success_matrix(stop.center, mask, grid, offsets)
        planned_per_stop.append(float(ok.mean()))
        planned_ok &= ok

    # naive baseline: one stop per tray at the region's own robust center
    tray_ids = sorted(by_id)
    naive_records = [make_record((t,), grid, by_id[t].mask) for t in tray_ids]
    centers = [r.robust_center for r in naive_records]
    if len(centers) <= EXACT_ENUMERATION_LIMIT:
        order, naive_len = order_stops_exact(
            plan_result.start, plan_result.goal, centers)
    else:
        order, naive_len = order_stops_sa(
            plan_result.start, plan_result.goal, centers,
            schedule=sa_schedule, seed=sa_seed)

    naive_ok = np.ones(trials, dtype=bool)
    naive_per_stop = []
    for pos in order:
        offsets = sample_offset(u, rng, size=trials)
        ok = _success_matrix(centers[pos], naive_records[pos].mask, grid, offsets)
        naive_per_stop.append(float(ok.mean()))
        naive_ok &= ok

    planned_len = plan_result.total_length
    return SimReport(
        trials=int(trials),
        sigma=u.sigma,
        model=u.model,
        seed=u.seed,
        speed=float(speed),
        overhead=float(overhead),
        planned_stops=len(plan_result.stops),
        planned_length=planned_len,
        planned_time=planned_len / speed + len(plan_result.stops) * overhead,
        planned_per_stop=planned_per_stop,
        planned_overall=float(planned_ok.mean()),
        naive_stops=len(centers),
        naive_length=naive_len,
        naive_time=naive_len / speed + len(centers) * overhead,
        naive_per_stop=naive_per_stop,
        naive_overall=float(naive_ok.mean()),
    )
