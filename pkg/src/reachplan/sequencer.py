"""Minimal robust stop selection and stop ordering.

Selection is a minimum-cardinality cover of the target trays by candidate
stops (branch and bound over the binary inclusion vector); among minimum
covers, exact covers (every tray covered exactly once) are preferred, then
the lexicographically smallest inclusion vector.  Ordering minimizes the
open path start -> stops -> goal, exactly for small stop counts and by
simulated annealing otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .baseregion import BaseRegion
from .regiongeo import (
    UncertaintyModel,
    enumerate_intersections,
    filter_by_uncertainty,
)

EXACT_ENUMERATION_LIMIT = 9


class InfeasibleCoverError(Exception):
    def __init__(self, trays):
        self.trays = tuple(trays)
        super().__init__(
            "no candidate covers tray(s): " + ", ".join(self.trays))


class InfeasiblePlanError(Exception):
    def __init__(self, trays, sigma):
        self.trays = tuple(trays)
        self.sigma = float(sigma)
        super().__init__(
            f"base region(s) too small for sigma={sigma:g}: "
            + ", ".join(self.trays))


class ExactEnumerationError(ValueError):
    pass


@dataclass(frozen=True)
class Candidate:
    """A candidate stop: the trays it serves and its robust position."""

    trays: tuple[str, ...]
    position: tuple[float, float]
    radius: float = 0.0

    def __post_init__(self):
        if len(self.trays) == 0:
            raise ValueError("candidate must cover at least one tray")
        object.__setattr__(self, "trays", tuple(self.trays))
        object.__setattr__(self, "position",
                           (float(self.position[0]), float(self.position[1])))


@dataclass
class CoverInstance:
    """Trays to cover and the candidate stops available for covering them."""

    trays: tuple[str, ...]
    candidates: list[Candidate]

    def __post_init__(self):
        self.trays = tuple(self.trays)
        known = set(self.trays)
        for cand in self.candidates:
            for tray in cand.trays:
                if tray not in known:
                    raise ValueError(f"candidate covers unknown tray {tray!r}")

    def coverage_matrix(self) -> np.ndarray:
        """a[s][i] = 1 iff candidate i covers tray s."""
        a = np.zeros((len(self.trays), len(self.candidates)), dtype=int)
        for i, cand in enumerate(self.candidates):
            for tray in cand.trays:
                a[self.trays.index(tray), i] = 1
        return a


def _solution_key(selected: tuple[int, ...], cover_counts, ncand: int):
    exact = all(c == 1 for c in cover_counts)
    inclusion = tuple(1 if i in selected else 0 for i in range(ncand))
    return (len(selected), 0 if exact else 1, inclusion)


def min_cover(instance: CoverInstance) -> list[int]:
    """Minimum-cardinality selection of candidates covering every tray.

    Deterministic: among minimum covers, exact covers win, then the
    lexicographically smallest binary inclusion vector.  Raises
    InfeasibleCoverError naming any tray no candidate covers.
    """
    ntrays = len(instance.trays)
    ncand = len(instance.candidates)
    tray_bit = {t: 1 << s for s, t in enumerate(instance.trays)}
    cand_bits = [sum(tray_bit[t] for t in set(c.trays))
                 for c in instance.candidates]
    full = (1 << ntrays) - 1

    covered_union = 0
    for bits in cand_bits:
        covered_union |= bits
    if covered_union != full:
        missing = [t for s, t in enumerate(instance.trays)
                   if not covered_union & (1 << s)]
        raise InfeasibleCoverError(missing)

    by_tray = [[i for i in range(ncand) if cand_bits[i] & (1 << s)]
               for s in range(ntrays)]
    max_cover = max(bin(b).count("1") for b in cand_bits)

    best_key = None
    best_sel: tuple[int, ...] = ()

    def search(selected: list[int], covered: int, counts: list[int]):
        nonlocal best_key, best_sel
        if covered == full:
            key = _solution_key(tuple(selected), counts, ncand)
            if best_key is None or key < best_key:
                best_key = key
                best_sel = tuple(selected)
            return
        uncovered = full & ~covered
        lower = math.ceil(bin(uncovered).count("1") / max_cover)
        if best_key is not None and len(selected) + lower > best_key[0]:
            return
        tray = (uncovered & -uncovered).bit_length() - 1  # lowest uncovered
        for i in by_tray[tray]:
            if i in selected:
                continue
            for tbit in range(ntrays):
                if cand_bits[i] & (1 << tbit):
                    counts[tbit] += 1
            selected.append(i)
            search(selected, covered | cand_bits[i], counts)
            selected.pop()
            for tbit in range(ntrays):
                if cand_bits[i] & (1 << tbit):
                    counts[tbit] -= 1

    search([], 0, [0] * ntrays)
    return sorted(best_sel)


def path_length(start, goal, points) -> float:
    nodes = [tuple(start), *[tuple(p) for p in points], tuple(goal)]
    total = 0.0
    for (x0, y0), (x1, y1) in zip(nodes[:-1], nodes[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total


def order_stops_exact(start, goal, stops) -> tuple[list[int], float]:
    """Optimal visiting order of stops on the open path start -> goal.

    Enumerates all permutations (stop count <= 9); ties break toward the
    lexicographically first permutation.  Returns (order, length).
    """
    m = len(stops)
    if m > EXACT_ENUMERATION_LIMIT:
        raise ExactEnumerationError(
            f"{m} stops exceed the exact enumeration limit "
            f"({EXACT_ENUMERATION_LIMIT}); use order_stops_sa")
    if m == 0:
        return [], path_length(start, goal, [])
    best_order = None
    best_len = math.inf
    for perm in permutations(range(m)):
        length = path_length(start, goal, [stops[i] for i in perm])
        if length < best_len:
            best_len = length
            best_order = list(perm)
    return best_order, best_len


@dataclass(frozen=True)
class SaSchedule:
    """Simulated-annealing schedule; t0 None means the mean segment length."""

    t0: float | None = None
    alpha: float = 0.995
    iterations: int = 20000
    two_opt_weight: float = 0.8  # 2-opt : relocate = 4 : 1


def _greedy_order(start, goal, stops) -> list[int]:
    remaining = list(range(len(stops)))
    order = []
    cx, cy = start
    while remaining:
        best = min(remaining,
                   key=lambda i: (math.hypot(stops[i][0] - cx, stops[i][1] - cy), i))
        order.append(best)
        remaining.remove(best)
        cx, cy = stops[best]
    return order


def order_stops_sa(start, goal, stops, schedule: SaSchedule = SaSchedule(),
                   seed: int = 42) -> tuple[list[int], float]:
    """Simulated annealing over stop permutations (2-opt and relocation moves).

    Starts from the greedy nearest-neighbor order and never returns anything
    worse than it; deterministic under a fixed seed.
    """
    m = len(stops)
    if m <= 1:
        order = list(range(m))
        return order, path_length(start, goal, [stops[i] for i in order])
    rng = np.random.default_rng(seed)
    order = _greedy_order(start, goal, stops)

    def tour_length(perm) -> float:
        return path_length(start, goal, [stops[i] for i in perm])

    current = order[:]
    current_len = tour_length(current)
    best = current[:]
    best_len = current_len
    segments = m + 1
    t = schedule.t0 if schedule.t0 is not None else max(current_len / segments, 1e-12)

    for _ in range(schedule.iterations):
        if rng.random() < schedule.two_opt_weight:
            i, j = sorted(rng.choice(m, size=2, replace=False))
            cand = current[:i] + current[i:j + 1][::-1] + current[j + 1:]
        else:
            i = int(rng.integers(m))
            j = int(rng.integers(m - 1))
            cand = current[:i] + current[i + 1:]
            cand.insert(j, current[i])
        cand_len = tour_length(cand)
        delta = cand_len - current_len
        if delta <= 0.0 or rng.random() < math.exp(-delta / max(t, 1e-300)):
            current = cand
            current_len = cand_len
            if current_len < best_len:
                best_len = current_len
                best = current[:]
        t *= schedule.alpha
    return best, best_len


def order_stops_sa_chains(start, goal, stops,
                          schedule: SaSchedule = SaSchedule(),
                          seeds=(42, 43, 44, 45)) -> tuple[list[int], float]:
    """Best result over independent annealing chains with a fixed seed list.

    Chains are independent, so they may run in parallel; taking the best in
    seed order keeps the outcome deterministic either way.
    """
    best_order: list[int] = []
    best_len = math.inf
    for seed in seeds:
        order, length = order_stops_sa(start, goal, stops, schedule=schedule,
                                       seed=seed)
        if length < best_len - 1e-15:
            best_len = length
            best_order = order
    return best_order, best_len


@dataclass(frozen=True)
class PlanStop:
    """One planned stop: served trays, robust center, inscribed radius."""

    trays: tuple[str, ...]
    center: tuple[float, float]
    radius: float


@dataclass
class PlanResult:
    """Selected stops in visit order with the tray assignment and length."""

    stops: list[PlanStop]               # visit order: start -> stops -> goal
    assignment: dict[str, int]          # tray id -> index into stops
    total_length: float
    start: tuple[float, float]
    goal: tuple[float, float]
    sigma: float
    selected_indices: list[int]         # indices into the candidate list

    @property
    def stop_count(self) -> int:
        return len(self.stops)


@dataclass(frozen=True)
class PlanOptions:
    lambda_max: int | None = None
    sa_seed: int = 42
    sa_schedule: SaSchedule = field(default_factory=SaSchedule)
    exact_limit: int = EXACT_ENUMERATION_LIMIT


def plan(
    regions: list[BaseRegion],
    uncertainty: UncertaintyModel,
    start,
    goal,
    options: PlanOptions = PlanOptions(),
) -> PlanResult:
    """Full selection pipeline over computed base regions.

    Enumerates intersections, filters them by the uncertainty level, covers
    all trays with a minimum number of robust stops, and orders the stops on
    the shortest open path.  Raises InfeasiblePlanError naming every tray
    whose own base region fails the filter (no stop can serve it).
    selected_indices refer to the filtered candidate list (the order
    filter_by_uncertainty(enumerate_intersections(regions)) yields).
    """
    records = enumerate_intersections(regions, options.lambda_max)
    kept = filter_by_uncertainty(records, uncertainty)

    trays = tuple(sorted(r.tray_id for r in regions))
    covered = set()
    for record in kept:
        covered.update(record.trays)
    missing = [t for t in trays if t not in covered]
    if missing:
        raise InfeasiblePlanError(missing, uncertainty.sigma)

    instance = CoverInstance(
        trays=trays,
        candidates=[Candidate(r.trays, r.robust_center, r.robust_radius)
                    for r in kept],
    )
    selected = min_cover(instance)

    centers = [kept[i].robust_center for i in selected]
    if len(centers) <= options.exact_limit:
        order, total = order_stops_exact(start, goal, centers)
    else:
        order, total = order_stops_sa(start, goal, centers,
                                      schedule=options.sa_schedule,
                                      seed=options.sa_seed)

    stops = []
    for pos in order:
        record = kept[selected[pos]]
        stops.append(PlanStop(trays=record.trays, center=record.robust_center,
                              radius=record.robust_radius))
    assignment: dict[str, int] = {}
    for tray in trays:
        for sel_pos, idx in enumerate(selected):
            if tray in kept[idx].trays:
                assignment[tray] = order.index(sel_pos)
                break
    return PlanResult(
        stops=stops,
        assignment=assignment,
        total_length=total,
        start=(float(start[0]), float(start[1])),
        goal=(float(goal[0]), float(goal[1])),
        sigma=uncertainty.sigma,
        selected_indices=[int(i) for i in selected],
    )
