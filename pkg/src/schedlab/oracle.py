"""Offline optima for unit-job scheduling, by several independent routes.

The primary quantity is ``off_unit(jobs)``: the fewest machines, constant
over time, on which every unit job fits inside its window ``[r, d)``.  Three
routes compute or cross-check it:

* earliest-deadline-first simulation (``edf_simulate`` + binary search),
* bipartite transportation feasibility on compressed slots (``flow_feasible``),
* exhaustive assignment search for tiny instances (``brute_force_feasible``).

``IncrementalOff`` maintains the same value over a growing job prefix in
amortized vectorized time; online algorithms use it to track the optimum of
everything released so far.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .core import ContractViolation, Instance, Job, MachineProfile, Schedule


@dataclass
class EdfTrace:
    """Step-by-step record of one EDF run.

    ``chosen[t]`` lists job ids scheduled in slot ``t``; ``miss_events``
    records ``(job_id, step)`` pairs at the step the deadline expired.
    """

    chosen: list[list[int]] = field(default_factory=list)
    miss_events: list[tuple[int, int]] = field(default_factory=list)

    @property
    def first_miss(self) -> tuple[int, int] | None:
        return self.miss_events[0] if self.miss_events else None

    def scheduled_before(self, t: int) -> set[int]:
        """The set S(t) of jobs scheduled in steps 0..t-1."""
        out: set[int] = set()
        for step in range(min(t, len(self.chosen))):
            out.update(self.chosen[step])
        return out


def edf_simulate(jobs: Sequence[Job], profile: MachineProfile) -> tuple[EdfTrace, Schedule]:
    """Run earliest-deadline-first on unit jobs under a machine profile.

    At each step the pending jobs with the smallest deadlines (ties by id)
    occupy machines ``0..m(t)-1``.  A job whose deadline passes while it is
    still pending is recorded as missed and the run continues.
    """
    for j in jobs:
        if j.p != 1:
            raise ContractViolation(f"edf_simulate needs unit jobs, job {j.id} has p={j.p}")
    trace = EdfTrace()
    schedule = Schedule()
    if not jobs:
        return trace, schedule
    releases: dict[int, list[tuple[int, int]]] = {}
    for j in jobs:
        releases.setdefault(int(j.r), []).append((int(j.d), j.id))
    horizon = int(max(j.d for j in jobs))
    heap: list[tuple[int, int]] = []
    for t in range(horizon):
        for item in releases.get(t, ()):
            heapq.heappush(heap, item)
        # expired jobs have the smallest deadlines, so they surface first
        while heap and heap[0][0] <= t:
            d, job_id = heapq.heappop(heap)
            trace.miss_events.append((job_id, t))
            schedule.misses.append(job_id)
        quota = min(profile.at(t), len(heap))
        slot: list[int] = []
        for machine in range(quota):
            d, job_id = heapq.heappop(heap)
            schedule.assignments.append((job_id, machine, t))
            slot.append(job_id)
        trace.chosen.append(slot)
    while heap:
        d, job_id = heapq.heappop(heap)
        trace.miss_events.append((job_id, d))
        schedule.misses.append(job_id)
    return trace, schedule


def flow_feasible(jobs: Sequence[Job], profile: MachineProfile, d: int) -> bool:
    """Can every job with deadline at most ``d`` be placed under ``profile``?

    Decided as a transportation problem: jobs on one side, maximal runs of
    slots between window endpoints on the other, so the network size depends
    on the number of distinct endpoints rather than on the horizon.
    """
    subset = [j for j in jobs if j.d <= d]
    for j in subset:
        if j.p != 1:
            raise ContractViolation(f"flow_feasible needs unit jobs, job {j.id} has p={j.p}")
    if not subset:
        return True
    points = sorted({int(j.r) for j in subset} | {int(j.d) for j in subset})
    segments = [(lo, hi) for lo, hi in zip(points, points[1:])]
    caps = [profile.capacity_between(lo, hi) for lo, hi in segments]

    n_jobs = len(subset)
    n_seg = len(segments)
    source = 0
    sink = 1 + n_jobs + n_seg
    rows, cols, data = [], [], []
    for ji, j in enumerate(subset):
        rows.append(source)
        cols.append(1 + ji)
        data.append(1)
        for si, (lo, hi) in enumerate(segments):
            if j.r <= lo and hi <= j.d:
                rows.append(1 + ji)
                cols.append(1 + n_jobs + si)
                data.append(1)
    for si, cap in enumerate(caps):
        if cap > 0:
            rows.append(1 + n_jobs + si)
            cols.append(sink)
            data.append(min(cap, 2**31 - 1))
    graph = csr_matrix((data, (rows, cols)),
                       shape=(sink + 1, sink + 1), dtype=np.int32)
    result = maximum_flow(graph, source, sink)
    return result.flow_value == n_jobs


def _edf_feasible(jobs: Sequence[Job], m: int) -> bool:
    if not jobs:
        return True
    horizon = int(max(j.d for j in jobs))
    _, schedule = edf_simulate(jobs, MachineProfile.constant(m, horizon))
    return not schedule.misses


def off_unit(jobs: Sequence[Job]) -> int:
    """Fewest machines at which EDF schedules every unit job in its window.

    Binary search over ``[1, len(jobs)]``; feasibility at a given count is
    monotone, so the search is sound.  Empty input costs zero machines.
    """
    jobs = list(jobs)
    if not jobs:
        return 0
    for j in jobs:
        if j.r + 1 > j.d:
            raise ContractViolation(f"job {j.id} window [{j.r}, {j.d}) cannot hold a unit job")
    lo, hi = 1, len(jobs)
    while lo < hi:
        mid = (lo + hi) // 2
        if _edf_feasible(jobs, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def off_prefix_series(jobs: Sequence[Job]) -> dict[int, int]:
    """``off_unit`` of everything released by time t, for each integer t.

    Keys run from 0 to the maximum release.  The value is nondecreasing in
    t, so each step warm-starts a binary search at the previous optimum.
    """
    jobs = sorted(jobs, key=lambda j: (j.r, j.id))
    if not jobs:
        return {}
    series: dict[int, int] = {}
    prefix: list[Job] = []
    idx = 0
    prev = 0
    max_release = int(max(j.r for j in jobs))
    for t in range(max_release + 1):
        grew = False
        while idx < len(jobs) and jobs[idx].r <= t:
            prefix.append(jobs[idx])
            idx += 1
            grew = True
        if grew:
            if prev >= 1 and _edf_feasible(prefix, prev):
                pass  # optimum unchanged: it cannot shrink as jobs arrive
            else:
                lo, hi = max(prev, 1), len(prefix)
                while lo < hi:
                    mid = (lo + hi) // 2
                    if _edf_feasible(prefix, mid):
                        hi = mid
                    else:
                        lo = mid + 1
                prev = lo
        series[t] = prev
    return series


class IncrementalOff:
    """Exact optimum machine count over a growing released-job set.

    Feasibility of ``m`` constant machines is equivalent to every window
    ``[s, e)`` holding at most ``m * (e - s)`` of the jobs confined to it,
    so the optimum is the maximum over windows of the ceiling demand ratio.
    The windows that matter start at release values and end at deadline
    values; both index sets are registered up front and the per-step
    recomputation is a few vectorized passes over that grid.
    """

    def __init__(self, release_values: Iterable[int], deadline_values: Iterable[int]):
        self._rv = sorted(set(int(v) for v in release_values))
        self._dv = sorted(set(int(v) for v in deadline_values))
        self._ri = {v: i for i, v in enumerate(self._rv)}
        self._di = {v: i for i, v in enumerate(self._dv)}
        self._hist = np.zeros((len(self._rv), len(self._dv)), dtype=np.int64)
        self._rv_arr = np.array(self._rv, dtype=np.int64).reshape(-1, 1)
        self._dv_arr = np.array(self._dv, dtype=np.int64).reshape(1, -1)
        self._rows = 0
        self._value = 0

    @classmethod
    def for_jobs(cls, jobs: Sequence[Job]) -> "IncrementalOff":
        return cls((int(j.r) for j in jobs), (int(j.d) for j in jobs))

    @property
    def value(self) -> int:
        return self._value

    def add(self, released: Sequence[Job], t: int) -> int:
        """Register jobs released at step ``t`` and return the new optimum."""
        for j in released:
            if int(j.r) != t:
                raise ContractViolation(f"job {j.id} released at {j.r}, not {t}")
            self._hist[self._ri[int(j.r)], self._di[int(j.d)]] += 1
        while self._rows < len(self._rv) and self._rv[self._rows] <= t:
            self._rows += 1
        if released:
            self._value = self._recompute()
        return self._value

    def _recompute(self) -> int:
        rows = self._rows
        if rows == 0:
            return 0
        h = self._hist[:rows]
        # confined[s, e] = jobs with release >= rv[s] and deadline <= dv[e]
        confined = np.cumsum(np.cumsum(h[::-1], axis=0)[::-1], axis=1)
        length = self._dv_arr - self._rv_arr[:rows]
        demand = np.where(length > 0, -(-confined // np.maximum(length, 1)), 0)
        return int(demand.max(initial=0))


def fast_off_series(jobs: Sequence[Job]) -> dict[int, int]:
    """Same values as :func:`off_prefix_series` via :class:`IncrementalOff`."""
    jobs = sorted(jobs, key=lambda j: (j.r, j.id))
    if not jobs:
        return {}
    engine = IncrementalOff.for_jobs(jobs)
    series: dict[int, int] = {}
    idx = 0
    max_release = int(max(j.r for j in jobs))
    for t in range(max_release + 1):
        batch = []
        while idx < len(jobs) and int(jobs[idx].r) == t:
            batch.append(jobs[idx])
            idx += 1
        series[t] = engine.add(batch, t)
    return series


def volume_lower_bound(jobs: Sequence[Job], d) -> int:
    """Workload bound on machines for a common deadline ``d``.

    Every job released at or after ``r`` must run inside ``[r, d)``, so any
    schedule needs at least ``ceil(volume / (d - r))`` machines; take the
    worst release point.  Valid for arbitrary (rational) job lengths.
    """
    if not jobs:
        return 0
    best = 1
    for r in sorted({j.r for j in jobs} | {0}):
        vol = sum(j.p for j in jobs if j.r >= r)
        if vol == 0:
            continue
        q = Fraction(vol) / (Fraction(d) - Fraction(r))
        need = -(-q.numerator // q.denominator)
        best = max(best, need)
    return best


def offline_throughput_opt(instance: Instance) -> tuple[Fraction, Schedule]:
    """Maximum total weight schedulable on ``k`` machines, with a witness.

    Solved as an assignment problem: each job either takes one of the
    ``k * horizon`` machine-slots inside its window or falls back to a
    private zero-weight column, so skipping a job is always allowed.
    """
    if instance.model != "throughput":
        raise ContractViolation(f"expected a throughput instance, got {instance.model}")
    jobs = instance.jobs
    k = instance.k or 1
    if not jobs:
        return Fraction(0), Schedule()
    max_d = int(max(j.d for j in jobs))
    steps = [t for t in range(max_d)
             if any(j.r <= t and t + 1 <= j.d for j in jobs)]
    positions = [(t, i) for t in steps for i in range(k)]
    n, m = len(jobs), len(positions)
    weight = np.full((n, m + n), -1.0)
    for ji, j in enumerate(jobs):
        weight[ji, m + ji] = 0.0
        for pi, (t, _) in enumerate(positions):
            if j.r <= t and t + 1 <= j.d:
                weight[ji, pi] = float(j.w)
    rows, cols = linear_sum_assignment(weight, maximize=True)
    total = Fraction(0)
    schedule = Schedule()
    placed: set[int] = set()
    for ji, ci in zip(rows, cols):
        if ci < m:
            t, machine = positions[ci]
            job = jobs[ji]
            schedule.assignments.append((job.id, machine, t))
            total += Fraction(job.w)
            placed.add(job.id)
    schedule.assignments.sort(key=lambda a: (a[2], a[1]))
    schedule.misses = sorted(j.id for j in jobs if j.id not in placed)
    return total, schedule


def brute_force_feasible(jobs: Sequence[Job], profile: MachineProfile) -> bool:
    """Exhaustive feasibility for tiny unit instances (<= 8 jobs, <= 6 slots)."""
    jobs = list(jobs)
    if not jobs:
        return True
    horizon = int(max(j.d for j in jobs))
    if len(jobs) > 8 or horizon > 6:
        raise ContractViolation(
            f"brute force capped at 8 jobs / 6 slots, got {len(jobs)} jobs, {horizon} slots")
    caps = [profile.at(t) for t in range(horizon)]
    # search jobs in deadline order so dead ends surface early
    order = sorted(jobs, key=lambda j: (j.d, j.r, j.id))
    seen: set[tuple[int, tuple[int, ...]]] = set()

    def place(idx: int, caps: tuple[int, ...]) -> bool:
        if idx == len(order):
            return True
        key = (idx, caps)
        if key in seen:
            return False
        job = order[idx]
        for t in range(int(job.r), int(job.d)):
            if caps[t] > 0:
                nxt = list(caps)
                nxt[t] -= 1
                if place(idx + 1, tuple(nxt)):
                    return True
        seen.add(key)
        return False

    return place(0, tuple(caps))
