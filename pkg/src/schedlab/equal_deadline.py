"""Phase-based scheduler for arbitrary lengths with one common deadline.

The horizon ``[0, d]`` with ``d = 2^kappa - 1`` splits into ``kappa`` phases
of geometrically shrinking lengths ``2^(kappa-i)``.  A job released in phase
``i`` is short when its length is at most a quarter phase, long otherwise.
Long jobs start immediately on a machine of their own; short jobs wait for
the next phase boundary, where they are stacked greedily onto a pool of
short machines.  Closed machines are reopened lowest id first, so the cost
that matters is the peak number concurrently open.

All times are exact rationals; phase boundaries and the quarter-phase
threshold are dyadic, so no rounding ever occurs in a placement decision.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .core import ContractViolation, Instance, Job, Schedule, _num_out, require_valid
from .oracle import volume_lower_bound


class Phase(NamedTuple):
    index: int
    start: int
    end: int
    length: int


def phase_bounds(kappa: int, i: int) -> tuple[int, int, int]:
    """Boundaries ``(a_i, b_i, l_i)`` of phase ``i`` for deadline ``2^kappa - 1``."""
    if not 1 <= i <= kappa:
        raise ContractViolation(f"phase index {i} outside [1, {kappa}]")
    length = 1 << (kappa - i)
    start = (1 << kappa) - 2 * length
    return start, start + length, length


def phase_split(kappa: int) -> list[Phase]:
    if kappa < 1:
        raise ContractViolation("need kappa >= 1")
    return [Phase(i, *phase_bounds(kappa, i)) for i in range(1, kappa + 1)]


def classify(p, length) -> str:
    """Short iff the length fits in a quarter of the phase (inclusive)."""
    return "short" if 4 * Fraction(p) <= length else "long"


@dataclass
class _Machine:
    id: int
    busy_until: Fraction
    pool: str


@dataclass
class PhaseReport:
    index: int
    start: int
    end: int
    length: int
    released_short: int = 0
    released_long: int = 0
    closed_at_start: int = 0
    opened: int = 0
    m_short: int = 0
    m_long: int = 0

    def to_jsonable(self) -> dict:
        return {
            "i": self.index, "a": self.start, "b": self.end,
            "l": self.length, "released_short": self.released_short,
            "released_long": self.released_long,
            "closed": self.closed_at_start, "opened": self.opened,
            "m_short": self.m_short, "m_long": self.m_long,
        }


@dataclass
class EqualDeadlineTranscript:
    kappa: int
    d: int
    lb: int
    schedule: Schedule
    job_class: dict[int, str]
    lengths: dict[int, Fraction]
    phases: list[PhaseReport]
    peak_concurrent: int
    machines_used: int
    half_busy_ok: bool

    @property
    def misses(self) -> list[int]:
        return self.schedule.misses

    def bound_rows(self) -> list[dict]:
        """Per-phase pool maxima against the volume-based machine budget."""
        rows = []
        for rep in self.phases:
            rows.append({
                "phase": rep.index,
                "m_short": rep.m_short,
                "short_budget": 8 * self.lb + 1,
                "m_long": rep.m_long,
                "long_budget": 8 * self.lb,
                "ok": (rep.m_short <= 8 * self.lb + 1
                       and rep.m_long <= 8 * self.lb),
            })
        return rows

    @property
    def ok(self) -> bool:
        return (not self.misses
                and self.half_busy_ok
                and self.peak_concurrent <= 16 * self.lb + 1
                and all(row["ok"] for row in self.bound_rows()))

    def to_jsonable(self) -> dict:
        return {
            "kappa": self.kappa, "d": self.d, "lb": self.lb,
            "peak_concurrent": self.peak_concurrent,
            "machines_used": self.machines_used,
            "half_busy_ok": self.half_busy_ok,
            "misses": list(self.misses),
            "ok": self.ok,
            "phases": [rep.to_jsonable() for rep in self.phases],
            "bounds": self.bound_rows(),
            "schedule": [
                {"id": j, "machine": m, "start": _num_out(s),
                 "end": _num_out(s + self.lengths[j]),
                 "class": self.job_class[j]}
                for j, m, s in self.schedule.assignments
            ],
        }


class _Runner:
    def __init__(self, kappa: int):
        self.kappa = kappa
        self.open: dict[int, _Machine] = {}
        self.closed: list[int] = []
        self.next_fresh = 0
        self.assignments: list[tuple[int, int, Fraction]] = []
        self.peak = 0
        self.half_busy_ok = True

    def acquire(self, pool: str, busy_from) -> _Machine:
        """Open a machine, reusing the lowest closed id before a fresh one."""
        if self.closed:
            mid = heapq.heappop(self.closed)
        else:
            mid = self.next_fresh
            self.next_fresh += 1
        machine = _Machine(mid, Fraction(busy_from), pool)
        self.open[mid] = machine
        self.peak = max(self.peak, len(self.open))
        return machine

    def close_idle(self, now) -> int:
        gone = [mid for mid, m in self.open.items() if m.busy_until <= now]
        for mid in gone:
            del self.open[mid]
            heapq.heappush(self.closed, mid)
        return len(gone)

    def pool_ids(self, pool: str) -> list[int]:
        return sorted(mid for mid, m in self.open.items() if m.pool == pool)

    def place_short(self, job: Job, phase: Phase, earliest) -> None:
        """Stack onto the lowest-id short machine that still finishes in time.

        ``earliest`` is the job's own floor for its start: the phase start
        for postponed work, the release time for final-phase work.  When
        nothing fits, a machine is opened; at that moment every other short
        machine must already be booked past the phase midpoint, the packing
        fact that keeps the pool near the volume bound.
        """
        p = Fraction(job.p)
        floor = Fraction(earliest)
        for mid in self.pool_ids("short"):
            machine = self.open[mid]
            start = max(machine.busy_until, floor)
            if start + p <= phase.end:
                machine.busy_until = start + p
                self.assignments.append((job.id, mid, start))
                return
        midpoint = phase.end - Fraction(phase.length, 2)
        for mid in self.pool_ids("short"):
            if self.open[mid].busy_until < midpoint:
                self.half_busy_ok = False
        if floor + p > phase.end:
            raise ContractViolation(
                f"job {job.id} cannot finish by {phase.end} even alone")
        machine = self.acquire("short", floor)
        machine.busy_until = floor + p
        self.assignments.append((job.id, machine.id, floor))


def run_equal_deadline(instance: Instance) -> EqualDeadlineTranscript:
    """Run the phase scheduler and audit its machine usage.

    Returns a transcript with the full placement, per-phase pool maxima, the
    volume lower bound on any schedule's machine count, and the peak number
    of concurrently open machines.  On a valid instance every job completes
    by the common deadline; ``misses`` stays empty.
    """
    require_valid(instance)
    if instance.model != "equal-deadline":
        raise ContractViolation("needs an equal-deadline instance")
    if not instance.jobs:
        return EqualDeadlineTranscript(
            kappa=0, d=0, lb=0, schedule=Schedule(), job_class={}, lengths={},
            phases=[], peak_concurrent=0, machines_used=0, half_busy_ok=True)
    d = instance.common_deadline
    lb = volume_lower_bound(instance.jobs, d)
    kappa = d.bit_length()
    phases = phase_split(kappa)
    runner = _Runner(kappa)
    reports = [PhaseReport(ph.index, ph.start, ph.end, ph.length) for ph in phases]
    job_class: dict[int, str] = {}
    lengths = {job.id: Fraction(job.p) for job in instance.jobs}

    jobs = list(instance.jobs)
    pos = 0
    postponed: list[Job] = []
    for ph, report in zip(phases, reports):
        if ph.index > 1:
            report.closed_at_start = runner.close_idle(ph.start)
            quarter = Fraction(ph.length, 4)
            for machine in runner.open.values():
                remaining = machine.busy_until - ph.start
                machine.pool = "long" if remaining >= quarter else "short"
            carried = sorted(postponed, key=lambda j: (-Fraction(j.p), j.id))
            postponed = []
            for job in carried:
                before = len(runner.open)
                runner.place_short(job, ph, ph.start)
                if len(runner.open) > before:
                    report.opened += 1
        report.m_short = len(runner.pool_ids("short"))
        report.m_long = len(runner.pool_ids("long"))
        while pos < len(jobs) and Fraction(jobs[pos].r) < ph.end:
            job = jobs[pos]
            pos += 1
            cls = classify(job.p, ph.length)
            job_class[job.id] = cls
            if cls == "long":
                report.released_long += 1
                machine = runner.acquire("long", job.r)
                machine.busy_until = Fraction(job.r) + Fraction(job.p)
                runner.assignments.append((job.id, machine.id, Fraction(job.r)))
                report.opened += 1
            elif ph.index < kappa:
                report.released_short += 1
                postponed.append(job)
            else:
                report.released_short += 1
                before = len(runner.open)
                runner.place_short(job, ph, job.r)
                if len(runner.open) > before:
                    report.opened += 1
            report.m_short = max(report.m_short, len(runner.pool_ids("short")))
            report.m_long = max(report.m_long, len(runner.pool_ids("long")))

    schedule = Schedule(assignments=sorted(runner.assignments,
                                           key=lambda a: (a[2], a[1])))
    schedule.misses = sorted(j for j, m, s in runner.assignments
                             if s + lengths[j] > d)
    return EqualDeadlineTranscript(
        kappa=kappa, d=d, lb=lb, schedule=schedule, job_class=job_class,
        lengths=lengths, phases=reports, peak_concurrent=runner.peak,
        machines_used=runner.next_fresh, half_busy_ok=runner.half_busy_ok)
