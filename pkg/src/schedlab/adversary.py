"""Adversarial release stream that forces machine-hungry online behavior.

With parameters ``(n, N)`` the adversary releases ``floor(N / (n - t))``
unit jobs at each step ``t``, all due at ``n``, and stops releasing once the
online machine count reaches ``rho`` times the offline optimum.  Driving any
online player through :func:`play_game` records the full exchange;
:func:`aggregate_game` plays the same game purely with counters so that
horizons in the millions stay cheap.

The aggregate optimum uses the fact that for a common deadline the offline
cost is ``max over s of ceil(released[s..t] / (n - s))``; viewed as a
function of cumulative releases each ``s`` is a line, so a convex-hull
pointer over lines added in slope order yields every ``OFF(t)`` exactly in
amortized constant time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

import numpy as np

from .core import ContractViolation, Job, Schedule
from .online_min import EULER, OnlineState, ceil_times, resolve_alpha
from .oracle import IncrementalOff


class OnlinePlayer(Protocol):
    def step(self, t: int, released: Sequence[Job]) -> tuple[int, list[int]]: ...


def alpha_edf_player(alpha, n: int) -> OnlineState:
    """A scaled-EDF player sized for an ``(n, N)`` adversary game."""
    return OnlineState(alpha, range(n), [n])


def resolve_rho(rho) -> Fraction | None:
    """Stop-rule threshold; ``None``/"none"/"inf" disables stopping."""
    if rho is None:
        return None
    if isinstance(rho, str) and rho.strip().lower() in ("none", "inf", "off"):
        return None
    return resolve_alpha(rho)


@dataclass
class AdversaryState:
    """Release source with the ratio-triggered stop rule."""

    n: int
    N: int
    rho: Fraction | None = None
    stopped_at: int | None = None
    next_id: int = 0

    def release(self, t: int) -> list[Job]:
        if self.stopped_at is not None or t >= self.n:
            return []
        count = self.N // (self.n - t)
        jobs = [Job(self.next_id + i, t, self.n) for i in range(count)]
        self.next_id += count
        return jobs

    def observe(self, t: int, online: int, off: int) -> None:
        """Stop once the online/offline ratio reaches ``rho`` (well-defined only for off > 0)."""
        if self.rho is None or self.stopped_at is not None or off == 0:
            return
        if online * self.rho.denominator >= self.rho.numerator * off:
            self.stopped_at = t


def adversary_step(state: AdversaryState, t: int,
                   observed_online: int | None, observed_off: int | None) -> list[Job]:
    """One protocol round: record last step's counts, then release for ``t``."""
    if t >= state.n:
        raise ContractViolation(f"step {t} past horizon {state.n}")
    if observed_online is not None and observed_off is not None:
        state.observe(t - 1, observed_online, observed_off)
    return state.release(t)


@dataclass
class GameTranscript:
    n: int
    N: int
    rho: Fraction | None
    steps: list[dict] = field(default_factory=list)
    stopped_at: int | None = None
    released_total: int = 0
    scheduled_total: int = 0
    cost: int = 0
    off_final: int = 0

    @property
    def missed(self) -> bool:
        return self.scheduled_total < self.released_total

    @property
    def ratio(self) -> float:
        return self.cost / self.off_final if self.off_final else 0.0

    def to_jsonable(self) -> dict:
        return {
            "n": self.n, "N": self.N,
            "rho": None if self.rho is None else (
                "e" if self.rho == EULER else str(self.rho)),
            "outcome": ("stopped" if self.stopped_at is not None else "ran-to-end"),
            "stopped_at": self.stopped_at,
            "released": self.released_total,
            "scheduled": self.scheduled_total,
            "missed": self.missed,
            "cost": self.cost,
            "off_final": self.off_final,
            "ratio": self.ratio,
            "steps": self.steps,
        }


def play_game(player: OnlinePlayer, n: int, N: int | None = None,
              rho="e") -> GameTranscript:
    """Run the full adversary protocol against an online player.

    Per step: the adversary releases, the player reports a machine count and
    schedules jobs, the adversary observes the count.  The offline optimum is
    tracked by an independent oracle; the player's moves are audited (no
    overbooking, no unknown or repeated jobs) and violations raise.
    """
    if n < 1:
        raise ContractViolation("need n >= 1")
    if N is None:
        N = n * n
    state = AdversaryState(n=n, N=N, rho=resolve_rho(rho))
    off_engine = IncrementalOff(range(n), [n])
    transcript = GameTranscript(n=n, N=N, rho=state.rho)
    outstanding: set[int] = set()
    for t in range(n):
        released = state.release(t)
        transcript.released_total += len(released)
        off = off_engine.add(released, t)
        online, chosen = player.step(t, released)
        if online < 0:
            raise ContractViolation(f"negative machine count at step {t}")
        if len(chosen) > online:
            raise ContractViolation(
                f"step {t}: scheduled {len(chosen)} jobs on {online} machines")
        outstanding.update(j.id for j in released)
        for job_id in chosen:
            if job_id not in outstanding:
                raise ContractViolation(
                    f"step {t}: job {job_id} not pending (unknown, early, or repeated)")
            outstanding.remove(job_id)
        transcript.scheduled_total += len(chosen)
        state.observe(t, online, off)
        transcript.steps.append({
            "t": t, "released": len(released), "off": off, "online": online})
        transcript.cost = max(transcript.cost, online)
    transcript.stopped_at = state.stopped_at
    transcript.off_final = off_engine.value
    return transcript


class _SuffixDemandHull:
    """Exact max of ``(A_t - A_{s-1}) / (n - s)`` over s, amortized O(1)/step.

    Each candidate ``s`` is the line ``y = (x - A_{s-1}) / (n - s)`` in the
    cumulative release count ``x``.  Lines arrive in increasing slope order
    and queries come at nondecreasing ``x``, the textbook monotone case.
    All comparisons cross-multiply Python ints, so results are exact.
    """

    def __init__(self, n: int):
        self.n = n
        self.lines: list[tuple[int, int]] = []  # (s, A_{s-1})
        self.ptr = 0

    @staticmethod
    def _le(p1: int, q1: int, p2: int, q2: int) -> bool:
        if q1 < 0:
            p1, q1 = -p1, -q1
        if q2 < 0:
            p2, q2 = -p2, -q2
        return p1 * q2 <= p2 * q1

    def _ix(self, a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
        (sa, Aa), (sb, Ab) = a, b
        n = self.n
        return Aa * (n - sb) - Ab * (n - sa), sa - sb

    def add(self, s: int, A_prev: int) -> None:
        new = (s, A_prev)
        lines = self.lines
        while len(lines) >= 2:
            p1, q1 = self._ix(lines[-2], new)
            p2, q2 = self._ix(lines[-2], lines[-1])
            if self._le(p1, q1, p2, q2):
                lines.pop()
            else:
                break
        lines.append(new)
        self.ptr = min(self.ptr, len(lines) - 1)

    def query_ceil(self, x: int) -> int:
        """``ceil`` of the hull maximum at cumulative count ``x``."""
        lines = self.lines
        n = self.n

        def better(i: int, j: int) -> bool:
            si, Ai = lines[i]
            sj, Aj = lines[j]
            return (x - Ai) * (n - sj) >= (x - Aj) * (n - si)

        while self.ptr + 1 < len(lines) and better(self.ptr + 1, self.ptr):
            self.ptr += 1
        s, A_prev = lines[self.ptr]
        num = x - A_prev
        den = n - s
        return -(-num // den)


@dataclass
class AggregateGame:
    """Counter-level play of the adversary against scaled EDF."""

    n: int
    N: int
    alpha: Fraction
    rho: Fraction | None
    a: np.ndarray
    off: np.ndarray
    online: np.ndarray
    backlog: np.ndarray
    stopped_at: int | None

    @property
    def released_total(self) -> int:
        return int(self.a.sum())

    @property
    def processed_total(self) -> int:
        return self.released_total - int(self.backlog[-1])

    @property
    def missed(self) -> bool:
        return bool(self.backlog[-1] > 0)

    @property
    def cost(self) -> int:
        return int(self.online.max(initial=0))

    @property
    def off_final(self) -> int:
        return int(self.off[-1]) if len(self.off) else 0

    @property
    def ratio(self) -> float:
        return self.cost / self.off_final if self.off_final else 0.0

    def summary(self) -> dict:
        return {
            "n": self.n, "N": self.N,
            "alpha": "e" if self.alpha == EULER else str(self.alpha),
            "rho": None if self.rho is None else (
                "e" if self.rho == EULER else str(self.rho)),
            "stopped_at": self.stopped_at,
            "released": self.released_total,
            "processed": self.processed_total,
            "backlog_final": int(self.backlog[-1]) if len(self.backlog) else 0,
            "missed": self.missed,
            "cost": self.cost,
            "off_final": self.off_final,
            "ratio": self.ratio,
        }


def aggregate_game(alpha, n: int, N: int | None = None, rho=None) -> AggregateGame:
    """Play the adversary against scaled EDF using counters only.

    All jobs share deadline ``n`` and EDF is release-order there, so one
    backlog integer captures the whole pending set.  A deadline is missed
    exactly when backlog remains after step ``n - 1``.

    ``rho=None`` (default) disables the stop rule: note that the ceiling in
    ``m(t) = ceil(alpha * OFF(t))`` makes the online/offline ratio exceed
    even ``rho > alpha`` while ``OFF`` is small, so a meaningful full-horizon
    run must not stop.
    """
    if n < 1:
        raise ContractViolation("need n >= 1")
    if N is None:
        N = n * n
    alpha = resolve_alpha(alpha)
    rho_f = resolve_rho(rho)
    guard = alpha == EULER
    a_arr = np.zeros(n, dtype=np.int64)
    off_arr = np.zeros(n, dtype=np.int64)
    online_arr = np.zeros(n, dtype=np.int64)
    backlog_arr = np.zeros(n, dtype=np.int64)
    hull = _SuffixDemandHull(n)
    A = 0
    backlog = 0
    stopped_at: int | None = None
    for t in range(n):
        if stopped_at is None:
            a = N // (n - t)
            hull.add(t, A)
            A += a
        else:
            a = 0
        off = hull.query_ceil(A) if A else 0
        online = ceil_times(alpha, off, knife_guard=guard)
        backlog = max(0, backlog + a - online)
        if (stopped_at is None and rho_f is not None and off > 0
                and online * rho_f.denominator >= rho_f.numerator * off):
            stopped_at = t
        a_arr[t] = a
        off_arr[t] = off
        online_arr[t] = online
        backlog_arr[t] = backlog
    return AggregateGame(n=n, N=N, alpha=alpha, rho=rho_f, a=a_arr,
                         off=off_arr, online=online_arr, backlog=backlog_arr,
                         stopped_at=stopped_at)


@dataclass
class CountingBounds:
    """Closed-form release/processing totals for the (n, N) stream."""

    n: int
    N: int
    alpha: float
    released_lower: float
    processed_upper: float

    @property
    def deficit(self) -> float:
        return self.released_lower - self.processed_upper


def counting_bounds(n: int, N: int | None = None, alpha=2.5) -> CountingBounds:
    """Lower-bound releases and upper-bound sub-``e`` processing.

    Releases total at least ``N ln n - (n - 1)``.  A player holding its
    machine count below ``alpha * OFF(t)`` processes at most
    ``(alpha/e) N (ln n + 1) + alpha n`` jobs by the deadline: the optimum
    never exceeds ``N / (e (n - t)) + 1`` machines before the final step, and
    the harmonic sum is at most ``ln n + 1``.  Once the first quantity
    exceeds the second, some release must miss.
    """
    if N is None:
        N = n * n
    a = float(resolve_alpha(alpha))
    released_lower = N * math.log(n) - (n - 1)
    processed_upper = (a / math.e) * N * (math.log(n) + 1.0) + a * n
    return CountingBounds(n=n, N=N, alpha=a,
                          released_lower=released_lower,
                          processed_upper=processed_upper)


def crossover_n(alpha=2.5) -> int | None:
    """Smallest n at which (with N = n*n) the counting bounds force a miss."""
    a = float(resolve_alpha(alpha))
    if a >= math.e:
        return None

    def deficit(n: int) -> float:
        return counting_bounds(n, n * n, a).deficit

    hi = 4
    while deficit(hi) <= 0:
        hi *= 2
        if hi > 10**9:
            return None
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if deficit(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def actual_released(n: int, N: int | None = None) -> int:
    """Exact total the full-horizon adversary stream releases."""
    if N is None:
        N = n * n
    return sum(N // (n - t) for t in range(n))


@dataclass
class WitnessResult:
    m: int
    schedule: Schedule
    feasible: bool
    jobs_total: int


def offline_witness(n: int, N: int, tstar: int) -> WitnessResult:
    """Schedule everything released by ``tstar`` on ``ceil(N / (e (n - tstar)))`` machines.

    Greedy in release order: at each step run up to ``m`` pending jobs.  For a
    common deadline this is optimal, so ``feasible`` reports whether the
    scaled machine count really suffices at these parameters.
    """
    if not (0 <= tstar < n):
        raise ContractViolation(f"tstar must lie in [0, {n - 1}]")
    num = N * EULER.denominator
    den = EULER.numerator * (n - tstar)
    m = -(-num // den)
    schedule = Schedule()
    backlog: list[int] = []
    next_id = 0
    total = 0
    for t in range(n):
        if t <= tstar:
            count = N // (n - t)
            backlog.extend(range(next_id, next_id + count))
            next_id += count
            total += count
        quota = min(m, len(backlog))
        for machine in range(quota):
            schedule.assignments.append((backlog[machine], machine, t))
        del backlog[:quota]
    feasible = not backlog
    schedule.misses = backlog
    return WitnessResult(m=m, schedule=schedule, feasible=feasible, jobs_total=total)


@dataclass
class EnvelopeRow:
    tstar: int
    off: int
    bound: int

    @property
    def holds(self) -> bool:
        return self.off <= self.bound


def scaling_bound_report(n: int, N: int | None = None,
                         t_max: int | None = None) -> list[EnvelopeRow]:
    """Compare exact OFF(t*) against ``ceil(N / (e (n - t*)))`` for each t*.

    The bound is the machine count :func:`offline_witness` rents; this report
    maps out where it really covers the optimum and where integrality
    effects push the optimum past it.
    """
    if N is None:
        N = n * n
    if t_max is None:
        t_max = n - 1
    A = [0]
    for t in range(n):
        A.append(A[-1] + N // (n - t))
    rows = []
    for tstar in range(min(t_max, n - 1) + 1):
        off = 0
        for s in range(tstar + 1):
            num = A[tstar + 1] - A[s]
            off = max(off, -(-num // (n - s)))
        bound = -(-(N * EULER.denominator) // (EULER.numerator * (n - tstar)))
        rows.append(EnvelopeRow(tstar=tstar, off=off, bound=bound))
    return rows
