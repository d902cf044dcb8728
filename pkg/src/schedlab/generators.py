"""Deterministic instance generators for every model in the library.

Each generator is a pure function of its parameters and seed, so emitted
files are byte-identical across runs.  Randomized kinds draw from one
`random.Random(seed)`; structured kinds (adversary stream, upper-triangular
matching family) take no randomness at all.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import ContractViolation, Instance, Job


def adversary_instance(n: int, N: int | None = None) -> Instance:
    """The full release stream floor(N/(n-t)) at each t, all due at n."""
    if n < 1:
        raise ContractViolation("need n >= 1")
    if N is None:
        N = n * n
    jobs = []
    next_id = 0
    for t in range(n):
        count = N // (n - t)
        for _ in range(count):
            jobs.append(Job(next_id, t, n))
            next_id += 1
    return Instance.of("unit-min", jobs)


def random_unit_instance(jobs: int, horizon: int, seed: int = 0) -> Instance:
    if jobs < 0 or horizon < 1:
        raise ContractViolation("need jobs >= 0 and horizon >= 1")
    rng = random.Random(seed)
    out = []
    for i in range(jobs):
        r = rng.randrange(horizon)
        d = rng.randint(r + 1, horizon)
        out.append(Job(i, r, d))
    realized = max((j.d for j in out), default=horizon)
    return Instance.of("unit-min", out, horizon=realized)


def _dyadic(rng: random.Random, lo: Fraction, hi: Fraction,
            max_denom_bits: int = 4) -> Fraction:
    """Uniform-ish dyadic rational in (lo, hi]."""
    bits = rng.randint(0, max_denom_bits)
    scale = 1 << bits
    lo_n = int(lo * scale) + 1
    hi_n = int(hi * scale)
    if hi_n < lo_n:
        return Fraction(hi)
    return Fraction(rng.randint(lo_n, hi_n), scale)


def equal_deadline_instance(kappa: int, jobs: int, seed: int = 0) -> Instance:
    """Random dyadic releases and sizes against the deadline 2^kappa - 1."""
    if kappa < 1 or jobs < 0:
        raise ContractViolation("need kappa >= 1 and jobs >= 0")
    rng = random.Random(seed)
    d = (1 << kappa) - 1
    out = []
    for i in range(jobs):
        r = _dyadic(rng, Fraction(0), Fraction(d), 3) - Fraction(1, 8)
        if r < 0:
            r = Fraction(0)
        p = _dyadic(rng, Fraction(0), d - r)
        if r.denominator == 1:
            r = int(r)
        out.append(Job(i, r, d, p=p))
    return Instance.of("equal-deadline", out)


def throughput_instance(jobs: int, horizon: int, k: int = 1, w_max: int = 10,
                        seed: int = 0, unweighted: bool = False) -> Instance:
    if jobs < 0 or horizon < 1 or k < 1 or w_max < 1:
        raise ContractViolation("bad throughput generator parameters")
    rng = random.Random(seed)
    out = []
    for i in range(jobs):
        r = rng.randrange(horizon)
        d = rng.randint(r + 1, horizon)
        w = 1 if unweighted else rng.randint(1, w_max)
        out.append(Job(i, r, d, w=w))
    return Instance.of("throughput", out, k=k)


def upper_triangular_instance(k: int, levels: int) -> Instance:
    """Hard family for online matching: job windows nest like a triangle.

    Level ``l`` holds ``k`` unit jobs with window [0, l+1), so early steps
    can burn the flexible jobs that later steps will need.  The offline
    optimum schedules level ``l`` at step ``l`` and completes everything.
    """
    if k < 1 or levels < 1:
        raise ContractViolation("need k >= 1 and levels >= 1")
    jobs = [Job(lvl * k + i, 0, lvl + 1) for lvl in range(levels)
            for i in range(k)]
    return Instance.of("throughput", jobs, k=k)


KINDS = ("adversary", "random-unit", "equal-deadline", "throughput",
         "upper-triangular")


def generate(kind: str, seed: int = 0, **params) -> Instance:
    """Dispatch by kind name; unknown kinds or bad parameters raise."""
    try:
        if kind == "adversary":
            return adversary_instance(params["n"], params.get("N"))
        if kind == "random-unit":
            return random_unit_instance(params["jobs"], params["horizon"], seed)
        if kind == "equal-deadline":
            return equal_deadline_instance(params["kappa"], params["jobs"], seed)
        if kind == "throughput":
            return throughput_instance(
                params["jobs"], params["horizon"], params.get("k", 1),
                params.get("w_max", 10), seed, params.get("unweighted", False))
        if kind == "upper-triangular":
            return upper_triangular_instance(params["k"], params["levels"])
    except KeyError as missing:
        raise ContractViolation(f"{kind} needs parameter {missing}") from None
    raise ContractViolation(f"unknown generator kind {kind!r}")
