"""Mixed-length jobs against one common deadline d = 2^kappa - 1.

Time is split into kappa geometrically shrinking phases.  A job arriving in
phase i is long if it exceeds a quarter of the phase length: long jobs get a
machine immediately, short jobs wait for the next phase boundary, where idle
machines close, running machines are re-sorted into short and long pools,
and the queue is placed greedily (largest first) so everything still meets
the deadline.

The transcript audits the pool maxima per phase against 8x (resp. 8x + 1)
a volume lower bound on the offline optimum, and the peak concurrency
against 16x + 1.
"""
from schedlab import equal_deadline_instance, phase_split, run_equal_deadline

inst = equal_deadline_instance(kappa=4, jobs=24, seed=11)
d = int(inst.common_deadline)
print(f"instance: {len(inst.jobs)} jobs, common deadline {d}")
print()

print("phases:", ", ".join(f"[{p.start},{p.end})" for p in phase_split(4)))
print()

tr = run_equal_deadline(inst)
print(f"{'phase':>5} {'window':>9} {'short':>6} {'long':>5} "
      f"{'closed':>7} {'opened':>7} {'Mshort':>7} {'Mlong':>6}")
for ph in tr.phases:
    print(f"{ph.index:>5} {f'[{ph.start},{ph.end})':>9} "
          f"{ph.released_short:>6} {ph.released_long:>5} "
          f"{ph.closed_at_start:>7} {ph.opened:>7} "
          f"{ph.m_short:>7} {ph.m_long:>6}")
print()

print(f"volume lower bound LB = {tr.lb}")
for row in tr.bound_rows():
    print(f"  phase {row['phase']}: M_short {row['m_short']} <= "
          f"{row['short_budget']}, M_long {row['m_long']} <= "
          f"{row['long_budget']}  ok = {row['ok']}")
print(f"peak concurrent {tr.peak_concurrent} <= {16 * tr.lb + 1}")
print(f"misses {tr.misses}, overall ok = {tr.ok}")
print()

sample = sorted(tr.schedule.assignments, key=lambda a: a[2])[:6]
print("first assignments (job, machine, start):")
for jid, machine, start in sample:
    end = start + tr.lengths[jid]
    print(f"  job {jid:>2} ({tr.job_class[jid]:>5}, p={tr.lengths[jid]})"
          f" -> machine {machine} at [{start}, {end})")
