"""Machine minimization with a scaled EDF policy.

An online scheduler sees unit jobs as they are released and must decide,
step by step, how many machines to keep open.  The policy here tracks the
exact offline optimum OFF(t) for everything released so far and opens
ceil(alpha * OFF(t)) machines, filling them earliest deadline first.

At alpha = e the run is always feasible; the demo shows the per-step
ledger on a small hostile stream, then what breaks at alpha = 1.
"""
from schedlab import adversary_instance, run_alpha_edf

inst = adversary_instance(n=8)
print(f"instance: {len(inst.jobs)} unit jobs, all due at t={inst.horizon}")
print()

tr = run_alpha_edf(inst, alpha="e")
print("alpha = e")
print(f"{'t':>3} {'released':>9} {'OFF(t)':>7} {'m(t)':>6} {'scheduled':>10}")
for t in range(len(tr.m)):
    print(f"{t:>3} {len(tr.released[t]):>9} {tr.off[t]:>7} {tr.m[t]:>6}"
          f" {len(tr.trace.chosen[t]):>10}")
print(f"cost {tr.cost}, offline optimum {tr.off_final},"
      f" ratio {tr.ratio:.4f}, misses {len(tr.schedule.misses)}")
print()

lean = run_alpha_edf(inst, alpha=1)
print("alpha = 1 (matching the optimum machine for machine is not enough)")
print(f"cost {lean.cost}, misses {len(lean.schedule.misses)}"
      f" of {len(inst.jobs)} jobs")
