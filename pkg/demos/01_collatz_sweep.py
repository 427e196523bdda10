"""Sweep the 3n+1 map over the first million seeds and look at the record breakers."""
from dynsys import builtin, sweep, trace

collatz = builtin("collatz")

rec = trace(collatz, 27)
print(f"seed 27 climbs to {rec.max_excursion} and first reaches 1 after {rec.total_stop} steps")
print("  " + " ".join(map(str, rec.values[:20])) + " ...")

rep = sweep(collatz, 1, 10**6)
print(f"\nswept [1, 10^6] in {rep.elapsed:.2f}s")
for label, n in rep.tallies.items():
    print(f"  {label}: {n} seeds")
print(f"  non-converged: {len(rep.non_converged)}")

print("\nrecord breakers (seed, total stopping time, max excursion):")
for seed, total, peak in rep.records[-10:]:
    print(f"  {seed:>7}  {total:>4}  {peak}")

# a window far away from 1 still settles quickly because trajectories fall into memoized values
lo = 10**12
far = sweep(collatz, lo, lo + 10**5)
print(f"\n[10^12, 10^12 + 10^5]: all converged = {far.all_converged}, {far.elapsed:.2f}s")
