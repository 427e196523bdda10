"""Grow predecessor trees backwards from fixed points and compare their shapes."""
from dynsys import builtin
from dynsys.canonical import tree_form
from dynsys.reverse import Caps, build_reverse_tree, eta_profile, predecessors

simple = builtin("simple")
for d in range(4):
    t = build_reverse_tree(simple, 1, d)
    print(f"simple, depth {d}: {len(t)} nodes, levels {[t.level(k) for k in range(d + 1)]}")
print("canonical form at depth 2:", tree_form(build_reverse_tree(simple, 1, 2)))

reduced = builtin("collatz-reduced")
print("\npredecessors of 1 under the reduced 3n+1 map (exponent <= 12):",
      predecessors(reduced, 1, Caps(param_cap=12)))
t = build_reverse_tree(reduced, 1, 3, Caps(param_cap=8, value_cap=10**6))
print(f"reduced map, depth 3 under caps: {len(t)} nodes, cap-truncated nodes {len(t.cap_truncated_nodes())}")

mp = builtin("mp")
print("\nsingle primes map to 1 under mp:", predecessors(mp, 1, Caps(value_cap=40)))
prof = eta_profile(mp, [1, 5, 7, 35], Caps(param_cap=6))
for n in prof.counts:
    print(f"  eta({n}) = {prof.counts[n]} within caps, unbounded family: {prof.unbounded[n]}")

pow2 = builtin("pow2")
print("\npow2: 0 is reached from every power of two:", predecessors(pow2, 0, Caps(value_cap=100)))
