"""Run the bounded criteria across the built-in systems and print a verdict table."""
from dynsys import builtin
from dynsys.criteria import (
    check_c1_isomorphic,
    check_c2_coverage,
    check_c3_self_similar,
    check_c4_eta,
    check_c6_descent,
)
from dynsys.reverse import Caps

caps = Caps(param_cap=12, value_cap=10**6)
rows = []
for name in ("simple", "incr", "pow2", "mp", "collatz-reduced", "collatz-reduced-nu2"):
    s = builtin(name)
    rows.append((
        name,
        check_c2_coverage(s, 100, 8, caps).verdict,
        check_c3_self_similar(s, 3, [n for n in range(1, 60) if s.admits(n)], caps).verdict,
        check_c4_eta(s, range(0, 200), caps).verdict,
        check_c6_descent(s, 0, 10**4).verdict,
    ))

print(f"{'system':<22}{'C2':<15}{'C3':<15}{'C4':<17}{'C6':<10}")
for row in rows:
    print(f"{row[0]:<22}{row[1]:<15}{row[2]:<15}{row[3]:<17}{row[4]:<10}")

print()
pairs = [("simple", "incr"), ("simple", "pow2"), ("collatz-reduced", "mp")]
for a, b in pairs:
    rep = check_c1_isomorphic(builtin(a), builtin(b), 3, Caps(count_cap=3))
    print(f"C1 {a} vs {b}: {rep.verdict}; level counts {rep.evidence['level_counts']}")
