"""Turn the 3n+1 graph into the reduced odd-only graph with the reduction blocks."""
from dynsys import builtin
from dynsys.criteria import check_c5_branch_peel, check_c6_descent
from dynsys.export import graph_to_dot
from dynsys.funcgraph import from_system, replay

N = 200
original = from_system(builtin("collatz"), 1, N)
g = original.copy()

print("roots before:", [(e.kind, e.nodes) for e in g.roots()][:6], "...")
g.collapse_cycle([1, 4, 2])  # the cycle becomes a fixed point labelled 1

# each odd value absorbs the chain of its even multiples 2^j * o -> ... -> 2o -> o
for o in range(1, N + 1, 2):
    chain = [o << j for j in range(8, 0, -1) if (o << j) in g] + [o]
    if len(chain) > 1:
        g.contract_chain(chain, keep="last")
print(f"after contracting even chains: {len(g)} nodes, all odd: {all(n % 2 for n in g.nodes)}")

# odd multiples of 3 have no odd predecessor and drop out
pruned = 0
while todo := [n for n in g.nodes if n % 3 == 0 and g.in_degree(n) == 0]:
    for n in todo:
        g.prune_no_input(n)
    pruned += len(todo)
print(f"pruned {pruned} multiples of 3; {len(g)} nodes remain")

same = replay(original, g.log).to_json() == g.to_json()
print(f"replaying the {len(g.log)}-entry log reproduces the graph: {same}")

print("\ncriterion 5 on the reduced window:", check_c5_branch_peel(g, 1).summary())
print("criterion 6 on the reduced map:", check_c6_descent(builtin("collatz-reduced"), 1, N).summary())
print("criterion 6 with at least two halvings:", check_c6_descent(builtin("collatz-reduced-nu2"), 1, N).summary())

small = from_system(builtin("collatz"), 1, 10)
print("\nDOT for collatz on [1, 10]:\n" + graph_to_dot(small, "collatz-1-10"))
