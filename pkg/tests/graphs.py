"""Random functional graphs and random legal reductions, for property tests."""
from dynsys.funcgraph import FuncGraph


def random_graph(rng, max_nodes=200):
    n = rng.randint(1, max_nodes)
    succ = {}
    for i in range(n):
        s = None if rng.random() < 0.04 else rng.randrange(n)
        succ[i] = None if s == i else s  # self-loops become fixed nodes
    return FuncGraph(succ, {i: i for i in range(n)})


def pick_chain(g, rng):
    """A path starting anywhere whose later nodes have in-degree 1 and lie off cycles."""
    starts = [n for n in g.nodes if not g.is_cycle_member(n)]
    if not starts:
        return None
    head = rng.choice(starts)
    chain = [head]
    x = g.succ[head]
    while (x is not None and x not in chain and g.in_degree(x) == 1 and not g.is_cycle_member(x) and len(chain) < 6):
        chain.append(x)
        x = g.succ[x]
    return chain


def legal_moves(g, rng):
    """Candidate (block, params) pairs that satisfy each block's preconditions."""
    moves = []
    chain = pick_chain(g, rng)
    if chain:
        moves.append((1, {"chain": chain}))
    cycles = g.cycles()
    if cycles:
        moves.append((2, {"cycle": list(rng.choice(cycles))}))
    sources = [n for n in g.nodes if g.in_degree(n) == 0 and g.succ[n] is not None]
    if sources:
        moves.append((3, {"node": rng.choice(sources)}))
    delegates = [n for n in g.nodes if g.succ[n] is not None and not g.is_cycle_member(n)]
    if delegates:
        moves.append((4, {"delegate": rng.choice(delegates)}))
    labels = sorted(g.labels.values())
    k = min(len(labels), rng.randint(1, 6))
    picked = rng.sample(labels, k)
    shuffled = picked[:]
    rng.shuffle(shuffled)
    moves.append((5, {"mapping": list(zip(picked, shuffled))}))
    return moves
