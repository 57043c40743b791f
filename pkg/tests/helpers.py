"""Random instance generators and an independent trace replay for the tests."""

from __future__ import annotations

import itertools
import random

import networkx as nx

import oracle
from ef1restore.core import Additive, Allocation, Instance, Mode, apply, sort_items
from ef1restore.reduction import PmrInstance, perfect_matchings
from ef1restore.restore_orientation import MultigraphInstance

# one summary line per acceptance criterion, printed by conftest at the end of the run
ACCEPTANCE: dict[int, str] = {}


def _greedy(rng: random.Random, n: int, m: int, sign: int):
    d = rng.randrange(n)
    items = [f"g{k}" for k in range(1, m + 1)]
    values = {g: sign * rng.randint(1, 9) for g in items}
    inst = Instance.with_identical(Mode.GOODS if sign > 0 else Mode.CHORES, items, Additive(values), n)
    bundles = [[] for _ in range(n)]
    worth = [0] * n
    order = items[:]
    rng.shuffle(order)
    others = [k for k in range(n) if k != d]
    for g in order:
        # goods go to a poorest agent, chores to a richest one
        pick = min(others, key=lambda k: (sign * worth[k], k))
        bundles[pick].append(g)
        worth[pick] += values[g]
    return inst, Allocation(tuple(bundles), distinguished=d)


def random_identical_goods(rng: random.Random, n: int, m: int):
    """Identical additive goods, ``X_d`` empty, the rest filled greedily (hence EF1 among themselves)."""
    return _greedy(rng, n, m, +1)


def random_identical_chores(rng: random.Random, n: int, m: int):
    return _greedy(rng, n, m, -1)


def random_multigraph(rng: random.Random, n: int, m: int) -> MultigraphInstance:
    edges = []
    for k in range(1, m + 1):
        a, b = rng.sample(range(n), 2)
        edges.append((f"g{k}", a, b))
    return MultigraphInstance(n, tuple(edges))


def random_orientation(rng: random.Random, M: MultigraphInstance, distinguished: int = 0) -> Allocation:
    bundles = [[] for _ in range(M.n)]
    for g, a, b in M.edges:
        bundles[rng.choice((a, b)) if b is not None else a].append(g)
    return Allocation(tuple(bundles), distinguished)


def random_near_ef1_orientation(rng: random.Random, max_n: int = 6, max_m: int = 15):
    """Rejection-sample an orientation in which exactly one agent EF1-envies."""
    while True:
        n = rng.randint(2, max_n)
        M = random_multigraph(rng, n, rng.randint(1, max_m))
        inst = M.instance()
        X = random_orientation(rng, M)
        E = oracle.matrix(inst, X.bundles)
        envious = [i for i in range(n) if any(x > 0 for x in E[i])]
        if len(envious) == 1:
            return inst, Allocation(X.bundles, envious[0])


def replay_problems(inst, X, steps, fairness="ef1", granularity="max") -> list[str]:
    """Replay ``steps`` with ``core.apply`` and judge every state with the oracle."""
    problems = []
    d = X.distinguished
    cur = X
    if not oracle.near_fair(inst, cur.bundles, d, fairness):
        problems.append("start is not near-fair")
    for k, op in enumerate(steps, start=1):
        nxt = apply(cur, op)
        if not oracle.near_fair(inst, nxt.bundles, d, fairness):
            problems.append(f"state after step {k} is not near-fair")
        if not oracle.valid(inst, cur.bundles, nxt.bundles, d, fairness, granularity):
            problems.append(f"step {k} is not valid")
        cur = nxt
    if not oracle.fair(inst, cur.bundles, fairness):
        problems.append("final state is not fair")
    return problems


def connected_bipartite_graphs(k: int):
    """Every connected bipartite graph on ``a1..ak`` and ``b1..bk`` (labelled)."""
    A = [f"a{i}" for i in range(1, k + 1)]
    B = [f"b{i}" for i in range(1, k + 1)]
    full = [(a, b) for a in A for b in B]
    for r in range(2 * k - 1, len(full) + 1):
        for E in itertools.combinations(full, r):
            G = nx.Graph()
            G.add_nodes_from(A + B)
            G.add_edges_from(E)
            if nx.is_connected(G):
                yield A, B, frozenset(E)


def pmr_pairs(k: int):
    """Every PMR instance on a connected graph with sides of size ``k``."""
    for A, B, E in connected_bipartite_graphs(k):
        pms = perfect_matchings(PmrInstance(A, B, E, frozenset(), frozenset()))
        for M0, M1 in itertools.permutations(pms, 2):
            yield PmrInstance(A, B, E, M0, M1)


def key_of(bundles) -> tuple:
    return tuple(tuple(sort_items(b)) for b in bundles)
