"""Perfect matching reconfiguration and its encoding as a restoration instance.

A PMR instance is a bipartite graph with two perfect matchings; a *flip*
replaces two matching edges ``(a_i, x), (a_j, y)`` by ``(a_i, y), (a_j, x)``
when both exist.  :func:`build_reduction` produces a binary monotone instance
on ``n + 3`` agents whose only valid operations are exchanges of ``b`` items,
one per flip.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .core import Allocation, Generators, Instance, Mode, is_ef1, is_near_ef1
from .errors import ConstructionError, InputError

Edge = tuple[str, str]
Matching = frozenset  # of Edge


@dataclass(frozen=True)
class PmrInstance:
    A: tuple[str, ...]
    B: tuple[str, ...]
    edges: frozenset[Edge]
    start: Matching
    target: Matching

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        object.__setattr__(self, "B", tuple(self.B))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, "start", frozenset(tuple(e) for e in self.start))
        object.__setattr__(self, "target", frozenset(tuple(e) for e in self.target))

    @property
    def n(self) -> int:
        return len(self.A)

    def neighbours(self, a: str) -> set[str]:
        return {b for x, b in self.edges if x == a}


@dataclass
class PmrReport:
    violations: list[str] = field(default_factory=list)
    pi: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _matching_problem(P: PmrInstance, M: Matching) -> str | None:
    if not M <= P.edges:
        return f"edges {sorted(M - P.edges)} are not in the graph"
    a_side = [a for a, _ in M]
    b_side = [b for _, b in M]
    if len(set(a_side)) != len(a_side) or len(set(b_side)) != len(b_side):
        return "not a matching"
    if set(a_side) != set(P.A) or set(b_side) != set(P.B):
        return "not perfect"
    return None


def validate_pmr(P: PmrInstance) -> PmrReport:
    """Bipartiteness, equal sides, both matchings perfect; derives the permutation.

    ``pi[i] = k`` (0-based) means that the target matches ``A[i]`` with the
    vertex the start matching gives to ``A[k]``.
    """
    report = PmrReport()
    if len(P.A) != len(P.B):
        report.violations.append(f"sides differ in size: {len(P.A)} vs {len(P.B)}")
    if set(P.A) & set(P.B) or len(set(P.A)) != len(P.A) or len(set(P.B)) != len(P.B):
        report.violations.append("vertex names must be distinct")
    for a, b in P.edges:
        if a not in P.A or b not in P.B:
            report.violations.append(f"edge ({a}, {b}) does not join A to B")
    for name, M in (("start", P.start), ("target", P.target)):
        problem = _matching_problem(P, M)
        if problem:
            report.violations.append(f"{name} matching: {problem}")
    if report.ok:
        partner0 = dict(P.start)
        owner = {partner0[a]: k for k, a in enumerate(P.A)}
        star = dict(P.target)
        report.pi = tuple(owner[star[a]] for a in P.A)
    return report


def _require(P: PmrInstance) -> PmrReport:
    report = validate_pmr(P)
    if not report.ok:
        raise InputError("invalid PMR instance: " + "; ".join(report.violations))
    return report


def pmr_flips(P: PmrInstance, M: Matching) -> list[Matching]:
    """Perfect matchings one flip away from ``M``, ordered by the flipped pair of A vertices."""
    M = frozenset(M)
    problem = _matching_problem(P, M)
    if problem:
        raise InputError(f"matching is {problem}")
    partner = dict(M)
    out = []
    for a, c in combinations(P.A, 2):
        x, y = partner[a], partner[c]
        if (a, y) in P.edges and (c, x) in P.edges:
            out.append((M - {(a, x), (c, y)}) | {(a, y), (c, x)})
    return out


def pmr_reachable(P: PmrInstance) -> bool:
    """Breadth-first search over flips from the start to the target matching."""
    _require(P)
    seen = {P.start}
    queue = deque([P.start])
    while queue:
        M = queue.popleft()
        if M == P.target:
            return True
        for M2 in pmr_flips(P, M):
            if M2 not in seen:
                seen.add(M2)
                queue.append(M2)
    return False


def perfect_matchings(P: PmrInstance) -> list[Matching]:
    """Every perfect matching of the graph (brute force, small graphs only)."""
    out: list[Matching] = []

    def extend(k: int, used: frozenset, acc: list[Edge]):
        if k == len(P.A):
            out.append(frozenset(acc))
            return
        a = P.A[k]
        for b in P.B:
            if b not in used and (a, b) in P.edges:
                extend(k + 1, used | {b}, acc + [(a, b)])

    extend(0, frozenset(), [])
    return out


# --------------------------------------------------------------------------
# the reduction


@dataclass(frozen=True)
class ReductionInstance:
    pmr: PmrInstance
    instance: Instance
    start: Allocation
    target: Allocation
    pi: tuple[int, ...]
    b_names: tuple[str, ...]  # b_names[k] is the B vertex called b_{k+1}

    @property
    def n(self) -> int:
        return self.pmr.n


def _a(i: int) -> str:
    return f"a{i + 1}"


def _abar(i: int) -> str:
    return f"abar{i + 1}"


def _b(k: int) -> str:
    return f"b{k + 1}"


def reduction_generators(n: int, pi: Iterable[int], neighbours: list[set[int]]) -> list[list[frozenset[str]]]:
    """Minimal value-1 sets of every agent; ``neighbours[i]`` holds b indices adjacent to a_i."""
    pi = tuple(pi)
    pairs = []
    for i in range(n):
        pairs.append(frozenset({_a(i), _abar(i)}))
        for j in range(n):
            if j != pi[i]:
                pairs.append(frozenset({_a(i), _b(j)}))
                pairs.append(frozenset({_abar(i), _b(j)}))
    gens: list[list[frozenset[str]]] = [list(pairs)]
    for i in range(n):
        own = [frozenset({"r3"}), frozenset({"r4"})]
        own += [frozenset({_a(i), _abar(i), _b(j)}) for j in sorted(neighbours[i])]
        gens.append(own)
    gens.append([frozenset({"r1", "r2"})] + pairs)
    gens.append([frozenset({"r3", "r4"}), frozenset({"r1"}), frozenset({"r2"})])
    return gens


def reduction_zero_sets(n: int, pi: tuple[int, ...], neighbours: list[set[int]]) -> list[list[frozenset[str]]]:
    """Sets the construction lists explicitly with value 0, per agent."""
    zero: list[list[frozenset[str]]] = [[] for _ in range(n + 3)]
    for i in range(n):
        zero[0] += [frozenset({_a(i), _b(pi[i])}), frozenset({_abar(i), _b(pi[i])})]
        zero[n + 1] += [frozenset({_a(i), _b(pi[i])}), frozenset({_abar(i), _b(pi[i])})]
    for i in range(n):
        agent = i + 1
        for j in sorted(neighbours[i]):
            full = [_a(i), _abar(i), _b(j)]
            zero[agent] += [frozenset(s) for r in (0, 1, 2) for s in combinations(full, r)]
            others = [_b(k) for k in range(n) if k != j]
            others += [x for k in range(n) if k != i for x in (_a(k), _abar(k))]
            others += ["r1", "r2"]
            for x in (_a(i), _abar(i)):
                zero[agent] += [frozenset({x, _b(j), c}) for c in others]
    zero[n + 1] += [frozenset({"r1"}), frozenset({"r2"})]
    for r in ("r1", "r2"):
        zero[n + 1] += [frozenset({r, c}) for c in ["r3", "r4"] + [_b(k) for k in range(n)]]
    zero[n + 2] += [frozenset({"r3"}), frozenset({"r4"})]
    for r in ("r3", "r4"):
        zero[n + 2] += [frozenset({r, c}) for k in range(n) for c in (_a(k), _abar(k), _b(k))]
    return zero


def build_reduction(P: PmrInstance) -> ReductionInstance:
    report = _require(P)
    pi = report.pi
    n = P.n
    partner0 = dict(P.start)
    b_names = tuple(partner0[a] for a in P.A)
    b_index = {b: k for k, b in enumerate(b_names)}
    neighbours = [{b_index[b] for b in P.neighbours(a)} for a in P.A]

    gens = reduction_generators(n, pi, neighbours)
    for agent, zeros in enumerate(reduction_zero_sets(n, pi, neighbours)):
        for z in zeros:
            hit = [g for g in gens[agent] if g <= z]
            if hit:
                raise ConstructionError(f"agent {agent}: zero-listed set {sorted(z)} contains generator {sorted(hit[0])}")

    items = [x for i in range(n) for x in (_a(i), _abar(i), _b(i))] + ["r1", "r2", "r3", "r4"]
    inst = Instance(Mode.GOODS, items, tuple(Generators(tuple(g)) for g in gens))
    middle = [{_a(i), _abar(i), _b(i)} for i in range(n)]
    start = Allocation(tuple([set()] + middle + [{"r1", "r2"}, {"r3", "r4"}]), distinguished=0)
    goal = [{_a(i), _abar(i), _b(pi[i])} for i in range(n)]
    target = Allocation(tuple([set()] + goal + [{"r1", "r2"}, {"r3", "r4"}]), distinguished=0)
    if not is_near_ef1(inst, start):
        raise ConstructionError("start allocation is not near-EF1 for agent 0")
    if not is_ef1(inst, target):
        raise ConstructionError("target allocation is not EF1")
    return ReductionInstance(P, inst, start, target, pi, b_names)


def allocation_to_matching(R: ReductionInstance, Y: Allocation) -> Matching:
    """Read ``a_i -- b`` off agent ``i``'s bundle; rejects any non-canonical shape."""
    n = R.n
    if len(Y.bundles) != n + 3:
        raise InputError(f"expected {n + 3} bundles")
    if Y.bundles[0] or Y.bundles[n + 1] != {"r1", "r2"} or Y.bundles[n + 2] != {"r3", "r4"}:
        raise InputError("agents 0, n+1, n+2 do not hold their fixed bundles")
    edges = []
    for i in range(n):
        rest = set(Y.bundles[i + 1]) - {_a(i), _abar(i)}
        if len(Y.bundles[i + 1]) != 3 or len(rest) != 1:
            raise InputError(f"bundle of agent {i + 1} is not {{a, abar, b}}: {sorted(Y.bundles[i + 1])}")
        (b,) = rest
        if not b.startswith("b") or not b[1:].isdigit() or not 1 <= int(b[1:]) <= n:
            raise InputError(f"agent {i + 1} holds {b!r} in place of a b item")
        edges.append((R.pmr.A[i], R.b_names[int(b[1:]) - 1]))
    return frozenset(edges)


def matching_to_allocation(R: ReductionInstance, M: Matching) -> Allocation:
    M = frozenset(M)
    problem = _matching_problem(R.pmr, M)
    if problem:
        raise InputError(f"matching is {problem}")
    b_index = {b: k for k, b in enumerate(R.b_names)}
    partner = dict(M)
    middle = [{_a(i), _abar(i), _b(b_index[partner[a]])} for i, a in enumerate(R.pmr.A)]
    return Allocation(tuple([set()] + middle + [{"r1", "r2"}, {"r3", "r4"}]), distinguished=0)
