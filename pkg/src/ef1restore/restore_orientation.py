"""Orientations of multigraph instances and sink-to-predecessor restoration.

Agents are vertices and items are edges; an item is worth 1 to each endpoint
and 0 to everybody else.  An orientation hands each item to one of its
endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Allocation,
    EnvyGraph,
    Graphical,
    Instance,
    Mode,
    Operation,
    Transfer,
    apply,
    envy_graph,
    envy_matrix,
    is_near_ef1,
    sort_items,
)
from .errors import InputError, UnsupportedModeError
from .restore_identical import RestorationTrace

EdgeItem = tuple[str, int, Optional[int]]


@dataclass(frozen=True)
class MultigraphInstance:
    """``n`` agents and edge items ``(item, a, b)``; ``b is None`` marks a pendant item."""

    n: int
    edges: tuple[EdgeItem, ...]

    def __post_init__(self):
        edges = tuple((str(g), int(a), None if b is None else int(b)) for g, a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n < 1:
            raise InputError("need at least one agent")
        ids = [g for g, _, _ in edges]
        if len(set(ids)) != len(ids):
            raise InputError("item ids must be unique")
        for g, a, b in edges:
            if a == b:
                raise InputError(f"item {g!r} is a self-loop at agent {a}")
            for x in (a, b):
                if x is not None and not 0 <= x < self.n:
                    raise InputError(f"item {g!r} has endpoint {x} outside the {self.n} agents")

    def instance(self) -> Instance:
        items = [g for g, _, _ in self.edges]
        return Instance(Mode.GOODS, items, tuple(Graphical(i, self.edges) for i in range(self.n)))


def _require_graphical(inst: Instance) -> None:
    if not inst.is_graphical:
        raise UnsupportedModeError("orientation routines need graphical valuations")


def is_orientation(inst: Instance, X: Allocation) -> bool:
    """Every item is held by an agent that values it."""
    _require_graphical(inst)
    return all(inst.value(i, [g]) > 0 for i, B in enumerate(X.bundles) for g in B)


@dataclass
class OrientationReport:
    """Per-part outcome of the orientation structure checks, with the first failure of each."""

    own_value: bool = True
    paths: bool = True
    acyclic: bool = True
    failures: list[str] = field(default_factory=list)
    paths_checked: int = 0

    @property
    def ok(self) -> bool:
        return self.own_value and self.paths and self.acyclic

    def __bool__(self) -> bool:
        return self.ok


def _simple_paths(G: EnvyGraph):
    """Every simple directed path with at least one edge, as vertex lists."""
    stack = [[i] for i in range(G.n)]
    while stack:
        path = stack.pop()
        for j in G.successors(path[-1]):
            if j not in path:
                ext = path + [j]
                yield ext
                stack.append(ext)


def check_orientation_structure(inst: Instance, X: Allocation) -> OrientationReport:
    """Structure of orientations under graphical valuations.

    (1) ``v_i(X_i) = |X_i| >= v_j(X_i)``; (2) along any envy path
    ``i_0 -> ... -> i_d`` the last agent values its bundle at least
    ``v_{i_0}(X_{i_0}) + d``; (3) the envy graph has no cycle.
    """
    if not is_orientation(inst, X):
        raise InputError("allocation is not an orientation")
    report = OrientationReport()
    for i, B in enumerate(X.bundles):
        own = inst.value(i, B)
        if own != len(B):
            report.own_value = False
            report.failures.append(f"(1) agent {i} values its {len(B)} items at {own}")
        for j in range(inst.n):
            if inst.value(j, B) > own:
                report.own_value = False
                report.failures.append(f"(1) agent {j} values bundle {i} above its owner")
    G = envy_graph(inst, X)
    own = [inst.value(i, X.bundles[i]) for i in range(inst.n)]
    for path in _simple_paths(G):
        report.paths_checked += 1
        if own[path[-1]] < own[path[0]] + len(path) - 1:
            report.paths = False
            report.failures.append(f"(2) path {path} breaks the value ladder")
    if not G.is_acyclic():
        report.acyclic = False
        report.failures.append("(3) envy graph has a cycle")
    return report


def max_envy_K(inst: Instance, X: Allocation) -> int:
    """Largest envy amount of the distinguished agent, clamped at 0."""
    E = envy_matrix(inst, X)
    row = np.delete(E[X.distinguished], X.distinguished)
    return max(0, int(row.max())) if row.size else 0


def closest_sink(G: EnvyGraph, source: int) -> tuple[int, list[int]] | None:
    """Nearest sink reachable from ``source`` and a shortest path to it.

    Ties go to the lowest sink index; each path vertex is the lowest-index
    neighbour one level closer to ``source``.
    """
    dist = G.distances_from(source)
    sinks = [s for s in G.sinks() if s in dist and s != source]
    if not sinks:
        return None
    s = min(sinks, key=lambda x: (dist[x], x))
    path = [s]
    while path[-1] != source:
        v = path[-1]
        path.append(min(u for u in G.predecessors(v) if dist.get(u) == dist[v] - 1))
    return s, path[::-1]


def restore_orientation(inst: Instance, X: Allocation) -> RestorationTrace:
    """Move items from the closest sink to its predecessor until the distinguished agent is happy."""
    _require_graphical(inst)
    if not is_orientation(inst, X):
        raise InputError("start allocation is not an orientation")
    if not is_near_ef1(inst, X):
        raise InputError("start allocation is not near-EF1")
    d = X.distinguished
    cur = X
    steps: list[Operation] = []
    limit = inst.m * inst.n + 1
    while (np.delete(envy_matrix(inst, cur)[d], d) > 0).any():
        if len(steps) >= limit:
            raise RuntimeError("restoration did not terminate")
        found = closest_sink(envy_graph(inst, cur), d)
        if found is None:
            raise RuntimeError("no sink reachable from the distinguished agent")
        s, path = found
        p = path[-2]
        g = next(g for g in sort_items(cur.bundles[s]) if inst.value(p, [g]) == 1)
        op = Transfer(s, p, g)
        steps.append(op)
        cur = apply(cur, op)
    return RestorationTrace(tuple(steps), X, cur)


def gen_path_lower_bound(n: int) -> tuple[MultigraphInstance, Allocation]:
    """Envy path ``0 -> 1 -> ... -> n-1`` needing ``n - 1`` relayed transfers.

    Agent 0 holds one pendant item, agent ``i >= 1`` holds ``i + 2`` items
    shared with agent ``i - 1``.  There are ``(n^2 + 3n - 2) / 2`` items.
    """
    if n < 2:
        raise InputError("need n >= 2")
    edges: list[EdgeItem] = [("g1", 0, None)]
    bundles: list[list[str]] = [["g1"]]
    k = 1
    for i in range(1, n):
        bundle = []
        for _ in range(i + 2):
            k += 1
            edges.append((f"g{k}", i, i - 1))
            bundle.append(f"g{k}")
        bundles.append(bundle)
    return MultigraphInstance(n, tuple(edges)), Allocation(tuple(bundles), distinguished=0)
