"""Exact breadth-first decision procedure for restoration problems.

States are tuples of bundle bitmasks.  From each state every candidate transfer
(and exchange, if enabled) is materialised as a row of a candidate batch, the
envy tensor of the whole batch is computed in one kernel call, and the validity
predicate of :mod:`ef1restore.core` is evaluated on it.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import kernels
from .core import (
    ENVY_MAX,
    GRANULARITIES,
    Allocation,
    Exchange,
    Instance,
    Mode,
    Operation,
    Transfer,
    batch_valid,
    is_near_fair,
    kernel_mode,
    require_valid,
    sort_items,
)
from .errors import InputError

log = logging.getLogger(__name__)

TRANSFERS = "transfers"
TRANSFERS_AND_EXCHANGES = "transfers+exchanges"


class Verdict(str, Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    RESOURCE_LIMIT = "resource-limit"


@dataclass(frozen=True)
class SearchConfig:
    """Search options.

    ``orientation_only`` keeps only operations whose recipients value what they
    receive.  ``granularity`` is passed to the validity predicate.
    ``require_valid=False`` drops the validity predicate entirely and searches
    over arbitrary moves (used for brute-force lower bounds).
    """

    ops: str = TRANSFERS
    max_states: int = 5_000_000
    max_depth: Optional[int] = None
    fairness: str = "ef1"
    orientation_only: bool = False
    require_valid: bool = True
    granularity: str = ENVY_MAX

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise InputError(f"unknown envy granularity {self.granularity!r}")
        if self.ops not in (TRANSFERS, TRANSFERS_AND_EXCHANGES):
            raise InputError(f"unknown operation set {self.ops!r}")
        if self.max_states < 1:
            raise InputError("max_states must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise InputError("max_depth must be positive")

    @property
    def exchanges(self) -> bool:
        return self.ops == TRANSFERS_AND_EXCHANGES


@dataclass
class SearchResult:
    verdict: Verdict
    states_explored: int
    trace: Optional[list[Operation]] = None
    visited: list[tuple[int, ...]] = field(default_factory=list, repr=False)

    @property
    def reachable(self) -> bool:
        return self.verdict is Verdict.REACHABLE


def canonical_key(X: Allocation) -> tuple[tuple[str, ...], ...]:
    """Per-agent sorted item ids; equal iff the allocations are equal."""
    return tuple(tuple(sort_items(b)) for b in X.bundles)


# op codes: (kind, a, b, t_a, t_b); kind 0 = transfer a->b of item t_a,
# kind 1 = exchange of t_a (held by a) with t_b (held by b)


def _candidates(masks: np.ndarray, m: int, exchanges: bool, recipient_ok: Optional[np.ndarray]):
    n = masks.shape[0]
    held = [[t for t in range(m) if int(masks[i]) >> t & 1] for i in range(n)]
    codes: list[tuple[int, int, int, int, int]] = []
    for s in range(n):
        for r in range(n):
            if r == s:
                continue
            for t in held[s]:
                if recipient_ok is None or recipient_ok[r, t]:
                    codes.append((0, s, r, t, -1))
    if exchanges:
        for i in range(n):
            for j in range(i + 1, n):
                for ti in held[i]:
                    if recipient_ok is not None and not recipient_ok[j, ti]:
                        continue
                    for tj in held[j]:
                        if recipient_ok is None or recipient_ok[i, tj]:
                            codes.append((1, i, j, ti, tj))
    if not codes:
        return np.zeros((0, 5), dtype=np.int64), np.zeros((0, n), dtype=np.int64)
    C = np.array(codes, dtype=np.int64)
    Y = np.repeat(masks[None, :], len(C), axis=0)
    rows = np.arange(len(C))
    one = np.int64(1)
    bit_a = np.left_shift(one, C[:, 3])
    bit_b = np.where(C[:, 4] >= 0, np.left_shift(one, np.maximum(C[:, 4], 0)), 0)
    moved = bit_a | bit_b
    Y[rows, C[:, 1]] ^= moved
    Y[rows, C[:, 2]] ^= moved
    return C, Y


def _to_operation(inst: Instance, code) -> Operation:
    kind, a, b, ta, tb = (int(x) for x in code)
    if kind == 0:
        return Transfer(a, b, inst.items[ta])
    return Exchange(a, b, inst.items[ta], inst.items[tb])


class _Expander:
    """Successor generation shared by :func:`enumerate_valid_ops` and the search."""

    def __init__(self, inst: Instance, config: SearchConfig, distinguished: int):
        self.inst = inst
        self.config = config
        self.d = distinguished
        self.mode = kernel_mode(inst, config.fairness)
        self.chores = config.fairness == "ef1" and inst.mode is Mode.CHORES
        self.cv = inst.compiled
        self.recipient_ok = None
        if config.orientation_only:
            self.recipient_ok = np.array(
                [[inst.value(i, [g]) > 0 for g in inst.items] for i in range(inst.n)], dtype=bool
            ).reshape(inst.n, inst.m)

    def expand(self, masks: np.ndarray):
        """Return (codes, successor masks, successor envy tensors) of allowed moves."""
        C, Y = _candidates(masks, self.inst.m, self.config.exchanges, self.recipient_ok)
        E = kernels.envy_tensor(self.cv, np.concatenate([masks[None, :], Y]), self.mode)
        if self.config.require_valid and len(C):
            keep = batch_valid(E[0], E[1:], self.d, self.chores, self.config.granularity)
            return C[keep], Y[keep], E[1:][keep]
        return C, Y, E[1:]


def enumerate_valid_ops(inst: Instance, X: Allocation, config: SearchConfig = SearchConfig()) -> list[Operation]:
    """All allowed operations from ``X``: transfers ordered by (source, target, item),
    then exchanges ordered by (i, j, item_i, item_j) with ``i < j``."""
    require_valid(inst, X)
    C, _, _ = _Expander(inst, config, X.distinguished).expand(inst.masks(X))
    return [_to_operation(inst, c) for c in C]


def decide_restoration(inst: Instance, X: Allocation, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Breadth-first search from ``X`` to any fair allocation.

    A reachable verdict carries a shortest trace.  ``unreachable`` is only
    returned when the reachable set was exhausted within the budgets.
    """
    require_valid(inst, X)
    if not is_near_fair(inst, X, config.fairness):
        raise InputError(f"start allocation is not near-{config.fairness.upper()}")
    exp = _Expander(inst, config, X.distinguished)
    start = inst.masks(X)
    start_key = tuple(int(x) for x in start)
    E0 = kernels.envy_tensor(exp.cv, start[None, :], exp.mode)[0]
    parents: dict[tuple[int, ...], tuple[Optional[tuple[int, ...]], Optional[np.ndarray]]] = {start_key: (None, None)}
    if (E0 <= 0).all():
        return SearchResult(Verdict.REACHABLE, 1, [], [start_key])

    def trace_to(key):
        ops = []
        while parents[key][0] is not None:
            prev, code = parents[key]
            ops.append(_to_operation(inst, code))
            key = prev
        return ops[::-1]

    queue = deque([(start_key, 0)])
    explored = 0
    truncated = False
    while queue:
        key, depth = queue.popleft()
        if config.max_depth is not None and depth >= config.max_depth:
            truncated = True
            continue
        explored += 1
        C, Y, E = exp.expand(np.array(key, dtype=np.int64))
        fair = (E <= 0).all(axis=(1, 2))
        for k in range(len(C)):
            child = tuple(int(x) for x in Y[k])
            if child in parents:
                continue
            parents[child] = (key, C[k])
            if fair[k]:
                return SearchResult(Verdict.REACHABLE, explored, trace_to(child), list(parents))
            if len(parents) > config.max_states:
                log.info("state budget %d exhausted after %d expansions", config.max_states, explored)
                return SearchResult(Verdict.RESOURCE_LIMIT, explored, None, list(parents))
            queue.append((child, depth + 1))
    verdict = Verdict.RESOURCE_LIMIT if truncated else Verdict.UNREACHABLE
    return SearchResult(verdict, explored, None, list(parents))
