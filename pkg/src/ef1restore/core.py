"""Instances, allocations, envy amounts and the validity of single operations.

Agents are 0-based.  Every allocation carries a *distinguished* agent: the
unhappy agent for goods and mixed manna, the EF1-envied agent for chores.
Values are exact integers throughout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from . import kernels
from .errors import InputError, UnsupportedModeError, ValidationError

MAX_TABLE_ITEMS = 24


class Mode(str, Enum):
    GOODS = "goods"
    CHORES = "chores"
    MIXED = "mixed"


FAIRNESS = ("ef1", "efx")


def natural_key(item: str):
    """Sort key under which ``g2`` precedes ``g10``."""
    return tuple((0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.split(r"(\d+)", item) if t)


def sort_items(items: Iterable[str]) -> list[str]:
    return sorted(items, key=natural_key)


# --------------------------------------------------------------------------
# valuations


@dataclass(frozen=True)
class Additive:
    """``v(S) = sum of per-item values``; every valued item must be listed."""

    values: Mapping[str, int]

    def value(self, items: Iterable[str]) -> int:
        total = 0
        for g in items:
            try:
                total += self.values[g]
            except KeyError:
                raise InputError(f"unknown item {g!r}") from None
        return total

    def referenced_items(self) -> set[str]:
        return set(self.values)


@dataclass(frozen=True)
class Generators:
    """Binary monotone valuation: 1 iff the bundle contains some generator set."""

    sets: tuple[frozenset[str], ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))

    def value(self, items: Iterable[str]) -> int:
        bundle = set(items)
        return int(any(g <= bundle for g in self.sets))

    def referenced_items(self) -> set[str]:
        return set().union(*self.sets) if self.sets else set()


@dataclass(frozen=True)
class Table:
    """Explicit value for every subset of ``items``.

    ``entries[mask]`` is the value of the subset whose bit ``t`` marks
    ``items[t]``; ``None`` marks a missing entry.
    """

    items: tuple[str, ...]
    entries: tuple[int | None, ...]

    @classmethod
    def from_mapping(cls, items: Sequence[str], mapping: Mapping[frozenset, int]) -> "Table":
        items = tuple(items)
        index = {g: t for t, g in enumerate(items)}
        entries: list[int | None] = [None] * (1 << len(items))
        for subset, val in mapping.items():
            mask = 0
            for g in subset:
                if g not in index:
                    raise InputError(f"unknown item {g!r} in table entry")
                mask |= 1 << index[g]
            entries[mask] = int(val)
        return cls(items, tuple(entries))

    def mask_of(self, items: Iterable[str]) -> int:
        mask = 0
        for g in items:
            try:
                mask |= 1 << self.items.index(g)
            except ValueError:
                raise InputError(f"unknown item {g!r}") from None
        return mask

    def value(self, items: Iterable[str]) -> int:
        mask = self.mask_of(items)
        if mask >= len(self.entries) or self.entries[mask] is None:
            raise ValidationError(f"table has no entry for subset {sorted(items, key=natural_key)}")
        return self.entries[mask]

    def referenced_items(self) -> set[str]:
        return set(self.items)


@dataclass(frozen=True)
class Graphical:
    """Binary additive graphical valuation of ``agent``.

    ``edges`` lists ``(item, a, b)``: the item is an edge between agents ``a``
    and ``b`` and is worth 1 to each endpoint, 0 to everybody else.  ``b`` may
    be ``None`` for a pendant item that only ``a`` values.
    """

    agent: int
    edges: tuple[tuple[str, int, int | None], ...]

    def __post_init__(self):
        edges = tuple((str(g), int(a), None if b is None else int(b)) for g, a, b in self.edges)
        object.__setattr__(self, "edges", edges)

    @cached_property
    def _weights(self) -> dict[str, int]:
        return {g: int(self.agent in (a, b)) for g, a, b in self.edges}

    def value(self, items: Iterable[str]) -> int:
        total = 0
        for g in items:
            try:
                total += self._weights[g]
            except KeyError:
                raise InputError(f"unknown item {g!r}") from None
        return total

    def referenced_items(self) -> set[str]:
        return {g for g, _, _ in self.edges}


Valuation = Union[Additive, Generators, Table, Graphical]


def value(v: Valuation, items: Iterable[str]) -> int:
    """Value of a bundle under ``v``; the empty bundle is worth 0 unless a table says otherwise."""
    return v.value(items)


# --------------------------------------------------------------------------
# instances and allocations


@dataclass(frozen=True)
class Instance:
    """A fair division instance.

    ``valuations`` holds one valuation per agent.  When ``identical`` is set the
    same object is shared by all agents and only one is serialised.
    """

    mode: Mode
    items: tuple[str, ...]
    valuations: tuple[Valuation, ...]
    identical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "items", tuple(sort_items(self.items)))
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if not self.valuations:
            raise InputError("an instance needs at least one agent")

    @classmethod
    def with_identical(cls, mode: Mode | str, items: Iterable[str], v: Valuation, n: int) -> "Instance":
        if n < 1:
            raise InputError("an instance needs at least one agent")
        return cls(Mode(mode), tuple(items), (v,) * n, identical=True)

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return len(self.items)

    @cached_property
    def index(self) -> dict[str, int]:
        return {g: t for t, g in enumerate(self.items)}

    def value(self, agent: int, items: Iterable[str]) -> int:
        items = list(items)
        for g in items:
            if g not in self.index:
                raise InputError(f"unknown item {g!r}")
        return self.valuations[agent].value(items)

    def mask(self, items: Iterable[str]) -> int:
        mask = 0
        for g in items:
            try:
                mask |= 1 << self.index[g]
            except KeyError:
                raise InputError(f"unknown item {g!r}") from None
        return mask

    def masks(self, X: "Allocation") -> np.ndarray:
        if len(X.bundles) != self.n:
            raise InputError(f"allocation has {len(X.bundles)} bundles for {self.n} agents")
        return np.array([self.mask(b) for b in X.bundles], dtype=np.int64)

    def items_of(self, mask: int) -> frozenset[str]:
        mask = int(mask)
        return frozenset(g for t, g in enumerate(self.items) if mask >> t & 1)

    def allocation_from_masks(self, masks: Sequence[int], distinguished: int) -> "Allocation":
        return Allocation(tuple(self.items_of(mk) for mk in masks), distinguished)

    @cached_property
    def compiled(self) -> kernels.CompiledValuations:
        return compile_valuations(self)

    @property
    def is_graphical(self) -> bool:
        return all(isinstance(v, Graphical) for v in self.valuations)


def compile_valuations(inst: Instance) -> kernels.CompiledValuations:
    n, m = inst.n, inst.m
    if m > kernels.MAX_ITEMS:
        raise UnsupportedModeError(f"at most {kernels.MAX_ITEMS} items are supported, got {m}")
    kinds = np.zeros(n, dtype=np.int64)
    add = np.zeros((n, m), dtype=np.int64)
    gen_rows: list[list[int]] = [[] for _ in range(n)]
    has_table = any(isinstance(v, Table) for v in inst.valuations)
    if has_table and m > MAX_TABLE_ITEMS:
        raise UnsupportedModeError(f"table valuations need m <= {MAX_TABLE_ITEMS}")
    table = np.zeros((n, (1 << m) if has_table else 1), dtype=np.int64)
    for i, v in enumerate(inst.valuations):
        if isinstance(v, (Additive, Graphical)):
            kinds[i] = kernels.ADDITIVE
            for t, g in enumerate(inst.items):
                add[i, t] = v.value([g])
        elif isinstance(v, Generators):
            kinds[i] = kernels.GENERATORS
            gen_rows[i] = [inst.mask(s) for s in v.sets]
        elif isinstance(v, Table):
            kinds[i] = kernels.TABLE
            order = [v.items.index(g) for g in inst.items]
            for mask in range(1 << m):
                tmask = 0
                for t in range(m):
                    if mask >> t & 1:
                        tmask |= 1 << order[t]
                entry = v.entries[tmask]
                if entry is None:
                    raise ValidationError("table valuation is missing entries")
                table[i, mask] = entry
        else:
            raise UnsupportedModeError(f"unknown valuation type {type(v).__name__}")
    width = max([1] + [len(r) for r in gen_rows])
    gens = np.zeros((n, width), dtype=np.int64)
    gcount = np.zeros(n, dtype=np.int64)
    for i, row in enumerate(gen_rows):
        gens[i, : len(row)] = row
        gcount[i] = len(row)
    return kernels.CompiledValuations(kinds, add, gens, gcount, table, m)


@dataclass(frozen=True)
class Allocation:
    bundles: tuple[frozenset[str], ...]
    distinguished: int = 0

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in self.bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def owner(self, item: str) -> int:
        for i, b in enumerate(self.bundles):
            if item in b:
                return i
        raise InputError(f"item {item!r} is not allocated")

    def sorted_bundles(self) -> list[list[str]]:
        return [sort_items(b) for b in self.bundles]


@dataclass(frozen=True)
class Transfer:
    source: int
    target: int
    item: str

    @property
    def agents(self) -> tuple[int, int]:
        return (self.source, self.target)

    @property
    def items(self) -> tuple[str]:
        return (self.item,)


@dataclass(frozen=True)
class Exchange:
    i: int
    j: int
    item_i: str
    item_j: str

    @property
    def agents(self) -> tuple[int, int]:
        return (self.i, self.j)

    @property
    def items(self) -> tuple[str, str]:
        return (self.item_i, self.item_j)


Operation = Union[Transfer, Exchange]


def reverse(op: Operation) -> Operation:
    if isinstance(op, Transfer):
        return Transfer(op.target, op.source, op.item)
    return Exchange(op.i, op.j, op.item_j, op.item_i)


def check_operation(X: Allocation, op: Operation) -> None:
    """Raise InputError unless ``op`` is well formed against ``X``."""
    n = X.n
    for a in op.agents:
        if not 0 <= a < n:
            raise InputError(f"agent {a} out of range")
    if isinstance(op, Transfer):
        if op.source == op.target:
            raise InputError("transfer needs two distinct agents")
        if op.item not in X.bundles[op.source]:
            raise InputError(f"item {op.item!r} is not in bundle {op.source}")
    elif isinstance(op, Exchange):
        if op.i == op.j:
            raise InputError("exchange needs two distinct agents")
        if op.item_i == op.item_j:
            raise InputError("exchange needs two distinct items")
        if op.item_i not in X.bundles[op.i]:
            raise InputError(f"item {op.item_i!r} is not in bundle {op.i}")
        if op.item_j not in X.bundles[op.j]:
            raise InputError(f"item {op.item_j!r} is not in bundle {op.j}")
    else:
        raise InputError(f"not an operation: {op!r}")


def apply(X: Allocation, op: Operation) -> Allocation:
    """Return the allocation after ``op``; ``X`` itself is left untouched."""
    check_operation(X, op)
    bundles = [set(b) for b in X.bundles]
    if isinstance(op, Transfer):
        bundles[op.source].remove(op.item)
        bundles[op.target].add(op.item)
    else:
        bundles[op.i].remove(op.item_i)
        bundles[op.j].remove(op.item_j)
        bundles[op.i].add(op.item_j)
        bundles[op.j].add(op.item_i)
    return Allocation(tuple(bundles), X.distinguished)


# --------------------------------------------------------------------------
# envy


def kernel_mode(inst: Instance, fairness: str = "ef1") -> int:
    if fairness == "efx":
        if inst.mode is not Mode.GOODS:
            raise UnsupportedModeError("EFX is only defined for goods")
        return kernels.EFX
    if fairness != "ef1":
        raise InputError(f"unknown fairness notion {fairness!r}")
    if inst.mode is Mode.MIXED and not all(isinstance(v, Additive) for v in inst.valuations):
        raise UnsupportedModeError("mixed manna requires additive valuations")
    return {Mode.GOODS: kernels.GOODS, Mode.CHORES: kernels.CHORES, Mode.MIXED: kernels.MIXED}[inst.mode]


def envy_matrix(inst: Instance, X: Allocation, fairness: str = "ef1") -> np.ndarray:
    """All pairwise envy amounts of ``X`` as an ``(n, n)`` array (zero diagonal)."""
    return kernels.envy_tensor(inst.compiled, inst.masks(X)[None, :], kernel_mode(inst, fairness))[0]


def _pair(inst: Instance, i: int, j: int, X: Allocation, mode: int) -> int:
    if i == j:
        raise InputError("envy amount needs two distinct agents")
    if not (0 <= i < inst.n and 0 <= j < inst.n):
        raise InputError("agent out of range")
    return int(kernels.envy_tensor(inst.compiled, inst.masks(X)[None, :], mode)[0, i, j])


def envy_amount_goods(inst: Instance, i: int, j: int, X: Allocation) -> int:
    """``min_{g in X_j} v_i(X_j - g) - v_i(X_i)``; positive iff ``i`` EF1-envies ``j``."""
    if inst.mode is not Mode.GOODS:
        raise UnsupportedModeError("goods envy amount on a non-goods instance")
    return _pair(inst, i, j, X, kernels.GOODS)


def envy_amount_chores(inst: Instance, i: int, j: int, X: Allocation) -> int:
    """``min_{c in X_i} v_i(X_j) - v_i(X_i - c)``; positive iff ``i`` EF1-envies ``j``."""
    if inst.mode is not Mode.CHORES:
        raise UnsupportedModeError("chores envy amount on a non-chores instance")
    return _pair(inst, i, j, X, kernels.CHORES)


def envy_amount_mixed(inst: Instance, i: int, j: int, X: Allocation) -> int:
    """Best single removal of a chore from ``X_i`` or a good from ``X_j``."""
    if not all(isinstance(v, Additive) for v in inst.valuations):
        raise UnsupportedModeError("mixed manna requires additive valuations")
    return _pair(inst, i, j, X, kernels.MIXED)


def envy_amount(inst: Instance, i: int, j: int, X: Allocation) -> int:
    """Mode-appropriate EF1 envy amount."""
    return _pair(inst, i, j, X, kernel_mode(inst))


def efx_envy_amount(inst: Instance, i: int, j: int, X: Allocation) -> int:
    """``max_{g in X_j} v_i(X_j - g) - v_i(X_i)``; positive iff ``i`` EFX-envies ``j``."""
    return _pair(inst, i, j, X, kernel_mode(inst, "efx"))


def efx_envy(inst: Instance, i: int, j: int, X: Allocation) -> bool:
    return efx_envy_amount(inst, i, j, X) > 0


def near_mask(E: np.ndarray, d: int, chores: bool) -> np.ndarray:
    """Near-fairness of a batch of envy tensors ``(K, n, n)``.

    Goods convention: nobody but ``d`` envies.  Chores convention: nobody but
    ``d`` is envied.
    """
    pos = E > 0
    if chores:
        pos = np.delete(pos, d, axis=2)
    else:
        pos = np.delete(pos, d, axis=1)
    return ~pos.any(axis=(1, 2))


ENVY_MAX = "max"
ENVY_PER_TARGET = "per-target"
GRANULARITIES = (ENVY_MAX, ENVY_PER_TARGET)


def monotone_mask(E0: np.ndarray, E: np.ndarray, d: int, chores: bool, granularity: str = ENVY_MAX) -> np.ndarray:
    """Whether the distinguished agent's envy did not grow, for a batch ``(K, n, n)``.

    Goods: the amounts of ``d`` towards the others.  Chores: the amounts of the
    others towards ``d``.  ``max`` compares the largest amount before and after;
    ``per-target`` compares every amount separately.
    """
    if chores:
        after, before = E[:, :, d], E0[:, d]
    else:
        after, before = E[:, d, :], E0[d, :]
    after = np.delete(after, d, axis=1)
    before = np.delete(before, d)
    if before.size == 0:
        return np.ones(len(E), dtype=bool)
    if granularity == ENVY_MAX:
        return after.max(axis=1) <= before.max()
    if granularity == ENVY_PER_TARGET:
        return (after <= before[None, :]).all(axis=1)
    raise InputError(f"unknown envy granularity {granularity!r}")


def _uses_chores_convention(inst: Instance, fairness: str) -> bool:
    return fairness == "ef1" and inst.mode is Mode.CHORES


def is_fair(inst: Instance, X: Allocation, fairness: str = "ef1") -> bool:
    return bool((envy_matrix(inst, X, fairness) <= 0).all())


def is_near_fair(inst: Instance, X: Allocation, fairness: str = "ef1") -> bool:
    E = envy_matrix(inst, X, fairness)
    return bool(near_mask(E[None], X.distinguished, _uses_chores_convention(inst, fairness))[0])


def is_ef1(inst: Instance, X: Allocation) -> bool:
    return is_fair(inst, X, "ef1")


def is_near_ef1(inst: Instance, X: Allocation) -> bool:
    return is_near_fair(inst, X, "ef1")


def is_efx(inst: Instance, X: Allocation) -> bool:
    return is_fair(inst, X, "efx")


def is_near_efx(inst: Instance, X: Allocation) -> bool:
    return is_near_fair(inst, X, "efx")


def is_valid(
    inst: Instance, X: Allocation, op: Operation, fairness: str = "ef1", granularity: str = ENVY_MAX
) -> bool:
    """Whether ``op`` keeps ``X`` near-fair without raising the distinguished agent's envy.

    The same predicate serves transfers and exchanges.  By default the largest
    envy amount of the distinguished agent must not grow; ``granularity=
    "per-target"`` demands it of every amount.
    """
    check_operation(X, op)
    Y = apply(X, op)
    mode = kernel_mode(inst, fairness)
    E = kernels.envy_tensor(inst.compiled, np.stack([inst.masks(X), inst.masks(Y)]), mode)
    chores = _uses_chores_convention(inst, fairness)
    return bool(batch_valid(E[0], E[1:], X.distinguished, chores, granularity)[0])


def batch_valid(E0: np.ndarray, E: np.ndarray, d: int, chores: bool, granularity: str = ENVY_MAX) -> np.ndarray:
    return near_mask(E, d, chores) & monotone_mask(E0, E, d, chores, granularity)


# --------------------------------------------------------------------------
# envy graph


@dataclass(frozen=True)
class EnvyGraph:
    n: int
    edges: frozenset[tuple[int, int]]

    def successors(self, i: int) -> list[int]:
        return sorted(j for a, j in self.edges if a == i)

    def predecessors(self, j: int) -> list[int]:
        return sorted(i for i, b in self.edges if b == j)

    def sinks(self) -> list[int]:
        sources = {i for i, _ in self.edges}
        return [i for i in range(self.n) if i not in sources]

    def is_acyclic(self) -> bool:
        indeg = [0] * self.n
        for _, j in self.edges:
            indeg[j] += 1
        stack = [i for i in range(self.n) if indeg[i] == 0]
        seen = 0
        while stack:
            i = stack.pop()
            seen += 1
            for j in self.successors(i):
                indeg[j] -= 1
                if indeg[j] == 0:
                    stack.append(j)
        return seen == self.n

    def distances_from(self, source: int) -> dict[int, int]:
        dist = {source: 0}
        frontier = [source]
        while frontier:
            nxt = []
            for i in frontier:
                for j in self.successors(i):
                    if j not in dist:
                        dist[j] = dist[i] + 1
                        nxt.append(j)
            frontier = nxt
        return dist


def envy_graph(inst: Instance, X: Allocation) -> EnvyGraph:
    """Edge ``i -> j`` iff ``v_i(X_i) < v_i(X_j)``."""
    V = kernels.value_matrix(inst.compiled, inst.masks(X)[None, :])[0]
    own = np.diag(V)
    edges = frozenset((i, j) for i in range(inst.n) for j in range(inst.n) if i != j and own[i] < V[i, j])
    return EnvyGraph(inst.n, edges)


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    @property
    def first(self) -> tuple[str, str] | None:
        return self.violations[0] if self.violations else None

    def add(self, check: str, message: str) -> None:
        self.violations.append((check, message))

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        check, message = self.violations[0]
        return f"fail: {check}: {message}"


def _check_table(report: ValidationReport, i: int, v: Table, mode: Mode) -> None:
    k = len(v.items)
    if k > MAX_TABLE_ITEMS:
        report.add("table", f"agent {i}: table over {k} items exceeds {MAX_TABLE_ITEMS}")
        return
    if len(set(v.items)) != k:
        report.add("table", f"agent {i}: table lists an item twice")
        return
    if len(v.entries) != 1 << k or any(e is None for e in v.entries):
        report.add("table", f"agent {i}: table is missing entries")
        return
    if v.entries[0] != 0:
        report.add("table", f"agent {i}: value of the empty set is {v.entries[0]}, not 0")
    decreasing = mode is Mode.CHORES
    for mask in range(1, 1 << k):
        for t in range(k):
            if mask >> t & 1:
                lo, hi = v.entries[mask & ~(1 << t)], v.entries[mask]
                if (hi < lo) if not decreasing else (hi > lo):
                    sub = sort_items(v.items[s] for s in range(k) if mask >> s & 1)
                    report.add("monotonicity", f"agent {i}: removing {v.items[t]!r} from {sub} changes value {hi} -> {lo}")
                    return


def validate(inst: Instance, X: Allocation | None = None) -> ValidationReport:
    """Check instance (and optionally allocation) invariants; never raises."""
    report = ValidationReport()
    items = set(inst.items)
    if len(items) != len(inst.items):
        report.add("items", "item ids are not unique")
    if inst.m > kernels.MAX_ITEMS:
        report.add("items", f"{inst.m} items exceed the supported {kernels.MAX_ITEMS}")
    if inst.identical and any(v != inst.valuations[0] for v in inst.valuations):
        report.add("valuations", "instance flagged identical but valuations differ")
    for i, v in enumerate(inst.valuations):
        extra = v.referenced_items() - items
        if extra:
            report.add("valuations", f"agent {i}: unknown items {sort_items(extra)}")
            continue
        if isinstance(v, Additive):
            missing = items - set(v.values)
            if missing:
                report.add("valuations", f"agent {i}: additive valuation misses items {sort_items(missing)}")
            vals = list(v.values.values())
            if inst.mode is Mode.GOODS and any(x < 0 for x in vals):
                report.add("mode", f"agent {i}: negative value in goods mode")
            if inst.mode is Mode.CHORES and any(x > 0 for x in vals):
                report.add("mode", f"agent {i}: positive value in chores mode")
        elif isinstance(v, Table):
            if inst.mode is Mode.MIXED:
                report.add("mode", f"agent {i}: mixed manna requires additive valuations")
            if set(v.items) != items:
                report.add("table", f"agent {i}: table does not range over the instance items")
            _check_table(report, i, v, inst.mode)
            if v.entries and all(e is not None for e in v.entries):
                if inst.mode is Mode.GOODS and min(v.entries) < 0:
                    report.add("mode", f"agent {i}: negative table value in goods mode")
                if inst.mode is Mode.CHORES and max(v.entries) > 0:
                    report.add("mode", f"agent {i}: positive table value in chores mode")
        elif isinstance(v, (Generators, Graphical)):
            if inst.mode is not Mode.GOODS:
                report.add("mode", f"agent {i}: {type(v).__name__.lower()} valuations are goods-only")
        if isinstance(v, Graphical):
            if v.agent != i:
                report.add("graphical", f"valuation of agent {i} is declared for agent {v.agent}")
            seen: set[str] = set()
            for g, a, b in v.edges:
                if a == b:
                    report.add("graphical", f"item {g!r} is a self-loop at agent {a}")
                if not 0 <= a < inst.n or (b is not None and not 0 <= b < inst.n):
                    report.add("graphical", f"item {g!r} has an endpoint outside the agents")
                if g in seen:
                    report.add("graphical", f"item {g!r} appears as two edges")
                seen.add(g)
    if report.ok:
        # graphical degree property: each item valued positively by at most two agents
        for g in inst.items:
            fans = [i for i in range(inst.n) if _single(inst, i, g) > 0]
            if inst.is_graphical and len(fans) > 2:
                report.add("graphical", f"item {g!r} is valued by agents {fans}")
    if X is not None:
        if len(X.bundles) != inst.n:
            report.add("partition", f"{len(X.bundles)} bundles for {inst.n} agents")
        owners: dict[str, int] = {}
        for i, b in enumerate(X.bundles):
            for g in b:
                if g not in items:
                    report.add("partition", f"bundle {i} holds unknown item {g!r}")
                elif g in owners:
                    report.add("partition", f"item {g!r} is in bundles {owners[g]} and {i}")
                else:
                    owners[g] = i
        missing = items - set(owners)
        if missing:
            report.add("partition", f"items {sort_items(missing)} are unallocated")
        if not 0 <= X.distinguished < inst.n:
            report.add("allocation", f"distinguished agent {X.distinguished} out of range")
    return report


def _single(inst: Instance, i: int, g: str) -> int:
    try:
        return inst.valuations[i].value([g])
    except (InputError, ValidationError):
        return 0


def require_valid(inst: Instance, X: Allocation | None = None) -> None:
    report = validate(inst, X)
    if not report.ok:
        check, message = report.first
        raise InputError(f"{check}: {message}")
