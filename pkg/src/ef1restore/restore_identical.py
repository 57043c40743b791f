"""Restoration for identical monotone valuations (goods and chores).

Both algorithms only ever hand items to the distinguished agent.  For goods the
donor is the agent whose bundle is worth most after dropping its best item; for
chores it is the agent whose bundle is worth least after dropping its worst
chore.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .core import (
    ENVY_MAX,
    Additive,
    Allocation,
    Instance,
    Mode,
    Operation,
    Transfer,
    Valuation,
    apply,
    envy_matrix,
    is_ef1,
    is_fair,
    is_near_fair,
    is_valid,
    sort_items,
    validate,
)
from .errors import InputError, UnsupportedModeError


@dataclass(frozen=True)
class RestorationTrace:
    steps: tuple[Operation, ...]
    initial: Allocation
    final: Allocation

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def allocations(self) -> list[Allocation]:
        """``initial`` followed by the allocation after every step."""
        out = [self.initial]
        for op in self.steps:
            out.append(apply(out[-1], op))
        return out


def check_trace(inst: Instance, trace: RestorationTrace, fairness: str = "ef1", granularity: str = ENVY_MAX) -> list[str]:
    """Replay ``trace`` and list every broken guarantee (empty when sound)."""
    problems = []
    try:
        states = trace.allocations()
    except InputError as exc:
        return [f"replay failed: {exc}"]
    if states[-1] != trace.final:
        problems.append("replay does not end at the recorded final allocation")
    for k, X in enumerate(states):
        if not is_near_fair(inst, X, fairness):
            problems.append(f"allocation after step {k} is not near-{fairness.upper()}")
    for k, op in enumerate(trace.steps):
        if not is_valid(inst, states[k], op, fairness, granularity):
            problems.append(f"step {k + 1} ({op}) is not valid")
    if not is_fair(inst, states[-1], fairness):
        problems.append(f"final allocation is not {fairness.upper()}")
    return problems


def _pick(v: Valuation, B: Iterable[str], better) -> str:
    B = sort_items(B)
    if not B:
        raise InputError("bundle is empty")
    best, best_val = None, None
    for g in B:
        val = v.value(x for x in B if x != g)
        if best is None or better(val, best_val):
            best, best_val = g, val
    return best


def best_item(v: Valuation, B: Iterable[str]) -> str:
    """The item whose removal leaves the least value (lowest id on ties)."""
    return _pick(v, B, lambda a, b: a < b)


def worst_chore(v: Valuation, B: Iterable[str]) -> str:
    """The chore whose removal leaves the most value (lowest id on ties)."""
    return _pick(v, B, lambda a, b: a > b)


def _require_identical(inst: Instance, mode: Mode) -> Valuation:
    if inst.mode is not mode:
        raise UnsupportedModeError(f"expected a {mode.value} instance, got {inst.mode.value}")
    v = inst.valuations[0]
    if any(w != v for w in inst.valuations[1:]):
        raise UnsupportedModeError("valuations are not identical")
    report = validate(inst)
    if not report.ok:
        check, message = report.first
        raise UnsupportedModeError(f"{check}: {message}")
    return v


def _run(inst: Instance, X: Allocation, mode: Mode, pick, envied) -> RestorationTrace:
    v = _require_identical(inst, mode)
    report = validate(inst, X)
    if not report.ok:
        raise InputError(str(report))
    if not is_near_fair(inst, X):
        raise InputError("start allocation is not near-EF1")
    d = X.distinguished
    cur = X
    steps: list[Operation] = []
    while envied(envy_matrix(inst, cur), d).any():
        if len(steps) > inst.m:
            raise RuntimeError("restoration did not terminate within m transfers")
        scores = []
        for k in range(inst.n):
            if k == d:
                continue
            B = cur.bundles[k]
            scores.append((v.value(B - {pick(v, B)}) if B else v.value(()), k))
        i = _pick_donor(scores, mode)
        op = Transfer(i, d, pick(v, cur.bundles[i]))
        steps.append(op)
        cur = apply(cur, op)
    return RestorationTrace(tuple(steps), X, cur)


def _pick_donor(scores: list[tuple[int, int]], mode: Mode) -> int:
    """Agent with the extreme score; the lowest index wins ties."""
    if mode is Mode.GOODS:
        top = max(s for s, _ in scores)
    else:
        top = min(s for s, _ in scores)
    return min(k for s, k in scores if s == top)


def restore_goods(inst: Instance, X: Allocation) -> RestorationTrace:
    """Give the distinguished agent best items until it envies nobody up to one item."""
    return _run(inst, X, Mode.GOODS, best_item, lambda E, d: E[d] > 0)


def restore_chores(inst: Instance, X: Allocation) -> RestorationTrace:
    """Give the distinguished agent worst chores until nobody envies it up to one chore."""
    return _run(inst, X, Mode.CHORES, worst_chore, lambda E, d: E[:, d] > 0)


def transfer_bound(n: int, m: int) -> int:
    """Worst-case transfers for unit goods with an empty distinguished bundle."""
    if n < 1 or m < 0:
        raise InputError("need n >= 1 and m >= 0")
    if n == 1:
        return 0
    return max(0, math.ceil((m - n + 1) / n))


@dataclass(frozen=True)
class TightInstance:
    instance: Instance
    allocation: Allocation
    already_ef1: bool

    def __iter__(self) -> Iterator:
        return iter((self.instance, self.allocation))


def gen_tight_identical(n: int, m: int) -> TightInstance:
    """Unit goods; agent 0 holds nothing, the others split ``m`` items evenly.

    The first agents receive the surplus items when ``n - 1`` does not divide
    ``m``.  ``already_ef1`` flags outputs with nothing to restore.
    """
    if n < 2 or m < n - 1:
        raise InputError("need n >= 2 and m >= n - 1")
    items = [f"g{k}" for k in range(1, m + 1)]
    values = {g: 1 for g in items}
    inst = Instance.with_identical(Mode.GOODS, items, Additive(values), n)
    base, extra = divmod(m, n - 1)
    bundles: list[list[str]] = [[]]
    start = 0
    for k in range(n - 1):
        size = base + (1 if k < extra else 0)
        bundles.append(items[start : start + size])
        start += size
    X = Allocation(tuple(bundles), distinguished=0)
    return TightInstance(inst, X, is_ef1(inst, X))
