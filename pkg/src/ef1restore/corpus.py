"""Instances on which no valid operation exists: mixed manna EF1 and EFX for goods."""

from __future__ import annotations

from .core import Additive, Allocation, Instance, Mode, is_near_fair
from .errors import InputError
from .reachability import TRANSFERS_AND_EXCHANGES, SearchConfig, enumerate_valid_ops

MIXED_VALUES = {
    "g1": 3, "g2": -10, "g3": 10,
    **{f"g{k}": -1 for k in range(4, 10)},
    "g10": 6,
    **{f"g{k}": -1 for k in range(11, 16)},
    "g16": -2, "g17": -1,
}


def _ids(lo: int, hi: int) -> list[str]:
    return [f"g{k}" for k in range(lo, hi + 1)]


def gen_mixed_counterexample() -> tuple[Instance, Allocation]:
    """Four agents, seventeen items, identical additive mixed valuation."""
    inst = Instance.with_identical(Mode.MIXED, MIXED_VALUES, Additive(dict(MIXED_VALUES)), 4)
    X = Allocation((_ids(1, 2), _ids(3, 9), _ids(10, 15), _ids(16, 17)), distinguished=0)
    return inst, X


def gen_efx_family(n: int, m: int) -> tuple[Instance, Allocation]:
    """``m - n`` unit goods held by agent 0, ``n`` goods worth ``m - n + 1``.

    Agent 1 holds two of the expensive goods, every other agent one.
    """
    if n < 2 or m < n + 2:
        raise InputError("need n >= 2 and m >= n + 2")
    units = m - n
    values = {f"g{k}": 1 for k in range(1, units + 1)}
    values.update({f"g{k}": units + 1 for k in range(units + 1, m + 1)})
    inst = Instance.with_identical(Mode.GOODS, values, Additive(values), n)
    bundles = [_ids(1, units), _ids(units + 1, units + 2)]
    bundles += [[f"g{units + i}"] for i in range(3, n + 1)]
    return inst, Allocation(tuple(bundles), distinguished=0)


def gen_efx_counterexample() -> tuple[Instance, Allocation]:
    """Two agents: four unit goods against two goods of value 6."""
    values = {**{f"g{k}": 1 for k in range(1, 5)}, "g5": 6, "g6": 6}
    inst = Instance.with_identical(Mode.GOODS, values, Additive(values), 2)
    return inst, Allocation((_ids(1, 4), _ids(5, 6)), distinguished=0)


def assert_no_valid_ops(inst: Instance, X: Allocation, fairness: str = "ef1") -> bool:
    """True iff no transfer and no exchange from ``X`` is valid for ``fairness``."""
    if not is_near_fair(inst, X, fairness):
        raise InputError(f"allocation is not near-{fairness.upper()}")
    config = SearchConfig(ops=TRANSFERS_AND_EXCHANGES, fairness=fairness)
    return not enumerate_valid_ops(inst, X, config)
