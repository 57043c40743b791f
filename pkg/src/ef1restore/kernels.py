"""Bitmask envy kernels.

Allocations are handled as ``(K, n)`` int64 arrays of bundle bitmasks, bit ``t``
standing for the ``t``-th item of the instance.  The only hot operation in the
package is :func:`envy_tensor`, which evaluates every pairwise envy amount for a
batch of allocations.  Two implementations exist:

* ``numba``: scalar loops compiled with ``@njit``;
* ``numpy``: vectorised over the batch, the agents and the removed item.

The backend is chosen by the ``EF1RESTORE_BACKEND`` environment variable
(``numba`` or ``numpy``).  Without it numba is used when importable.
"""

from __future__ import annotations

import os
from typing import NamedTuple

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

MAX_ITEMS = 62

ADDITIVE = 0
GENERATORS = 1
TABLE = 2

GOODS = 0
CHORES = 1
MIXED = 2
EFX = 3

_BIG = np.int64(1) << np.int64(60)


class CompiledValuations(NamedTuple):
    """Array form of one valuation per agent.

    ``kinds[i]`` selects which of ``add``, ``gens`` or ``table`` row ``i`` is
    read.  Unused arrays are kept at minimal size.
    """

    kinds: np.ndarray  # (n,) int64
    add: np.ndarray  # (n, m) int64
    gens: np.ndarray  # (n, G) int64 bitmasks
    gcount: np.ndarray  # (n,) int64
    table: np.ndarray  # (n, 2**m) int64, or (n, 1)
    m: int


# --------------------------------------------------------------------------
# numpy path


def _values_np(cv: CompiledValuations, agent: int, masks: np.ndarray) -> np.ndarray:
    kind = cv.kinds[agent]
    if kind == ADDITIVE:
        if cv.m == 0:
            return np.zeros(masks.shape, dtype=np.int64)
        bits = (masks[..., None] >> np.arange(cv.m, dtype=np.int64)) & 1
        return bits @ cv.add[agent]
    if kind == GENERATORS:
        g = cv.gens[agent, : cv.gcount[agent]]
        if g.size == 0:
            return np.zeros(masks.shape, dtype=np.int64)
        return ((masks[..., None] & g) == g).any(axis=-1).astype(np.int64)
    return cv.table[agent][masks]


def _masked_reduce(cand: np.ndarray, present: np.ndarray, fallback: np.ndarray, use_max: bool):
    if use_max:
        red = np.where(present, cand, -_BIG).max(axis=-1, initial=-_BIG)
    else:
        red = np.where(present, cand, _BIG).min(axis=-1, initial=_BIG)
    return np.where(present.any(axis=-1), red, fallback)


def envy_tensor_numpy(cv: CompiledValuations, bundles: np.ndarray, mode: int) -> np.ndarray:
    bundles = np.asarray(bundles, dtype=np.int64)
    K, n = bundles.shape
    m = cv.m
    out = np.zeros((K, n, n), dtype=np.int64)
    bits = np.left_shift(np.int64(1), np.arange(m, dtype=np.int64))
    # removal of each item from each bundle: (K, n, m)
    removed = bundles[:, :, None] & ~bits
    present = (bundles[:, :, None] & bits) != 0
    for i in range(n):
        own = _values_np(cv, i, bundles[:, i])  # (K,)
        vj = _values_np(cv, i, bundles)  # (K, n)
        plain = vj - own[:, None]
        if mode == GOODS or mode == EFX:
            cand = _values_np(cv, i, removed) - own[:, None, None]
            res = _masked_reduce(cand, present, plain, mode == EFX)
        elif mode == CHORES:
            own_rm = _values_np(cv, i, removed[:, i, :])  # (K, m)
            cand = vj[:, :, None] - own_rm[:, None, :]
            pres = np.broadcast_to(present[:, i, None, :], cand.shape)
            res = _masked_reduce(cand, pres, plain, False)
        else:
            single = cv.add[i]
            own_rm = _values_np(cv, i, removed[:, i, :])
            chore_cand = vj[:, :, None] - own_rm[:, None, :]
            chore_pres = np.broadcast_to((present[:, i, :] & (single < 0))[:, None, :], chore_cand.shape)
            good_cand = _values_np(cv, i, removed) - own[:, None, None]
            good_pres = present & (single > 0)
            cand = np.concatenate([chore_cand, good_cand], axis=-1)
            pres = np.concatenate([chore_pres, good_pres], axis=-1)
            res = _masked_reduce(cand, pres, plain, False)
        out[:, i, :] = res
        out[:, i, i] = 0
    return out


def value_matrix_numpy(cv: CompiledValuations, bundles: np.ndarray) -> np.ndarray:
    bundles = np.asarray(bundles, dtype=np.int64)
    K, n = bundles.shape
    out = np.empty((K, n, n), dtype=np.int64)
    for i in range(n):
        out[:, i, :] = _values_np(cv, i, bundles)
    return out


# --------------------------------------------------------------------------
# numba path

if numba is not None:

    @numba.njit(cache=True)
    def _value_nb(kinds, add, gens, gcount, table, agent, mask):
        kind = kinds[agent]
        if kind == 0:
            s = 0
            t = 0
            mm = mask
            while mm != 0:
                if mm & 1:
                    s += add[agent, t]
                mm >>= 1
                t += 1
            return s
        if kind == 1:
            for k in range(gcount[agent]):
                g = gens[agent, k]
                if mask & g == g:
                    return 1
            return 0
        return table[agent, mask]

    @numba.njit(cache=True)
    def _envy_tensor_nb(kinds, add, gens, gcount, table, m, bundles, mode):
        K, n = bundles.shape
        out = np.zeros((K, n, n), dtype=np.int64)
        big = np.int64(1) << np.int64(60)
        for k in range(K):
            for i in range(n):
                own_mask = bundles[k, i]
                own = _value_nb(kinds, add, gens, gcount, table, i, own_mask)
                for j in range(n):
                    if i == j:
                        continue
                    jm = bundles[k, j]
                    vj = _value_nb(kinds, add, gens, gcount, table, i, jm)
                    found = False
                    best = -big if mode == 3 else big
                    for t in range(m):
                        bit = np.int64(1) << np.int64(t)
                        if mode == 0 or mode == 3 or mode == 2:
                            take = jm & bit != 0
                            if mode == 2 and take:
                                take = add[i, t] > 0
                            if take:
                                c = _value_nb(kinds, add, gens, gcount, table, i, jm & ~bit) - own
                                found = True
                                if mode == 3:
                                    if c > best:
                                        best = c
                                elif c < best:
                                    best = c
                        if mode == 1 or mode == 2:
                            take = own_mask & bit != 0
                            if mode == 2 and take:
                                take = add[i, t] < 0
                            if take:
                                c = vj - _value_nb(kinds, add, gens, gcount, table, i, own_mask & ~bit)
                                found = True
                                if c < best:
                                    best = c
                    out[k, i, j] = best if found else vj - own
        return out

    @numba.njit(cache=True)
    def _value_matrix_nb(kinds, add, gens, gcount, table, bundles):
        K, n = bundles.shape
        out = np.empty((K, n, n), dtype=np.int64)
        for k in range(K):
            for i in range(n):
                for j in range(n):
                    out[k, i, j] = _value_nb(kinds, add, gens, gcount, table, i, bundles[k, j])
        return out


def envy_tensor_numba(cv: CompiledValuations, bundles: np.ndarray, mode: int) -> np.ndarray:
    bundles = np.ascontiguousarray(bundles, dtype=np.int64)
    return _envy_tensor_nb(cv.kinds, cv.add, cv.gens, cv.gcount, cv.table, cv.m, bundles, mode)


def value_matrix_numba(cv: CompiledValuations, bundles: np.ndarray) -> np.ndarray:
    bundles = np.ascontiguousarray(bundles, dtype=np.int64)
    return _value_matrix_nb(cv.kinds, cv.add, cv.gens, cv.gcount, cv.table, bundles)


# --------------------------------------------------------------------------
# dispatch

_BACKENDS = {
    "numpy": (envy_tensor_numpy, value_matrix_numpy),
}
if numba is not None:
    _BACKENDS["numba"] = (envy_tensor_numba, value_matrix_numba)

_backend = os.environ.get("EF1RESTORE_BACKEND", "numba" if numba is not None else "numpy").lower()
if _backend not in _BACKENDS:
    raise ImportError(f"EF1RESTORE_BACKEND={_backend!r}; expected one of {sorted(_BACKENDS)}")


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    """Switch the kernel implementation for the rest of the process."""
    global _backend
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_BACKENDS)}")
    _backend = name


def envy_tensor(cv: CompiledValuations, bundles: np.ndarray, mode: int) -> np.ndarray:
    """Envy amounts ``out[k, i, j]`` for every allocation ``k`` of a batch.

    ``mode`` is one of GOODS, CHORES, MIXED (EF1 amounts, positive iff EF1-envy)
    or EFX (positive iff EFX-envy).  A pair without any admissible removal gets
    the plain margin ``v_i(X_j) - v_i(X_i)``.  The diagonal is zero.
    """
    return _BACKENDS[_backend][0](cv, bundles, mode)


def value_matrix(cv: CompiledValuations, bundles: np.ndarray) -> np.ndarray:
    """``out[k, i, j] = v_i(X_j)`` for every allocation of a batch."""
    return _BACKENDS[_backend][1](cv, bundles)
