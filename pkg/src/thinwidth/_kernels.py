"""Hot integer kernels.

Each kernel has a numba ``@njit`` version and a plain numpy/python version
with identical semantics.  The numba path is used when numba imports and
``THINWIDTH_DISABLE_NUMBA`` is unset (or ``0``).  Kinds are encoded as int8,
``+1`` for a minimum and ``-1`` for a maximum, so a level count is
``start + 2 * cumsum(kinds)``.
"""

import os

import numpy as np

_DISABLED = os.environ.get("THINWIDTH_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by THINWIDTH_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# pure numpy reference path
# ---------------------------------------------------------------------------


def _py_levels(kinds, start):
    """Running strand count after every event (length == len(kinds))."""
    return start + 2 * np.cumsum(kinds.astype(np.int64))


def _py_width(kinds, start):
    n = kinds.shape[0]
    if n < 2:
        return 0
    return int(_py_levels(kinds, start)[:-1].sum())


def _py_min_level(kinds, start):
    if kinds.shape[0] == 0:
        return start
    return int(min(start, _py_levels(kinds, start).min()))


def _py_transposition_deltas(kinds, start, lo, mid, hi):
    # Move run [lo, mid) above run [mid, hi) by adjacent swaps.  The left run
    # is carried upward element by element, top element first.  After each
    # swap only the level between the swapped pair changes; it is recomputed
    # from the running prefix count.
    work = kinds.astype(np.int64).copy()
    levels = start + 2 * np.cumsum(work)
    out = np.empty((mid - lo) * (hi - mid), dtype=np.int64)
    k = 0
    for a in range(mid - 1, lo - 1, -1):
        pos = a
        for _ in range(hi - mid):
            below = start if pos == 0 else levels[pos - 1]
            old = levels[pos]
            work[pos], work[pos + 1] = work[pos + 1], work[pos]
            new = below + 2 * work[pos]
            levels[pos] = new
            out[k] = new - old
            k += 1
            pos += 1
        hi -= 1
        mid -= 1
    return out


def _py_min_width_dp(kinds, start, pred_mask, floor=0):
    """Minimum width over orderings of ``kinds`` that respect ``pred_mask``.

    ``pred_mask[i]`` is the bitmask of events that must be placed below
    event ``i``.  Interior levels must carry at least ``floor`` strands.
    Returns -1 when no legal ordering exists.
    """
    n = kinds.shape[0]
    full = (1 << n) - 1
    inf = np.iinfo(np.int64).max // 4
    best = np.full(1 << n, inf, dtype=np.int64)
    best[0] = 0
    for state in range(1 << n):
        cur = best[state]
        if cur >= inf:
            continue
        count = start
        for i in range(n):
            if state >> i & 1:
                count += 2 * kinds[i]
        for i in range(n):
            if state >> i & 1:
                continue
            if pred_mask[i] & ~state:
                continue
            nxt = count + 2 * kinds[i]
            nstate = state | (1 << i)
            if nxt < 0 or (nstate != full and nxt < floor):
                continue
            cost = cur if nstate == full else cur + nxt
            if cost < best[nstate]:
                best[nstate] = cost
    return -1 if best[full] >= inf else int(best[full])


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_width(kinds, start):
        n = kinds.shape[0]
        total = 0
        count = start
        for i in range(n - 1):
            count += 2 * kinds[i]
            total += count
        return total

    @njit(cache=True)
    def _nb_min_level(kinds, start):
        count = start
        low = start
        for i in range(kinds.shape[0]):
            count += 2 * kinds[i]
            if count < low:
                low = count
        return low

    @njit(cache=True)
    def _nb_transposition_deltas(kinds, start, lo, mid, hi):
        n = kinds.shape[0]
        work = np.empty(n, dtype=np.int64)
        levels = np.empty(n, dtype=np.int64)
        count = start
        for i in range(n):
            work[i] = kinds[i]
            count += 2 * kinds[i]
            levels[i] = count
        out = np.empty((mid - lo) * (hi - mid), dtype=np.int64)
        k = 0
        for a in range(mid - 1, lo - 1, -1):
            pos = a
            for _ in range(hi - mid):
                below = start if pos == 0 else levels[pos - 1]
                old = levels[pos]
                tmp = work[pos]
                work[pos] = work[pos + 1]
                work[pos + 1] = tmp
                new = below + 2 * work[pos]
                levels[pos] = new
                out[k] = new - old
                k += 1
                pos += 1
            hi -= 1
            mid -= 1
        return out

    @njit(cache=True)
    def _nb_min_width_dp(kinds, start, pred_mask, floor=0):
        n = kinds.shape[0]
        full = (1 << n) - 1
        inf = np.iinfo(np.int64).max // 4
        best = np.full(1 << n, inf, dtype=np.int64)
        best[0] = 0
        for state in range(1 << n):
            cur = best[state]
            if cur >= inf:
                continue
            count = start
            for i in range(n):
                if (state >> i) & 1:
                    count += 2 * kinds[i]
            for i in range(n):
                if (state >> i) & 1:
                    continue
                if pred_mask[i] & ~state:
                    continue
                nxt = count + 2 * kinds[i]
                nstate = state | (1 << i)
                if nxt < 0 or (nstate != full and nxt < floor):
                    continue
                cost = cur if nstate == full else cur + nxt
                if cost < best[nstate]:
                    best[nstate] = cost
        if best[full] >= inf:
            return -1
        return best[full]


def _as_i8(kinds):
    return np.ascontiguousarray(kinds, dtype=np.int8)


def width(kinds, start=0):
    """Sum of the interior regular-level counts."""
    kinds = _as_i8(kinds)
    if HAVE_NUMBA:
        return int(_nb_width(kinds, int(start)))
    return _py_width(kinds, int(start))


def min_level(kinds, start=0):
    kinds = _as_i8(kinds)
    if HAVE_NUMBA:
        return int(_nb_min_level(kinds, int(start)))
    return _py_min_level(kinds, int(start))


def levels(kinds, start=0):
    return _py_levels(_as_i8(kinds), int(start))


def transposition_deltas(kinds, start, lo, mid, hi):
    """Per-swap width deltas for carrying run ``[lo, mid)`` above ``[mid, hi)``."""
    kinds = _as_i8(kinds)
    if HAVE_NUMBA:
        return _nb_transposition_deltas(kinds, int(start), int(lo), int(mid), int(hi))
    return _py_transposition_deltas(kinds, int(start), int(lo), int(mid), int(hi))


def min_width_dp(kinds, start, pred_mask, floor=0):
    kinds = _as_i8(kinds)
    pred_mask = np.ascontiguousarray(pred_mask, dtype=np.int64)
    if HAVE_NUMBA:
        return int(_nb_min_width_dp(kinds, int(start), pred_mask, int(floor)))
    return _py_min_width_dp(kinds, int(start), pred_mask, int(floor))


# both paths, for tests and the benchmark
PY_KERNELS = {
    "width": _py_width,
    "min_level": _py_min_level,
    "transposition_deltas": _py_transposition_deltas,
    "min_width_dp": _py_min_width_dp,
}
NB_KERNELS = (
    {
        "width": _nb_width,
        "min_level": _nb_min_level,
        "transposition_deltas": _nb_transposition_deltas,
        "min_width_dp": _nb_min_width_dp,
    }
    if HAVE_NUMBA
    else {}
)
