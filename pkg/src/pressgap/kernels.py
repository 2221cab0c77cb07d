"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the environment variable
``PRESSGAP_BACKEND``:

* ``numba`` -- require the jitted kernels (raises if numba is missing),
* ``numpy`` -- force the vectorized pure-numpy implementations,
* anything else / unset -- use numba when importable, numpy otherwise.

Both paths implement identical selection semantics (same candidate order,
same comparisons), so results are bit-for-bit interchangeable; the numba
path only changes speed.  ``set_backend`` exists for tests and benchmarks.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("PRESSGAP_BACKEND", "auto").lower()
if _requested == "numba" and not HAVE_NUMBA:  # pragma: no cover
    raise ImportError("PRESSGAP_BACKEND=numba but numba is not importable")
_BACKEND = "numpy" if _requested == "numpy" or not HAVE_NUMBA else "numba"


def backend():
    return _BACKEND


def set_backend(name):
    """Switch kernel backend at runtime ('numba' or 'numpy')."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable")
    _BACKEND = name


# ---------------------------------------------------------------------------
# greedy (n, eps)-separated selection
#
# Candidates are orbit rows (one point per row, one column per time step,
# all values reduced to [0, 1)).  Processing follows `order`; a candidate is
# kept iff its Bowen distance to every previously kept candidate is >= eps.
# ---------------------------------------------------------------------------

def _greedy_separated_numpy(orbits, order, eps):
    n_cand = orbits.shape[0]
    keep = np.zeros(n_cand, dtype=bool)
    # alive[i] == True while i is >= eps away from every kept candidate
    alive = np.ones(n_cand, dtype=bool)
    for idx in order:
        if not alive[idx]:
            continue
        keep[idx] = True
        cand = np.flatnonzero(alive)
        d = np.abs(orbits[cand] - orbits[idx])
        d = np.minimum(d, 1.0 - d)
        alive[cand[d.max(axis=1) < eps]] = False
    return keep


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _greedy_separated_numba(orbits, order, eps):  # pragma: no cover - jitted
        n_cand, n_steps = orbits.shape
        keep = np.zeros(n_cand, dtype=np.bool_)
        sel = np.empty(n_cand, dtype=np.int64)
        n_sel = 0
        for oi in range(n_cand):
            i = order[oi]
            ok = True
            for sj in range(n_sel):
                j = sel[sj]
                dmax = 0.0
                for k in range(n_steps):
                    d = abs(orbits[i, k] - orbits[j, k])
                    if d > 0.5:
                        d = 1.0 - d
                    if d > dmax:
                        dmax = d
                        if dmax >= eps:
                            break
                if dmax < eps:
                    ok = False
                    break
            if ok:
                keep[i] = True
                sel[n_sel] = i
                n_sel += 1
        return keep


def greedy_separated(orbits, order, eps):
    """Boolean keep-mask of the greedy maximal (n, eps)-separated subset."""
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    order = np.ascontiguousarray(order, dtype=np.int64)
    if _BACKEND == "numba":
        return _greedy_separated_numba(orbits, order, float(eps))
    return _greedy_separated_numpy(orbits, order, float(eps))


# ---------------------------------------------------------------------------
# pairwise Bowen distance matrix (small candidate pools only)
# ---------------------------------------------------------------------------

def _pairwise_bowen_numpy(orbits):
    n = orbits.shape[0]
    out = np.empty((n, n))
    # row blocks keep the broadcast temporaries modest
    block = max(1, (1 << 22) // max(1, n * orbits.shape[1]))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        d = np.abs(orbits[lo:hi, None, :] - orbits[None, :, :])
        d = np.minimum(d, 1.0 - d)
        out[lo:hi] = d.max(axis=2)
    return out


if HAVE_NUMBA:

    @numba.njit(cache=True, parallel=True)
    def _pairwise_bowen_numba(orbits):  # pragma: no cover - jitted
        n, n_steps = orbits.shape
        out = np.zeros((n, n))
        for i in numba.prange(n):
            for j in range(i + 1, n):
                dmax = 0.0
                for k in range(n_steps):
                    d = abs(orbits[i, k] - orbits[j, k])
                    if d > 0.5:
                        d = 1.0 - d
                    if d > dmax:
                        dmax = d
                out[i, j] = dmax
                out[j, i] = dmax
        return out


def pairwise_bowen(orbits):
    """Full matrix of Bowen distances between orbit rows."""
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    if _BACKEND == "numba":
        return _pairwise_bowen_numba(orbits)
    return _pairwise_bowen_numpy(orbits)


def min_bowen_distance(orbits):
    """Smallest pairwise Bowen distance among orbit rows (inf for < 2 rows)."""
    if orbits.shape[0] < 2:
        return np.inf
    d = pairwise_bowen(orbits)
    np.fill_diagonal(d, np.inf)
    return float(d.min())
