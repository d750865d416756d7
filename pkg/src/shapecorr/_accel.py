"""Hot kernels with a numba path and a pure-numpy fallback.

Set ``SHAPECORR_DISABLE_NUMBA=1`` before import to force the numpy path.
Both paths perform the same floating point operations in the same order,
so their results are bit-identical.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_DISABLED = os.environ.get("SHAPECORR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


@contextmanager
def threads(workers: int):
    """Temporarily bound the numba thread pool; no-op on the numpy path."""
    if not HAVE_NUMBA:
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


# --------------------------------------------------------------------------
# descriptor projection: out[i, k] = sum_m weights[i, m] * response[m, k]


@njit(cache=True, parallel=True)
def _project_numba(weights, response, out):
    n, r = weights.shape
    k_len = response.shape[1]
    for i in prange(n):
        for k in range(k_len):
            out[i, k] = 0.0
        for m in range(r):
            w = weights[i, m]
            for k in range(k_len):
                out[i, k] = out[i, k] + w * response[m, k]


def _project_numpy(weights, response, out):
    out[...] = 0.0
    for m in range(weights.shape[1]):
        out += weights[:, m : m + 1] * response[m]


def project(weights: np.ndarray, response: np.ndarray, use_numba: bool | None = None,
            workers: int = 1) -> np.ndarray:
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    response = np.ascontiguousarray(response, dtype=np.float64)
    out = np.empty((weights.shape[0], response.shape[1]), dtype=np.float64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba:
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        with threads(workers):
            _project_numba(weights, response, out)
    else:
        _project_numpy(weights, response, out)
    return out


# --------------------------------------------------------------------------
# trapezoidal L1 nearest neighbour: sequential accumulation over samples,
# strict '<' scan over targets (lowest index wins ties)


@njit(cache=True, parallel=True)
def _match_numba(query, target, tau, best_idx, best_dist):
    nq, k_len = query.shape
    nt = target.shape[0]
    last = k_len - 1
    for i in prange(nq):
        bi = -1
        bd = np.inf
        for j in range(nt):
            s = 0.5 * abs(query[i, 0] - target[j, 0])
            for k in range(1, last):
                s = s + abs(query[i, k] - target[j, k])
            if last > 0:
                s = s + 0.5 * abs(query[i, last] - target[j, last])
            d = tau * s
            if d < bd:
                bd = d
                bi = j
        best_idx[i] = bi
        best_dist[i] = bd


def _match_block_numpy(query, target, tau, best_idx, best_dist, lo, hi, tile):
    k_len = query.shape[1]
    last = k_len - 1
    q = query[lo:hi]
    bd = np.full(hi - lo, np.inf)
    bi = np.full(hi - lo, -1, dtype=np.int64)
    for t0 in range(0, target.shape[0], tile):
        t = target[t0 : t0 + tile]
        s = 0.5 * np.abs(q[:, None, 0] - t[None, :, 0])
        for k in range(1, last):
            s = s + np.abs(q[:, None, k] - t[None, :, k])
        if last > 0:
            s = s + 0.5 * np.abs(q[:, None, last] - t[None, :, last])
        d = tau * s
        local = np.argmin(d, axis=1)
        ld = d[np.arange(d.shape[0]), local]
        better = ld < bd
        bd[better] = ld[better]
        bi[better] = local[better] + t0
    best_idx[lo:hi] = bi
    best_dist[lo:hi] = bd


def nearest_l1(
    query: np.ndarray,
    target: np.ndarray,
    tau: float,
    *,
    workers: int = 1,
    use_numba: bool | None = None,
    block: int = 32,
    tile: int = 2048,
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise argmin of the trapezoidal L1 distance from ``query`` to ``target``."""
    query = np.ascontiguousarray(query, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    nq = query.shape[0]
    best_idx = np.empty(nq, dtype=np.int64)
    best_dist = np.empty(nq, dtype=np.float64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba:
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        with threads(workers):
            _match_numba(query, target, float(tau), best_idx, best_dist)
        return best_idx, best_dist

    spans = [(lo, min(lo + block, nq)) for lo in range(0, nq, block)]
    if workers <= 1:
        for lo, hi in spans:
            _match_block_numpy(query, target, tau, best_idx, best_dist, lo, hi, tile)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(
                pool.map(
                    lambda span: _match_block_numpy(query, target, tau, best_idx, best_dist, *span, tile),
                    spans,
                )
            )
    return best_idx, best_dist
