"""Hot numeric kernels with numba and pure-numpy implementations.

Set ``GEEZOCR_DISABLE_NUMBA=1`` (or run without numba installed) to use
the numpy path. Both paths are always importable so they can be tested
and benchmarked against each other.
"""

from __future__ import annotations

import os

import numpy as np

OP_MATCH = 0
OP_SUB = 1
OP_DEL = 2
OP_INS = 3

_DISABLED = os.environ.get("GEEZOCR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - depends on environment
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


# ---------------------------------------------------------------------------
# Edit distance with backtrace
# ---------------------------------------------------------------------------

def _dp_matrix_numpy(ref: np.ndarray, hyp: np.ndarray) -> np.ndarray:
    n, m = len(ref), len(hyp)
    cols = np.arange(m + 1, dtype=np.int64)
    dist = np.empty((n + 1, m + 1), dtype=np.int64)
    dist[0] = cols
    for i in range(1, n + 1):
        prev = dist[i - 1]
        cand = np.empty(m + 1, dtype=np.int64)
        cand[0] = i
        cand[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (hyp != ref[i - 1]))
        # Insertions chain left to right: row[j] = min_k<=j (cand[k] + j - k).
        dist[i] = np.minimum.accumulate(cand - cols) + cols
    return dist


def _backtrace_numpy(dist, ref, hyp):
    i, j = len(ref), len(hyp)
    ops, ri, hj = [], [], []
    while i > 0 or j > 0:
        here = dist[i, j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i - 1, j - 1] == here:
            op = OP_MATCH
        elif i > 0 and j > 0 and dist[i - 1, j - 1] + 1 == here:
            op = OP_SUB
        elif i > 0 and dist[i - 1, j] + 1 == here:
            op = OP_DEL
        else:
            op = OP_INS
        if op == OP_INS:
            j -= 1
            ops.append(op); ri.append(i); hj.append(j)
        elif op == OP_DEL:
            i -= 1
            ops.append(op); ri.append(i); hj.append(j)
        else:
            i -= 1
            j -= 1
            ops.append(op); ri.append(i); hj.append(j)
    ops.reverse(); ri.reverse(); hj.reverse()
    return (np.asarray(ops, dtype=np.int8), np.asarray(ri, dtype=np.int64),
            np.asarray(hj, dtype=np.int64))


def align_numpy(ref: np.ndarray, hyp: np.ndarray):
    return _backtrace_numpy(_dp_matrix_numpy(ref, hyp), ref, hyp)


def _align_py(ref, hyp):
    n, m = len(ref), len(hyp)
    dist = np.empty((n + 1, m + 1), dtype=np.int64)
    for j in range(m + 1):
        dist[0, j] = j
    for i in range(1, n + 1):
        dist[i, 0] = i
        r = ref[i - 1]
        for j in range(1, m + 1):
            best = dist[i - 1, j - 1] + (0 if r == hyp[j - 1] else 1)
            d = dist[i - 1, j] + 1
            if d < best:
                best = d
            ins = dist[i, j - 1] + 1
            if ins < best:
                best = ins
            dist[i, j] = best

    size = n + m
    ops = np.empty(size, dtype=np.int8)
    ri = np.empty(size, dtype=np.int64)
    hj = np.empty(size, dtype=np.int64)
    k = size
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i, j]
        k -= 1
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i - 1, j - 1] == here:
            i -= 1
            j -= 1
            ops[k] = OP_MATCH
        elif i > 0 and j > 0 and dist[i - 1, j - 1] + 1 == here:
            i -= 1
            j -= 1
            ops[k] = OP_SUB
        elif i > 0 and dist[i - 1, j] + 1 == here:
            i -= 1
            ops[k] = OP_DEL
        else:
            j -= 1
            ops[k] = OP_INS
        ri[k] = i
        hj[k] = j
    return ops[k:].copy(), ri[k:].copy(), hj[k:].copy()


def batch_counts_numpy(flat_ref, ref_off, flat_hyp, hyp_off):
    out = np.empty((len(ref_off) - 1, 3), dtype=np.int64)
    for k in range(len(ref_off) - 1):
        ops, _, _ = align_numpy(flat_ref[ref_off[k]:ref_off[k + 1]],
                                flat_hyp[hyp_off[k]:hyp_off[k + 1]])
        out[k] = np.bincount(ops, minlength=4)[1:]
    return out


# ---------------------------------------------------------------------------
# Bootstrap resample aggregation
# ---------------------------------------------------------------------------

def resample_ratios_numpy(indices: np.ndarray, numer: np.ndarray, denom: np.ndarray) -> np.ndarray:
    """Per-row ratio ``sum(numer[idx]) / sum(denom[idx])`` over an index matrix."""
    return numer[indices].sum(axis=1) / denom[indices].sum(axis=1)


def _resample_ratios_py(indices, numer, denom):
    n_iter, n = indices.shape
    out = np.empty(n_iter, dtype=np.float64)
    for b in range(n_iter):
        num = 0
        den = 0
        for t in range(n):
            k = indices[b, t]
            num += numer[k]
            den += denom[k]
        out[b] = num / den
    return out


if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    align_numba = _jit(_align_py)

    @numba.njit(cache=True, nogil=True)
    def _batch_counts_jit(flat_ref, ref_off, flat_hyp, hyp_off, out):
        for k in range(len(ref_off) - 1):
            ops, _, _ = align_numba(flat_ref[ref_off[k]:ref_off[k + 1]],
                                    flat_hyp[hyp_off[k]:hyp_off[k + 1]])
            out[k, 0] = 0
            out[k, 1] = 0
            out[k, 2] = 0
            for op in ops:
                if op != OP_MATCH:
                    out[k, op - 1] += 1
        return out

    def batch_counts_numba(flat_ref, ref_off, flat_hyp, hyp_off):
        out = np.empty((len(ref_off) - 1, 3), dtype=np.int64)
        return _batch_counts_jit(flat_ref, ref_off, flat_hyp, hyp_off, out)

    resample_ratios_numba = _jit(_resample_ratios_py)
else:  # pragma: no cover - depends on environment
    align_numba = None
    batch_counts_numba = None
    resample_ratios_numba = None


def align(ref: np.ndarray, hyp: np.ndarray):
    """Minimal unit-cost alignment of two int64 symbol arrays.

    Returns ``(ops, ref_pos, hyp_pos)``. Ties in the backtrace prefer
    match, then substitution, deletion, insertion. For a deletion the
    hypothesis position is where the reference symbol would have gone, and
    symmetrically for insertions.
    """
    if USE_NUMBA:
        return align_numba(ref, hyp)
    return align_numpy(ref, hyp)


def batch_counts(flat_ref, ref_off, flat_hyp, hyp_off) -> np.ndarray:
    """``(n_pairs, 3)`` array of substitution, deletion and insertion counts."""
    if USE_NUMBA:
        return batch_counts_numba(flat_ref, ref_off, flat_hyp, hyp_off)
    return batch_counts_numpy(flat_ref, ref_off, flat_hyp, hyp_off)


def resample_ratios(indices, numer, denom) -> np.ndarray:
    if USE_NUMBA:
        return resample_ratios_numba(indices, numer, denom)
    return resample_ratios_numpy(indices, numer, denom)
