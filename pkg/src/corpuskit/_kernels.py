"""Hot numeric inner loops: minhash signatures and sparse profile scoring.

Both kernels ship in two equivalent implementations: a numba ``@njit``
version and a pure-numpy fallback. The JIT path is used by default when
numba imports; set ``CORPUSKIT_DISABLE_JIT=1`` to force the numpy path.
``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE_JIT = os.environ.get("CORPUSKIT_DISABLE_JIT", "").lower() in ("1", "true", "yes")

try:
    if _DISABLE_JIT:
        raise ImportError("JIT disabled via CORPUSKIT_DISABLE_JIT")
    from numba import njit

    HAS_JIT = True
except ImportError:
    HAS_JIT = False


def minhash_signature_numpy(hashes: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minhash signature of a set of 64-bit shingle hashes.

    Permutation i maps x to a[i]*x + b[i] mod 2**64 (multiply-shift family,
    a odd); the signature component is the minimum over all shingles.
    """
    hashes = np.ascontiguousarray(hashes, dtype=np.uint64)
    sig = np.full(a.shape[0], np.iinfo(np.uint64).max, dtype=np.uint64)
    # Chunk over shingles to bound the (nperm, chunk) temporary.
    for start in range(0, hashes.shape[0], 4096):
        block = hashes[start : start + 4096]
        permuted = a[:, None] * block[None, :] + b[:, None]
        np.minimum(sig, permuted.min(axis=1), out=sig)
    return sig


def sparse_dot_numpy(indices: np.ndarray, values: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Dot product of a sparse vector (indices, values) with each matrix row."""
    if indices.shape[0] == 0:
        return np.zeros(matrix.shape[0], dtype=np.float64)
    return matrix[:, indices] @ values


if HAS_JIT:

    @njit(cache=True)
    def _minhash_signature_jit(hashes, a, b):  # pragma: no cover - exercised via dispatch
        nperm = a.shape[0]
        sig = np.full(nperm, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        for j in range(hashes.shape[0]):
            h = hashes[j]
            for i in range(nperm):
                v = a[i] * h + b[i]
                if v < sig[i]:
                    sig[i] = v
        return sig

    @njit(cache=True)
    def _sparse_dot_jit(indices, values, matrix):  # pragma: no cover - exercised via dispatch
        nrows = matrix.shape[0]
        out = np.zeros(nrows, dtype=np.float64)
        for r in range(nrows):
            acc = 0.0
            for k in range(indices.shape[0]):
                acc += matrix[r, indices[k]] * values[k]
            out[r] = acc
        return out

    def minhash_signature_jit(hashes: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _minhash_signature_jit(np.ascontiguousarray(hashes, dtype=np.uint64), a, b)

    def sparse_dot_jit(indices: np.ndarray, values: np.ndarray, matrix: np.ndarray) -> np.ndarray:
        return _sparse_dot_jit(indices, values, matrix)

    minhash_signature = minhash_signature_jit
    sparse_dot = sparse_dot_jit
else:
    minhash_signature = minhash_signature_numpy
    sparse_dot = sparse_dot_numpy
