# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: im2col / col2im loops plus BLAS dgemm.

Same contracts as ``_npkernels``. Activations are channels-last (B, L, C),
convolution weights (M, N, C).
"""

import numpy as np
cimport numpy as cnp
from libc.string cimport memcpy, memset
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

NAME = "cython"


cdef void _gemm(bint ta, bint tb, int m, int n, int k,
                double* a, int lda, double* b, int ldb,
                double beta, double* c, int ldc) noexcept nogil:
    # Row-major C[m, n] = op(A) @ op(B) + beta*C, expressed as the
    # column-major product C^T = op(B)^T @ op(A)^T.
    cdef char tra = b'T' if tb else b'N'
    cdef char trb = b'T' if ta else b'N'
    cdef double one = 1.0
    dgemm(&tra, &trb, &n, &m, &k, &one, b, &ldb, a, &lda, &beta, c, &ldc)


cdef void _im2col(double* x, double* cols, int B, int L, int C, int N) noexcept nogil:
    cdef int p = N // 2
    cdef int b, i, lo, hi
    cdef int row = N * C
    cdef double* dst
    for b in range(B):
        for i in range(L):
            dst = cols + (<Py_ssize_t>(b * L + i)) * row
            lo = i - p
            hi = i - p + N
            if lo >= 0 and hi <= L:
                memcpy(dst, x + (<Py_ssize_t>(b * L + lo)) * C, row * sizeof(double))
            else:
                memset(dst, 0, row * sizeof(double))
                if lo < 0:
                    dst = dst + (-lo) * C
                    lo = 0
                if hi > L:
                    hi = L
                if hi > lo:
                    memcpy(dst, x + (<Py_ssize_t>(b * L + lo)) * C, (hi - lo) * C * sizeof(double))


def conv1d_forward(x, w, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] xc = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] wc = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] bc = np.ascontiguousarray(b, dtype=np.float64)
    cdef int B = xc.shape[0], L = xc.shape[1], C = xc.shape[2]
    cdef int M = wc.shape[0], N = wc.shape[1]
    cdef int K = N * C
    cdef int rows = B * L
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] cols = np.empty((rows, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] out = np.empty((B, L, M))
    cdef double* o = &out[0, 0, 0]
    cdef double* bp = &bc[0]
    cdef Py_ssize_t r
    cdef int m
    with nogil:
        _im2col(&xc[0, 0, 0], &cols[0, 0], B, L, C, N)
        for r in range(rows):
            for m in range(M):
                o[r * M + m] = bp[m]
        _gemm(False, True, rows, M, K, &cols[0, 0], K, &wc[0, 0, 0], K, 1.0, o, M)
    return out, cols


def conv1d_backward(dout, cols, w, need_dx=True):
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] dc = np.ascontiguousarray(dout, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] colc = cols
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] wc = np.ascontiguousarray(w, dtype=np.float64)
    cdef int B = dc.shape[0], L = dc.shape[1], M = dc.shape[2]
    cdef int N = wc.shape[1], C = wc.shape[2]
    cdef int K = N * C
    cdef int rows = B * L
    cdef int p = N // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] dw = np.empty((M, N, C))
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] db = np.zeros(M)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] dcols
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] dx
    cdef double* d = &dc[0, 0, 0]
    cdef double* dbp = &db[0]
    cdef double* src
    cdef double* dst
    cdef Py_ssize_t r
    cdef int m, bi, i, k, c, j
    with nogil:
        _gemm(True, False, M, K, rows, d, M, &colc[0, 0], K, 0.0, &dw[0, 0, 0], K)
        for r in range(rows):
            for m in range(M):
                dbp[m] += d[r * M + m]
    if not need_dx:
        return None, dw, db
    dcols = np.empty((rows, K))
    dx = np.zeros((B, L, C))
    with nogil:
        _gemm(False, False, rows, K, M, d, M, &wc[0, 0, 0], K, 0.0, &dcols[0, 0], K)
        for bi in range(B):
            for i in range(L):
                src = &dcols[0, 0] + (<Py_ssize_t>(bi * L + i)) * K
                for k in range(N):
                    j = i + k - p
                    if j < 0 or j >= L:
                        continue
                    dst = &dx[0, 0, 0] + (<Py_ssize_t>(bi * L + j)) * C
                    for c in range(C):
                        dst[c] += src[k * C + c]
    return dx, dw, db


def maxpool_forward(x, int window):
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] xc = np.ascontiguousarray(x, dtype=np.float64)
    cdef int B = xc.shape[0], L = xc.shape[1], C = xc.shape[2]
    cdef int Lo = (L + window - 1) // window
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] out = np.empty((B, Lo, C))
    cdef cnp.ndarray[cnp.int64_t, ndim=3, mode="c"] idx = np.empty((B, Lo, C), dtype=np.int64)
    cdef int b, o, c, j, start, stop, best
    cdef double v, bv
    with nogil:
        for b in range(B):
            for o in range(Lo):
                start = o * window
                stop = start + window
                if stop > L:
                    stop = L
                for c in range(C):
                    best = start
                    bv = xc[b, start, c]
                    for j in range(start + 1, stop):
                        v = xc[b, j, c]
                        if v > bv:
                            bv = v
                            best = j
                    out[b, o, c] = bv
                    idx[b, o, c] = best
    return out, idx


def maxpool_backward(dout, idx, int length):
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] dc = np.ascontiguousarray(dout, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=3, mode="c"] ic = np.ascontiguousarray(idx, dtype=np.int64)
    cdef int B = dc.shape[0], Lo = dc.shape[1], C = dc.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] dx = np.zeros((B, length, C))
    cdef int b, o, c
    with nogil:
        for b in range(B):
            for o in range(Lo):
                for c in range(C):
                    dx[b, ic[b, o, c], c] += dc[b, o, c]
    return dx
