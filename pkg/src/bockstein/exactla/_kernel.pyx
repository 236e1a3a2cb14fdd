# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Smith normal form over Z/p^K (modulus below 2^31).

Same contract as ``_kernel_py.snf_modular``.
"""
from libc.stdlib cimport malloc, free
from libc.string cimport memset

ctypedef long long i64


cdef inline i64 _val(i64 x, i64 p, int K) nogil:
    cdef int v = 0
    if x == 0:
        return K
    while x % p == 0:
        x //= p
        v += 1
    return v


cdef i64 _inv(i64 a, i64 m) nogil:
    cdef i64 t = 0, newt = 1, r = m, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += m
    return t


cdef i64* _alloc(Py_ssize_t n) except NULL:
    cdef i64* buf = <i64*> malloc((n if n > 0 else 1) * sizeof(i64))
    if buf == NULL:
        raise MemoryError()
    memset(buf, 0, (n if n > 0 else 1) * sizeof(i64))
    return buf


cdef list _tolist(i64* buf, Py_ssize_t m, Py_ssize_t n):
    cdef Py_ssize_t i, j
    out = []
    for i in range(m):
        out.append([buf[i * n + j] for j in range(n)])
    return out


cdef void _swap_rows(i64* A, Py_ssize_t n, Py_ssize_t a, Py_ssize_t b) nogil:
    cdef Py_ssize_t j
    cdef i64 t
    for j in range(n):
        t = A[a * n + j]
        A[a * n + j] = A[b * n + j]
        A[b * n + j] = t


cdef void _swap_cols(i64* A, Py_ssize_t m, Py_ssize_t n, Py_ssize_t a, Py_ssize_t b) nogil:
    cdef Py_ssize_t i
    cdef i64 t
    for i in range(m):
        t = A[i * n + a]
        A[i * n + a] = A[i * n + b]
        A[i * n + b] = t


def snf_modular(rows, Py_ssize_t ncols, long long p, int K):
    cdef i64 M = 1
    cdef int e
    for e in range(K):
        M *= p
    if M >= (<i64> 1) << 31:
        raise OverflowError("modulus too large for the compiled kernel")
    cdef Py_ssize_t m = len(rows), n = ncols
    cdef i64* A = _alloc(m * n)
    cdef i64* U = _alloc(m * m)
    cdef i64* V = _alloc(n * n)
    cdef i64* W = _alloc(n * n)
    cdef Py_ssize_t i, j, k, jj, bi, bj
    cdef i64 x, c, pv, unit, uinv, v, bv
    exps = []
    try:
        for i in range(m):
            row = rows[i]
            for j in range(n):
                A[i * n + j] = <i64> (row[j] % M)
            U[i * m + i] = 1
        for i in range(n):
            V[i * n + i] = 1
            W[i * n + i] = 1
        for k in range(min(m, n)):
            bv = K
            bi = -1
            bj = -1
            for i in range(k, m):
                for j in range(k, n):
                    x = A[i * n + j]
                    if x != 0:
                        v = _val(x, p, K)
                        if v < bv:
                            bv = v
                            bi = i
                            bj = j
                            if v == 0:
                                break
                if bv == 0:
                    break
            if bi < 0:
                break
            if bi != k:
                _swap_rows(A, n, bi, k)
                _swap_rows(U, m, bi, k)
            if bj != k:
                _swap_cols(A, m, n, bj, k)
                _swap_cols(V, n, n, bj, k)
                _swap_rows(W, n, bj, k)
            pv = 1
            for e in range(bv):
                pv *= p
            unit = A[k * n + k] // pv
            uinv = _inv(unit % M, M)
            if uinv != 1:
                for jj in range(n):
                    A[k * n + jj] = (A[k * n + jj] * uinv) % M
                for jj in range(m):
                    U[k * m + jj] = (U[k * m + jj] * uinv) % M
            for i in range(k + 1, m):
                x = A[i * n + k]
                if x != 0:
                    c = x // pv
                    for jj in range(k, n):
                        if A[k * n + jj] != 0:
                            A[i * n + jj] = (A[i * n + jj] - c * A[k * n + jj]) % M
                            if A[i * n + jj] < 0:
                                A[i * n + jj] += M
                    for jj in range(m):
                        if U[k * m + jj] != 0:
                            U[i * m + jj] = (U[i * m + jj] - c * U[k * m + jj]) % M
                            if U[i * m + jj] < 0:
                                U[i * m + jj] += M
            for j in range(k + 1, n):
                x = A[k * n + j]
                if x != 0:
                    c = x // pv
                    A[k * n + j] = 0
                    for i in range(n):
                        if V[i * n + k] != 0:
                            V[i * n + j] = (V[i * n + j] - c * V[i * n + k]) % M
                            if V[i * n + j] < 0:
                                V[i * n + j] += M
                    for jj in range(n):
                        if W[j * n + jj] != 0:
                            W[k * n + jj] = (W[k * n + jj] + c * W[j * n + jj]) % M
            exps.append(bv)
        return exps, _tolist(U, m, m), _tolist(V, n, n), _tolist(W, n, n)
    finally:
        free(A)
        free(U)
        free(V)
        free(W)
