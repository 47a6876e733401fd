# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Batched zero-forcing SNR kernel.

For every trial ``t`` the estimate block ``est[t]`` (N x K) is factorised
through the Cholesky factor of its Gram matrix; the pseudo-inverse rows come
from two triangular solves and never form an explicit inverse.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef double complex cplx


cdef inline double abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx cconj(cplx z) noexcept nogil:
    return z.conjugate()


def zf_snr_batch(const cplx[:, :, ::1] est, const cplx[:, :, ::1] err,
                 const double[::1] noise, double pivot_rtol):
    cdef Py_ssize_t T = est.shape[0], N = est.shape[1], K = est.shape[2]
    cdef Py_ssize_t K2 = err.shape[2]
    if err.shape[0] != T or err.shape[1] != N:
        raise ValueError("estimate and error blocks differ in shape")
    if noise.shape[0] != T:
        raise ValueError("need one noise variance per trial")

    snr = np.empty((T, K), dtype=np.float64)
    valid = np.ones(T, dtype=np.uint8)
    cdef double[:, ::1] snr_v = snr
    cdef unsigned char[::1] valid_v = valid

    cdef cplx* L = <cplx*> malloc(K * K * sizeof(cplx))
    cdef cplx* W = <cplx*> malloc(K * N * sizeof(cplx))
    if L == NULL or W == NULL:
        free(L)
        free(W)
        raise MemoryError()

    cdef Py_ssize_t t, a, b, c, n, m
    cdef cplx s
    cdef double d, trace, rownorm, interf
    try:
        with nogil:
            for t in range(T):
                # Gram matrix, lower triangle
                trace = 0.0
                for a in range(K):
                    for b in range(a + 1):
                        s = 0
                        for n in range(N):
                            s = s + cconj(est[t, n, a]) * est[t, n, b]
                        L[a * K + b] = s
                    trace = trace + L[a * K + a].real

                # in-place Cholesky
                for a in range(K):
                    for b in range(a + 1):
                        s = L[a * K + b]
                        for c in range(b):
                            s = s - L[a * K + c] * cconj(L[b * K + c])
                        if a == b:
                            d = s.real
                            if d <= pivot_rtol * trace:
                                valid_v[t] = 0
                                break
                            L[a * K + a] = sqrt(d)
                        else:
                            L[a * K + b] = s / L[b * K + b].real
                    if not valid_v[t]:
                        break
                if not valid_v[t]:
                    for a in range(K):
                        snr_v[t, a] = 0.0
                    continue

                # Z = L^{-1} est^H  (forward substitution)
                for a in range(K):
                    for n in range(N):
                        s = cconj(est[t, n, a])
                        for c in range(a):
                            s = s - L[a * K + c] * W[c * N + n]
                        W[a * N + n] = s / L[a * K + a].real
                # pinv = L^{-H} Z  (back substitution)
                for a in range(K - 1, -1, -1):
                    for n in range(N):
                        s = W[a * N + n]
                        for c in range(a + 1, K):
                            s = s - cconj(L[c * K + a]) * W[c * N + n]
                        W[a * N + n] = s / L[a * K + a].real

                for a in range(K):
                    rownorm = 0.0
                    for n in range(N):
                        rownorm = rownorm + abs2(W[a * N + n])
                    interf = 0.0
                    for m in range(K2):
                        s = 0
                        for n in range(N):
                            s = s + W[a * N + n] * err[t, n, m]
                        interf = interf + abs2(s)
                    snr_v[t, a] = 1.0 / (interf + noise[t] * rownorm)
    finally:
        free(L)
        free(W)
    return snr, valid.astype(bool)
